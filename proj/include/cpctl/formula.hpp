#ifndef CPCTL_FORMULA_HPP
#define CPCTL_FORMULA_HPP

#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace cpctl {

// Probabilities derived by the solvers are compared against literal thresholds
// with this slack; ties like nu == p must count as satisfied despite rounding.
inline constexpr double kTieTolerance = 1e-12;

enum class Fragment { Cpctl, SafePctl };

enum class NodeKind {
    True,
    False,
    Atom,
    NegAtom,
    And,
    Or,       // evaluation-only (FD output); never produced by the parser
    ProbGeq,
    Next,
    WeakUntil,
    // ContinuingWeakUntil(l, r) stands for  l W (l & r);  the goal conjunct l
    // is implicit so the engine has a single path-formula case to handle.
    ContinuingWeakUntil,
    Until,    // evaluation-only (FD output)
};

struct FormulaNode {
    NodeKind kind = NodeKind::True;
    std::string atom;       // Atom / NegAtom
    int left = -1;          // first child (state node id), if any
    int right = -1;         // second child (state node id), if any
    double p = 0.0;         // ProbGeq threshold
    int path = -1;          // ProbGeq: id of its path node
    int sfIndex = -1;       // state nodes: position in stateSubs
    int pathIndex = -1;     // ProbGeq and its path node: position in pathSubs
};

// Immutable after construction (finalizeFormula fills the index tables).
struct Formula {
    std::vector<FormulaNode> nodes;
    int root = -1;
    // State subformula ids, children before parents (nondecreasing total depth
    // along any chain), so bottom-up passes can walk this list in order.
    std::vector<int> stateSubs;
    // One ProbGeq node id per path subformula, inner formulas first.
    std::vector<int> pathSubs;
    Fragment fragment = Fragment::Cpctl;

    const FormulaNode& node(int id) const { return nodes[static_cast<size_t>(id)]; }
    size_t sfCount() const { return stateSubs.size(); }
    size_t pfCount() const { return pathSubs.size(); }
    std::vector<double> thresholds() const;
    bool isBooleanOnly() const;
};

struct ParseError : std::runtime_error {
    size_t position;
    ParseError(const std::string& msg, size_t pos) : std::runtime_error(msg), position(pos) {}
};

struct Depths {
    std::vector<int> nesting;  // D_N per node
    std::vector<int> total;    // D_t per node
};

// Builds the index tables, validates fragment restrictions, and returns the
// finished immutable formula. Throws ParseError on fragment violations.
Formula finalizeFormula(std::vector<FormulaNode> nodes, int root, Fragment fragment);

Formula parseFormula(const std::string& text, Fragment fragment, bool continuingNormalize = false);

std::string printFormula(const Formula& f);
std::string printNode(const Formula& f, int id);

bool structurallyEqual(const Formula& a, int ia, const Formula& b, int ib);
bool structurallyEqual(const Formula& a, const Formula& b);

// Extracts the subtree rooted at nodeId as a standalone formula.
Formula subformula(const Formula& f, int nodeId);

// alit: the strongest conjunction of literals implied by a CPCTL state formula.
Formula literalProjection(const Formula& f, int nodeId);
inline Formula literalProjection(const Formula& f) { return literalProjection(f, f.root); }

// T(f, d): same shape with threshold j replaced by d[j].
Formula slaterTransform(const Formula& f, const std::vector<double>& d);

// FD(f): rewrites every continuing weak-until into an until against an
// almost-sure-globally disjunct; consumed only by the exact oracle.
Formula fdTransform(const Formula& f);

Depths depths(const Formula& f);

// Xi(f, labels)(nu): maximal valuation vector consistent with the labels and
// counters, one bit per entry of stateSubs, computed bottom-up.
std::vector<uint8_t> canonicalValuation(const Formula& f,
                                        const std::set<std::string>& labels,
                                        const std::vector<double>& nu);

// Evaluates a probability-free node on a label set.
bool evalBoolean(const Formula& f, int nodeId, const std::set<std::string>& labels);
inline bool evalBoolean(const Formula& f, const std::set<std::string>& labels) {
    return evalBoolean(f, f.root, labels);
}

}  // namespace cpctl

#endif
