#ifndef CPCTL_FRONTIER_HPP
#define CPCTL_FRONTIER_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <utility>
#include <vector>

#include "cpctl/model.hpp"

namespace cpctl {

struct FrontierPoint;
using PointPtr = std::shared_ptr<const FrontierPoint>;

enum class WitnessKind {
    TerminalOne,  // every counter decided locally (goal hit now); future free
    Zero,         // nothing asserted beyond literals; arbitrary action
    Recursive,    // play delta, hand each successor its chosen point
    SafeSet,      // lock into an almost-sure G(alit) region
};

struct Witness {
    WitnessKind kind = WitnessKind::Zero;
    std::vector<double> delta;                   // Recursive: distribution over A(s)
    std::vector<std::pair<int, PointPtr>> succ;  // Recursive: successor state -> point
    std::map<int, int> safeActions;              // SafeSet: member state -> action index
};

// One achievable (mu, nu) pair at a state. mu is always the canonical
// valuation of nu at the owning state's labels.
struct FrontierPoint {
    int state = -1;
    std::vector<uint8_t> mu;
    std::vector<double> nu;
    Witness witness;
};

struct ValueVector {
    std::vector<std::vector<PointPtr>> perState;
};

struct PruneConfig {
    double epsilon = 1e-3;     // thinning radius on nu
    int maxPointsPerState = 64;
};

// q <= p componentwise on both mu and nu.
bool dominates(const FrontierPoint& p, const FrontierPoint& q);

// Non-dominated subset, epsilon-thinned, capped. Points earlier in the input
// win ties, so passing the previous iterate first keeps established points
// (and their witnesses) stable across iterations.
std::vector<PointPtr> pruneMaximal(const std::vector<PointPtr>& points, const PruneConfig& cfg);

// A synthesis candidate at one state: an action distribution plus one chosen
// point per successor state; u caches the delta-weighted sums of successor
// counters (the recursive branch of the Bellman counter rule).
struct Candidate {
    std::vector<double> delta;
    std::vector<std::pair<int, PointPtr>> assign;  // sorted by successor state
    std::vector<double> u;
};

// Pairwise grid mixtures: delta = w*d1 + (1-w)*d2, per-successor assignments
// merged (shared successors take the heavier side), u recomputed exactly from
// the merged assignment -- counters are never interpolated.
std::vector<Candidate> mixCandidates(const Mdp& m, int state, const std::vector<Candidate>& cands,
                                     int wMix);

}  // namespace cpctl

#endif
