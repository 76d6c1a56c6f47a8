#include "cpctl/reachability.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <stdexcept>

namespace cpctl {

SafeSet almostSureGlobally(const Mdp& m, const Formula& b) {
    const size_t n = m.states.size();
    SafeSet ss;
    ss.member.assign(n, 0);
    ss.safeAction.assign(n, -1);
    for (size_t s = 0; s < n; ++s)
        ss.member[s] = evalBoolean(b, b.root, m.labelSet(static_cast<int>(s))) ? 1 : 0;

    // Greatest fixpoint by iterated removal: kick out any member all of whose
    // actions leak outside the current set, until stable. A worklist over
    // predecessors keeps the sweep linear in practice.
    std::vector<std::vector<int>> preds(n);
    for (size_t s = 0; s < n; ++s)
        for (const auto& act : m.states[s].actions)
            for (auto [succ, p] : act.to)
                if (p > 0.0) preds[static_cast<size_t>(succ)].push_back(static_cast<int>(s));

    auto hasClosedAction = [&](size_t s) {
        for (const auto& act : m.states[s].actions) {
            bool closed = true;
            for (auto [succ, p] : act.to)
                if (p > 0.0 && !ss.member[static_cast<size_t>(succ)]) closed = false;
            if (closed) return true;
        }
        return false;
    };

    std::deque<int> work;
    for (size_t s = 0; s < n; ++s)
        if (ss.member[s]) work.push_back(static_cast<int>(s));
    while (!work.empty()) {
        int s = work.front();
        work.pop_front();
        if (!ss.member[static_cast<size_t>(s)]) continue;
        if (hasClosedAction(static_cast<size_t>(s))) continue;
        ss.member[static_cast<size_t>(s)] = 0;
        for (int p : preds[static_cast<size_t>(s)])
            if (ss.member[static_cast<size_t>(p)]) work.push_back(p);
    }

    for (size_t s = 0; s < n; ++s) {
        if (!ss.member[s]) continue;
        for (size_t a = 0; a < m.states[s].actions.size(); ++a) {
            bool closed = true;
            for (auto [succ, p] : m.states[s].actions[a].to)
                if (p > 0.0 && !ss.member[static_cast<size_t>(succ)]) closed = false;
            if (closed) {
                ss.safeAction[s] = static_cast<int>(a);
                break;
            }
        }
    }
    return ss;
}

std::vector<std::vector<int>> requiredFlags(const Formula& f) {
    std::vector<std::vector<int>> req(f.pfCount());

    // Positive-threshold probability operators syntactically on a state
    // formula's conjunction spine, with their own requirements folded in.
    std::function<void(int, std::vector<int>&)> collect = [&](int nodeId, std::vector<int>& out) {
        const FormulaNode& n = f.node(nodeId);
        switch (n.kind) {
            case NodeKind::And:
            case NodeKind::Or:
                collect(n.left, out);
                collect(n.right, out);
                break;
            case NodeKind::ProbGeq:
                if (n.p > 0.0) {
                    out.push_back(n.pathIndex);
                    for (int k : req[static_cast<size_t>(n.pathIndex)]) out.push_back(k);
                }
                break;
            default:
                break;
        }
    };

    // pathSubs lists inner formulas first, so requirements are ready when a
    // parent needs them.
    for (size_t j = 0; j < f.pathSubs.size(); ++j) {
        const FormulaNode& prob = f.node(f.pathSubs[j]);
        const FormulaNode& path = f.node(prob.path);
        std::vector<int> out;
        collect(path.left, out);  // condition side only
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        req[j] = std::move(out);
    }
    return req;
}

ValueVector initialValueVector(const Mdp& m, const Formula& f) {
    const size_t n = m.states.size();
    const size_t pf = f.pfCount();
    if (pf > 16)
        throw std::invalid_argument("initialValueVector: too many path subformulas");

    ValueVector v;
    v.perState.resize(n);

    std::vector<std::set<std::string>> labels(n);
    for (size_t s = 0; s < n; ++s) labels[s] = m.labelSet(static_cast<int>(s));

    // Every state can refuse to assert anything beyond its literals.
    std::vector<double> zeroNu(pf, 0.0);
    for (size_t s = 0; s < n; ++s) {
        auto p = std::make_shared<FrontierPoint>();
        p->state = static_cast<int>(s);
        p->nu = zeroNu;
        p->mu = canonicalValuation(f, labels[s], p->nu);
        p->witness.kind = WitnessKind::Zero;
        v.perState[s].push_back(std::move(p));
    }

    std::vector<std::string> alitText(pf);
    for (size_t j = 0; j < pf; ++j)
        alitText[j] = printFormula(literalProjection(f, f.pathSubs[j]));
    auto req = requiredFlags(f);

    // One lock-in set per requirement-closed flag combination: a policy can
    // hold several counters at 1 only by staying inside the almost-sure
    // G region of the conjoined literal projections.
    for (unsigned mask = 1; mask < (1u << pf); ++mask) {
        bool closed = true;
        for (size_t j = 0; j < pf && closed; ++j) {
            if (!(mask & (1u << j))) continue;
            for (int k : req[j])
                if (!(mask & (1u << static_cast<unsigned>(k)))) closed = false;
        }
        if (!closed) continue;

        std::string conj;
        for (size_t j = 0; j < pf; ++j) {
            if (!(mask & (1u << j))) continue;
            if (!conj.empty()) conj += " & ";
            conj += "(" + alitText[j] + ")";
        }
        SafeSet ss = almostSureGlobally(m, parseFormula(conj, Fragment::Cpctl));

        std::map<int, int> safeActions;
        for (size_t s = 0; s < n; ++s)
            if (ss.member[s]) safeActions[static_cast<int>(s)] = ss.safeAction[s];
        if (safeActions.empty()) continue;

        std::vector<double> nu(pf, 0.0);
        for (size_t j = 0; j < pf; ++j)
            if (mask & (1u << j)) nu[j] = 1.0;

        for (const auto& [s, act] : safeActions) {
            (void)act;
            auto p = std::make_shared<FrontierPoint>();
            p->state = s;
            p->nu = nu;
            p->mu = canonicalValuation(f, labels[static_cast<size_t>(s)], nu);
            p->witness.kind = WitnessKind::SafeSet;
            p->witness.safeActions = safeActions;
            v.perState[static_cast<size_t>(s)].push_back(std::move(p));
        }
    }

    PruneConfig cfg;  // 0/1 indicator points: only exact dominance can fire
    for (size_t s = 0; s < n; ++s) v.perState[s] = pruneMaximal(v.perState[s], cfg);
    return v;
}

}  // namespace cpctl
