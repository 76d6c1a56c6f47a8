#include "cpctl/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <stdexcept>

#include "cpctl/reachability.hpp"

namespace cpctl {

namespace {

constexpr double kResidualBound = 1e-10;

// -----------------------------------------------------------------------
// Linear algebra for reachability probabilities.

// Iterative Tarjan over the subgraph induced by `unknown`; components are
// emitted successors-first, which is exactly the order the blocks must be
// solved in. Iterative because product chains can be very deep.
std::vector<std::vector<int>> sccBlocks(const MarkovChain& c, const std::vector<uint8_t>& unknown) {
    const int n = static_cast<int>(c.size());
    std::vector<int> index(static_cast<size_t>(n), -1), low(static_cast<size_t>(n), 0);
    std::vector<uint8_t> onStack(static_cast<size_t>(n), 0);
    std::vector<int> stack;
    std::vector<std::vector<int>> blocks;
    int counter = 0;

    struct Frame {
        int v;
        size_t edge;
    };
    for (int start = 0; start < n; ++start) {
        if (!unknown[static_cast<size_t>(start)] || index[static_cast<size_t>(start)] >= 0) continue;
        std::vector<Frame> frames;
        frames.push_back({start, 0});
        index[static_cast<size_t>(start)] = low[static_cast<size_t>(start)] = counter++;
        stack.push_back(start);
        onStack[static_cast<size_t>(start)] = 1;
        while (!frames.empty()) {
            Frame& fr = frames.back();
            const auto& row = c.rows[static_cast<size_t>(fr.v)];
            bool descended = false;
            while (fr.edge < row.size()) {
                int w = row[fr.edge].first;
                double p = row[fr.edge].second;
                ++fr.edge;
                if (p <= 0.0 || !unknown[static_cast<size_t>(w)]) continue;
                if (index[static_cast<size_t>(w)] < 0) {
                    index[static_cast<size_t>(w)] = low[static_cast<size_t>(w)] = counter++;
                    stack.push_back(w);
                    onStack[static_cast<size_t>(w)] = 1;
                    frames.push_back({w, 0});
                    descended = true;
                    break;
                }
                if (onStack[static_cast<size_t>(w)])
                    low[static_cast<size_t>(fr.v)] =
                        std::min(low[static_cast<size_t>(fr.v)], index[static_cast<size_t>(w)]);
            }
            if (descended) continue;
            int v = fr.v;
            frames.pop_back();
            if (!frames.empty())
                low[static_cast<size_t>(frames.back().v)] =
                    std::min(low[static_cast<size_t>(frames.back().v)], low[static_cast<size_t>(v)]);
            if (low[static_cast<size_t>(v)] == index[static_cast<size_t>(v)]) {
                std::vector<int> block;
                while (true) {
                    int w = stack.back();
                    stack.pop_back();
                    onStack[static_cast<size_t>(w)] = 0;
                    block.push_back(w);
                    if (w == v) break;
                }
                blocks.push_back(std::move(block));
            }
        }
    }
    return blocks;
}

void gaussSolve(std::vector<std::vector<double>>& a, std::vector<double>& b) {
    const size_t k = b.size();
    for (size_t col = 0; col < k; ++col) {
        size_t piv = col;
        for (size_t r = col + 1; r < k; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (std::abs(a[piv][col]) < 1e-14)
            throw std::runtime_error("reachability system singular after preprocessing");
        std::swap(a[col], a[piv]);
        std::swap(b[col], b[piv]);
        for (size_t r = 0; r < k; ++r) {
            if (r == col || a[r][col] == 0.0) continue;
            double factor = a[r][col] / a[col][col];
            for (size_t cc = col; cc < k; ++cc) a[r][cc] -= factor * a[col][cc];
            b[r] -= factor * b[col];
        }
    }
    for (size_t i = 0; i < k; ++i) b[i] /= a[i][i];
}

// P(transient U goal) per state: 1 on goal, 0 where the goal is unreachable
// through transient states, a linear system elsewhere, solved one strongly
// connected block at a time (successor blocks first).
std::vector<double> reachProb(const MarkovChain& c, const std::vector<uint8_t>& transient,
                              const std::vector<uint8_t>& goal) {
    const size_t n = c.size();
    std::vector<double> x(n, 0.0);
    for (size_t s = 0; s < n; ++s)
        if (goal[s]) x[s] = 1.0;

    std::vector<std::vector<int>> preds(n);
    for (size_t s = 0; s < n; ++s)
        for (auto [t, p] : c.rows[s])
            if (p > 0.0) preds[static_cast<size_t>(t)].push_back(static_cast<int>(s));

    // Positive-probability support: backward closure of the goal through
    // transient states.
    std::vector<uint8_t> pos = goal;
    std::vector<int> work;
    for (size_t s = 0; s < n; ++s)
        if (goal[s]) work.push_back(static_cast<int>(s));
    while (!work.empty()) {
        int t = work.back();
        work.pop_back();
        for (int s : preds[static_cast<size_t>(t)]) {
            if (pos[static_cast<size_t>(s)] || !transient[static_cast<size_t>(s)] ||
                goal[static_cast<size_t>(s)])
                continue;
            pos[static_cast<size_t>(s)] = 1;
            work.push_back(s);
        }
    }

    std::vector<uint8_t> unknown(n, 0);
    bool any = false;
    for (size_t s = 0; s < n; ++s) {
        unknown[s] = (transient[s] && !goal[s] && pos[s]) ? 1 : 0;
        any = any || unknown[s];
    }

    if (any) {
        for (const auto& block : sccBlocks(c, unknown)) {
            const size_t k = block.size();
            std::map<int, size_t> pos_in;
            for (size_t i = 0; i < k; ++i) pos_in[block[i]] = i;
            std::vector<std::vector<double>> a(k, std::vector<double>(k, 0.0));
            std::vector<double> b(k, 0.0);
            for (size_t i = 0; i < k; ++i) {
                a[i][i] = 1.0;
                for (auto [t, p] : c.rows[static_cast<size_t>(block[i])]) {
                    if (p <= 0.0) continue;
                    auto it = pos_in.find(t);
                    if (it != pos_in.end())
                        a[i][it->second] -= p;
                    else
                        b[i] += p * x[static_cast<size_t>(t)];  // goal or earlier block or 0
                }
            }
            gaussSolve(a, b);
            for (size_t i = 0; i < k; ++i) x[static_cast<size_t>(block[i])] = b[i];
        }
    }

    for (size_t s = 0; s < n; ++s) {
        if (!unknown[s]) continue;
        double acc = 0.0;
        for (auto [t, p] : c.rows[s]) acc += p * x[static_cast<size_t>(t)];
        if (std::abs(x[s] - acc) > kResidualBound)
            throw std::runtime_error("reachability solve residual exceeds 1e-10");
        x[s] = std::min(1.0, std::max(0.0, x[s]));
    }
    return x;
}

}  // namespace

// ---------------------------------------------------------------------------
// Exact bottom-up checker.

CheckResult exactCheck(const MarkovChain& c, const Formula& f) {
    const size_t n = c.size();
    CheckResult r;
    r.sat.assign(f.sfCount(), {});
    r.prob.assign(f.pfCount(), {});

    auto satOf = [&](int nodeId) -> const std::vector<uint8_t>& {
        return r.sat[static_cast<size_t>(f.node(nodeId).sfIndex)];
    };

    for (int id : f.stateSubs) {
        const FormulaNode& nd = f.node(id);
        std::vector<uint8_t> row(n, 0);
        switch (nd.kind) {
            case NodeKind::True:
                row.assign(n, 1);
                break;
            case NodeKind::False:
                break;
            case NodeKind::Atom:
                for (size_t s = 0; s < n; ++s) row[s] = c.hasLabel(static_cast<int>(s), nd.atom);
                break;
            case NodeKind::NegAtom:
                for (size_t s = 0; s < n; ++s) row[s] = !c.hasLabel(static_cast<int>(s), nd.atom);
                break;
            case NodeKind::And: {
                const auto& l = satOf(nd.left);
                const auto& rr = satOf(nd.right);
                for (size_t s = 0; s < n; ++s) row[s] = l[s] && rr[s];
                break;
            }
            case NodeKind::Or: {
                const auto& l = satOf(nd.left);
                const auto& rr = satOf(nd.right);
                for (size_t s = 0; s < n; ++s) row[s] = l[s] || rr[s];
                break;
            }
            case NodeKind::ProbGeq: {
                const FormulaNode& pn = f.node(nd.path);
                std::vector<double> pr(n, 0.0);
                const auto& satL = satOf(pn.left);
                switch (pn.kind) {
                    case NodeKind::Next:
                        for (size_t s = 0; s < n; ++s)
                            for (auto [t, p] : c.rows[s]) pr[s] += p * satL[static_cast<size_t>(t)];
                        break;
                    case NodeKind::Until: {
                        const auto& satR = satOf(pn.right);
                        std::vector<uint8_t> trans(n, 0);
                        for (size_t s = 0; s < n; ++s) trans[s] = satL[s] && !satR[s];
                        pr = reachProb(c, trans, satR);
                        break;
                    }
                    case NodeKind::WeakUntil:
                    case NodeKind::ContinuingWeakUntil: {
                        // 1 - P(reach a condition-and-goal-free state while the
                        // condition holds and the goal does not).
                        const auto& satR = satOf(pn.right);
                        std::vector<uint8_t> goalSet(n, 0), trans(n, 0), fail(n, 0);
                        for (size_t s = 0; s < n; ++s) {
                            goalSet[s] = (pn.kind == NodeKind::ContinuingWeakUntil)
                                             ? (satL[s] && satR[s])
                                             : satR[s];
                            trans[s] = satL[s] && !goalSet[s];
                            fail[s] = !satL[s] && !goalSet[s];
                        }
                        std::vector<double> bad = reachProb(c, trans, fail);
                        for (size_t s = 0; s < n; ++s) pr[s] = 1.0 - bad[s];
                        break;
                    }
                    default:
                        throw std::logic_error("exactCheck: malformed path node");
                }
                r.prob[static_cast<size_t>(pn.pathIndex)] = pr;
                for (size_t s = 0; s < n; ++s) row[s] = pr[s] >= nd.p - kTieTolerance;
                break;
            }
            default:
                throw std::logic_error("exactCheck: path node in state position");
        }
        r.sat[static_cast<size_t>(nd.sfIndex)] = std::move(row);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Two-level chain family reference curve.

bool checkThm1Chain(double alpha, double eps) {
    Mdp m = builtinThm1Chain(alpha, eps);
    MarkovChain c = induceChain(m, diracFirstPolicy(m));
    Formula inner = parseFormula("P>=1/2 [ c W (c & a) ]", Fragment::Cpctl);
    CheckResult r = exactCheck(c, inner);

    int left1 = m.stateIndex("left1");
    bool innerOneStepIn = r.sat[static_cast<size_t>(inner.node(inner.root).sfIndex)]
                               [static_cast<size_t>(left1)] != 0;

    // Path-family analysis of the nested formula on this chain, following its
    // intended satisfaction region [1/2, 1] x {0}: the eps-arm breaks the
    // outer condition at its second step and counts as unrescued, so any
    // eps > 0 refutes the P>=1 threshold; the left-right arm is rescued
    // exactly when the inner threshold already holds one step in (probability
    // alpha of hitting the goal leaf); the left-left arm always satisfies the
    // outer weak-until. Arms of probability zero never refute.
    bool rightArmOk = eps <= 0.0;
    bool leftRightArmOk = innerOneStepIn || alpha >= 1.0 || eps >= 1.0;
    return rightArmOk && leftRightArmOk;
}

// ---------------------------------------------------------------------------
// Scalar safety value iteration.

std::vector<double> maxSafetyVI(const Mdp& m, const Formula& safe) {
    const size_t n = m.size();
    std::vector<uint8_t> b(n, 0);
    for (size_t s = 0; s < n; ++s)
        b[s] = evalBoolean(safe, m.labelSet(static_cast<int>(s))) ? 1 : 0;
    SafeSet pinned = almostSureGlobally(m, safe);

    // Computed as 1 - (min probability of leaving the safe region), iterated
    // from below with the almost-sure region pinned at zero escape; the
    // qualitative pinning makes plain value iteration converge to the right
    // fixpoint.
    std::vector<double> y(n, 0.0);
    for (size_t s = 0; s < n; ++s)
        if (!b[s]) y[s] = 1.0;
    const double tol = 1e-13;
    for (int iter = 0; iter < 5000000; ++iter) {
        double change = 0.0;
        for (size_t s = 0; s < n; ++s) {
            if (!b[s] || pinned.member[s]) continue;
            double best = 1.0;
            for (const auto& act : m.states[s].actions) {
                double acc = 0.0;
                for (auto [t, p] : act.to) acc += p * y[static_cast<size_t>(t)];
                best = std::min(best, acc);
            }
            change = std::max(change, std::abs(best - y[s]));
            y[s] = best;
        }
        if (change <= tol) break;
    }

    std::vector<double> v(n);
    for (size_t s = 0; s < n; ++s) v[s] = 1.0 - y[s];
    return v;
}

MemorylessPolicy greedySafetyPolicy(const Mdp& m, const Formula& safe,
                                    const std::vector<double>& value) {
    const size_t n = m.size();
    (void)safe;
    MemorylessPolicy pi;
    pi.perState.resize(n);
    for (size_t s = 0; s < n; ++s) {
        const auto& actions = m.states[s].actions;
        size_t best = 0;
        double bestVal = -1.0;
        for (size_t a = 0; a < actions.size(); ++a) {
            double acc = 0.0;
            for (auto [t, p] : actions[a].to) acc += p * value[static_cast<size_t>(t)];
            if (acc > bestVal + 1e-12) {
                bestVal = acc;
                best = a;
            }
        }
        pi.perState[s].assign(actions.size(), 0.0);
        pi.perState[s][best] = 1.0;
    }
    return pi;
}

// ---------------------------------------------------------------------------
// Product chain construction.

ProductCheck productChainCheck(const Mdp& m, const FiniteMemoryPolicy& pi, const Formula& f) {
    constexpr long kTransitionCap = 10000000;
    ProductCheck out;
    std::map<std::pair<int, int>, int> index;
    std::vector<std::pair<int, int>> todo;

    auto intern = [&](int s, int mem) {
        auto key = std::make_pair(s, mem);
        auto it = index.find(key);
        if (it != index.end()) return it->second;
        int id = static_cast<int>(out.origin.size());
        index[key] = id;
        out.origin.push_back(key);
        todo.push_back(key);
        return id;
    };

    long transitions = 0;
    intern(m.initial, pi.initialMemory);
    out.initial = 0;
    while (!todo.empty()) {
        auto [s, mem] = todo.back();
        todo.pop_back();
        std::vector<double> delta = pi.actionRule(m, s, mem);
        std::map<int, double> dist;  // product successor -> probability
        const auto& actions = m.states[static_cast<size_t>(s)].actions;
        for (size_t a = 0; a < actions.size(); ++a) {
            if (delta[a] <= 0.0) continue;
            for (auto [t, p] : actions[a].to) {
                if (p <= 0.0) continue;
                int nextMem = pi.memoryUpdate(s, mem, t);
                dist[intern(t, nextMem)] += delta[a] * p;
            }
        }
        int id = index.at({s, mem});
        if (static_cast<size_t>(id) >= out.chain.rows.size()) out.chain.rows.resize(index.size());
        out.chain.rows[static_cast<size_t>(id)].assign(dist.begin(), dist.end());
        transitions += static_cast<long>(dist.size());
        if (transitions > kTransitionCap)
            throw std::runtime_error("product chain exceeds the transition cap");
    }

    const size_t pn = out.origin.size();
    out.chain.rows.resize(pn);
    out.chain.names.resize(pn);
    out.chain.labels.resize(pn);
    for (size_t i = 0; i < pn; ++i) {
        auto [s, mem] = out.origin[i];
        out.chain.names[i] = m.states[static_cast<size_t>(s)].name + "#" + std::to_string(mem);
        out.chain.labels[i] = m.states[static_cast<size_t>(s)].labels;
    }
    out.chain.initial = out.initial;
    out.chain.validate();
    out.result = exactCheck(out.chain, f);
    return out;
}

// ---------------------------------------------------------------------------
// Monte-Carlo estimation.

namespace {

uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Counter-based: draw k of a run's private stream, independent of execution
// order, so results are reproducible for a fixed seed.
double uniform01(uint64_t base, uint64_t draw) {
    return static_cast<double>(splitmix64(base + draw) >> 11) * 0x1.0p-53;
}

constexpr double kWilsonZ = 2.5758293035489004;  // two-sided 99%

double wilsonLower(double k, double n) {
    double p = k / n;
    double z2 = kWilsonZ * kWilsonZ;
    double denom = 1.0 + z2 / n;
    double center = p + z2 / (2.0 * n);
    double half = kWilsonZ * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    return std::max(0.0, (center - half) / denom);
}

double wilsonUpper(double k, double n) {
    double p = k / n;
    double z2 = kWilsonZ * kWilsonZ;
    double denom = 1.0 + z2 / n;
    double center = p + z2 / (2.0 * n);
    double half = kWilsonZ * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    return std::min(1.0, (center + half) / denom);
}

}  // namespace

SimResult simulate(const Mdp& m, const FiniteMemoryPolicy& pi, const Formula& f, long runs,
                   int horizon, uint64_t seed) {
    if (runs <= 0 || horizon <= 0) throw std::invalid_argument("simulate: runs and horizon must be positive");
    const size_t pf = f.pfCount();
    for (int probId : f.pathSubs)
        if (f.node(f.node(probId).path).kind != NodeKind::ContinuingWeakUntil)
            throw std::invalid_argument("simulate supports continuing weak-until obligations only");

    // Per obligation: the condition / goal state-subformula indices and the
    // literal projections that settle runs without solving anything.
    std::vector<int> condSf(pf), goalSf(pf);
    std::vector<Formula> alitCond(pf), alitGoal(pf);
    for (size_t j = 0; j < pf; ++j) {
        const FormulaNode& pn = f.node(f.node(f.pathSubs[j]).path);
        condSf[j] = f.node(pn.left).sfIndex;
        goalSf[j] = f.node(pn.right).sfIndex;
        alitCond[j] = literalProjection(f, pn.left);
        alitGoal[j] = literalProjection(f, pn.right);
    }

    std::vector<std::set<std::string>> labels(m.size());
    for (size_t s = 0; s < m.size(); ++s) labels[s] = m.labelSet(static_cast<int>(s));

    // Cache the valuation proxy per (state, memory) pair encountered.
    std::map<std::pair<int, int>, std::vector<uint8_t>> proxyCache;
    const std::vector<double> zeroNu(pf, 0.0);
    auto proxy = [&](int s, int mem) -> const std::vector<uint8_t>& {
        auto key = std::make_pair(s, mem);
        auto it = proxyCache.find(key);
        if (it != proxyCache.end()) return it->second;
        const std::vector<double>& nu =
            (mem >= 0) ? pi.memories[static_cast<size_t>(mem)].nu : zeroNu;
        return proxyCache.emplace(key, canonicalValuation(f, labels[static_cast<size_t>(s)], nu))
            .first->second;
    };

    SimResult out;
    out.runs = runs;
    out.successes.assign(pf, 0);
    out.failures.assign(pf, 0);
    out.unsettled.assign(pf, 0);
    out.lo.assign(pf, 0.0);
    out.hi.assign(pf, 1.0);

    enum class RunState { Open, Success, Fail };
    std::vector<RunState> st(pf);
    std::vector<uint8_t> condPrefixCert(pf), goalMaybeSeen(pf);

    for (long run = 0; run < runs; ++run) {
        uint64_t base = splitmix64(seed ^ (0x2545f4914f6cdd1dULL * static_cast<uint64_t>(run + 1)));
        uint64_t draw = 0;
        int s = m.initial;
        int mem = pi.initialMemory;
        std::fill(st.begin(), st.end(), RunState::Open);
        std::fill(condPrefixCert.begin(), condPrefixCert.end(), 1);
        std::fill(goalMaybeSeen.begin(), goalMaybeSeen.end(), 0);

        for (int step = 0; step <= horizon; ++step) {
            const std::vector<uint8_t>& mu = proxy(s, mem);
            const FmMemory* mm = (mem >= 0) ? &pi.memories[static_cast<size_t>(mem)] : nullptr;
            for (size_t j = 0; j < pf; ++j) {
                if (st[j] != RunState::Open) continue;
                bool goalCert = mu[static_cast<size_t>(condSf[j])] &&
                                mu[static_cast<size_t>(goalSf[j])];
                bool lockCert = mm && mm->mode == MemoryMode::SafeLock &&
                                mm->nu[j] >= 1.0 - kTieTolerance;
                if ((goalCert || lockCert) && condPrefixCert[j]) {
                    st[j] = RunState::Success;
                    continue;
                }
                bool condAlit = evalBoolean(alitCond[j], labels[static_cast<size_t>(s)]);
                bool goalAlit =
                    condAlit && evalBoolean(alitGoal[j], labels[static_cast<size_t>(s)]);
                if (!condAlit && !goalMaybeSeen[j] && !goalAlit) {
                    // The condition is certainly broken and the goal was
                    // certainly missed at every step so far: a definite miss.
                    st[j] = RunState::Fail;
                    continue;
                }
                if (goalAlit) goalMaybeSeen[j] = 1;
                if (!mu[static_cast<size_t>(condSf[j])]) condPrefixCert[j] = 0;
            }

            if (step == horizon) break;
            std::vector<double> delta = pi.actionRule(m, s, mem);
            double ua = uniform01(base, draw++);
            const auto& actions = m.states[static_cast<size_t>(s)].actions;
            size_t a = 0;
            double acc = 0.0;
            for (size_t i = 0; i < delta.size(); ++i) {
                acc += delta[i];
                if (ua < acc || i + 1 == delta.size()) {
                    a = i;
                    break;
                }
            }
            double us = uniform01(base, draw++);
            const auto& row = actions[a].to;
            int next = row.back().first;
            acc = 0.0;
            for (auto [t, p] : row) {
                acc += p;
                if (us < acc) {
                    next = t;
                    break;
                }
            }
            mem = pi.memoryUpdate(s, mem, next);
            s = next;
        }

        for (size_t j = 0; j < pf; ++j) {
            if (st[j] == RunState::Success)
                ++out.successes[j];
            else if (st[j] == RunState::Fail)
                ++out.failures[j];
            else
                ++out.unsettled[j];
        }
    }

    double n = static_cast<double>(runs);
    for (size_t j = 0; j < pf; ++j) {
        out.lo[j] = wilsonLower(static_cast<double>(out.successes[j]), n);
        out.hi[j] = wilsonUpper(static_cast<double>(out.successes[j] + out.unsettled[j]), n);
    }
    return out;
}

}  // namespace cpctl
