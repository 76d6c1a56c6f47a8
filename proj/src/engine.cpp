#include "cpctl/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "cpctl/reachability.hpp"

namespace cpctl {

void EngineConfig::validate() const {
    if (epsilon < 0.0 || convergenceDelta <= 0.0 || slaterMargin <= 0.0)
        throw std::invalid_argument("engine config: tolerances must be positive");
    if (maxIters < 1 || wMix < 1 || maxPointsPerState < 1 || threads < 1)
        throw std::invalid_argument("engine config: counts must be at least 1");
}

namespace {

// Per-state evaluation of one candidate: walk the state subformulas bottom-up,
// computing the valuation bits and the counters together. A counter is gated
// to 0 when its condition fails here, snaps to 1 when condition and goal both
// hold here, and otherwise takes the successor-weighted mass u[j].
struct Eval {
    std::vector<uint8_t> mu;
    std::vector<double> nu;
    bool recursive = false;  // some positive counter leans on successors
};

Eval evalCandidate(const Formula& f, const std::set<std::string>& labels,
                   const std::vector<double>& u) {
    Eval e;
    e.mu.assign(f.sfCount(), 0);
    e.nu.assign(f.pfCount(), 0.0);
    for (int id : f.stateSubs) {
        const FormulaNode& nd = f.node(id);
        size_t sf = static_cast<size_t>(nd.sfIndex);
        switch (nd.kind) {
            case NodeKind::True:
                e.mu[sf] = 1;
                break;
            case NodeKind::False:
                break;
            case NodeKind::Atom:
                e.mu[sf] = labels.count(nd.atom) ? 1 : 0;
                break;
            case NodeKind::NegAtom:
                e.mu[sf] = labels.count(nd.atom) ? 0 : 1;
                break;
            case NodeKind::And:
                e.mu[sf] = e.mu[static_cast<size_t>(f.node(nd.left).sfIndex)] &&
                           e.mu[static_cast<size_t>(f.node(nd.right).sfIndex)];
                break;
            case NodeKind::Or:
                e.mu[sf] = e.mu[static_cast<size_t>(f.node(nd.left).sfIndex)] ||
                           e.mu[static_cast<size_t>(f.node(nd.right).sfIndex)];
                break;
            case NodeKind::ProbGeq: {
                const FormulaNode& pn = f.node(nd.path);
                size_t j = static_cast<size_t>(pn.pathIndex);
                bool mu1 = e.mu[static_cast<size_t>(f.node(pn.left).sfIndex)] != 0;
                bool mu2 = pn.right >= 0 &&
                           e.mu[static_cast<size_t>(f.node(pn.right).sfIndex)] != 0;
                double nu = 0.0;
                if (mu1 && mu2) {
                    nu = 1.0;
                } else if (mu1) {
                    nu = u[j];
                    if (nu > 0.0) e.recursive = true;
                }
                e.nu[j] = nu;
                e.mu[sf] = nu >= nd.p - kTieTolerance ? 1 : 0;
                break;
            }
            default:
                throw std::logic_error("evalCandidate: path node in state position");
        }
    }
    return e;
}

struct Partial {
    std::vector<std::pair<int, PointPtr>> assign;
    std::vector<double> u;
};

bool uDominates(const std::vector<double>& a, const std::vector<double>& b) {
    for (size_t j = 0; j < a.size(); ++j)
        if (a[j] < b[j]) return false;
    return true;
}

// Keep only Pareto-maximal partial sums, capped for tractability; final
// counters are monotone in u, so dropping a dominated partial never loses a
// maximal point.
void prunePartials(std::vector<Partial>& partials, int cap) {
    std::vector<Partial> kept;
    for (auto& p : partials) {
        bool covered = false;
        for (const auto& q : kept)
            if (uDominates(q.u, p.u)) {
                covered = true;
                break;
            }
        if (covered) continue;
        kept.erase(std::remove_if(kept.begin(), kept.end(),
                                  [&](const Partial& q) { return uDominates(p.u, q.u); }),
                   kept.end());
        kept.push_back(std::move(p));
    }
    if (static_cast<int>(kept.size()) > cap) {
        std::stable_sort(kept.begin(), kept.end(),
                         [](const Partial& a, const Partial& b) { return a.u > b.u; });
        kept.resize(static_cast<size_t>(cap));
    }
    partials = std::move(kept);
}

void stepState(const Mdp& m, const Formula& f, const ValueVector& v, const EngineConfig& cfg,
               int state, const std::set<std::string>& labels, std::vector<PointPtr>& out) {
    const auto& actions = m.states[static_cast<size_t>(state)].actions;
    const size_t pf = f.pfCount();

    std::vector<Candidate> cands;
    for (size_t a = 0; a < actions.size(); ++a) {
        std::vector<Partial> partials(1);
        partials[0].u.assign(pf, 0.0);
        for (auto [t, p] : actions[a].to) {
            if (p <= 0.0) continue;
            std::vector<Partial> next;
            for (const auto& partial : partials) {
                for (const PointPtr& q : v.perState[static_cast<size_t>(t)]) {
                    Partial np = partial;
                    np.assign.emplace_back(t, q);
                    for (size_t j = 0; j < pf; ++j) np.u[j] += p * q->nu[j];
                    next.push_back(std::move(np));
                }
            }
            prunePartials(next, cfg.maxPointsPerState);
            partials = std::move(next);
        }
        for (auto& partial : partials) {
            Candidate c;
            c.delta.assign(actions.size(), 0.0);
            c.delta[a] = 1.0;
            std::sort(partial.assign.begin(), partial.assign.end(),
                      [](const auto& x, const auto& y) { return x.first < y.first; });
            c.assign = std::move(partial.assign);
            c.u = std::move(partial.u);
            cands.push_back(std::move(c));
        }
    }

    std::vector<Candidate> mixed = mixCandidates(m, state, cands, cfg.wMix);
    cands.insert(cands.end(), std::make_move_iterator(mixed.begin()),
                 std::make_move_iterator(mixed.end()));

    // Accumulate: previous points first so they win pruning ties and their
    // witnesses stay stable across iterations.
    std::vector<PointPtr> pts = v.perState[static_cast<size_t>(state)];
    for (auto& c : cands) {
        Eval e = evalCandidate(f, labels, c.u);
        auto p = std::make_shared<FrontierPoint>();
        p->state = state;
        p->mu = std::move(e.mu);
        p->nu = std::move(e.nu);
        if (e.recursive) {
            p->witness.kind = WitnessKind::Recursive;
            p->witness.delta = std::move(c.delta);
            p->witness.succ = std::move(c.assign);
        } else {
            bool anyOne = false;
            for (double x : p->nu) anyOne = anyOne || x > 0.0;
            p->witness.kind = anyOne ? WitnessKind::TerminalOne : WitnessKind::Zero;
        }
        pts.push_back(std::move(p));
    }

    PruneConfig pc;
    pc.epsilon = cfg.epsilon;
    pc.maxPointsPerState = cfg.maxPointsPerState;
    out = pruneMaximal(pts, pc);
}

// Largest uncovered improvement any new point makes over the previous
// frontier at its state.
double movement(const ValueVector& prev, const ValueVector& next) {
    double worst = 0.0;
    for (size_t s = 0; s < next.perState.size(); ++s) {
        for (const PointPtr& p : next.perState[s]) {
            double best = 1e300;
            for (const PointPtr& q : prev.perState[s]) {
                double d = 0.0;
                for (size_t j = 0; j < p->nu.size(); ++j)
                    d = std::max(d, p->nu[j] - q->nu[j]);
                for (size_t i = 0; i < p->mu.size(); ++i)
                    if (p->mu[i] > q->mu[i]) d = std::max(d, 1.0);
                best = std::min(best, d);
            }
            worst = std::max(worst, best);
        }
    }
    return worst;
}

// Synthesis is defined for the continuing fragment only; every path operator
// must be a continuing weak-until.
void requireContinuing(const Formula& f) {
    for (int id : f.pathSubs)
        if (f.node(f.node(id).path).kind != NodeKind::ContinuingWeakUntil)
            throw std::invalid_argument("synthesis requires continuing weak-until path formulas");
}

}  // namespace

ValueVector bellmanStep(const Mdp& m, const Formula& f, const ValueVector& v,
                        const EngineConfig& cfg) {
    const size_t n = m.size();
    ValueVector out;
    out.perState.resize(n);

    std::vector<std::set<std::string>> labels(n);
    for (size_t s = 0; s < n; ++s) labels[s] = m.labelSet(static_cast<int>(s));

    if (cfg.threads <= 1 || n < 2) {
        for (size_t s = 0; s < n; ++s)
            stepState(m, f, v, cfg, static_cast<int>(s), labels[s], out.perState[s]);
        return out;
    }

    size_t workers = std::min<size_t>(static_cast<size_t>(cfg.threads), n);
    std::vector<std::thread> pool;
    for (size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            for (size_t s = w; s < n; s += workers)
                stepState(m, f, v, cfg, static_cast<int>(s), labels[s], out.perState[s]);
        });
    }
    for (auto& t : pool) t.join();
    return out;
}

PointPtr targetPoint(const Formula& f, const ValueVector& v, int s0) {
    size_t rootSf = static_cast<size_t>(f.node(f.root).sfIndex);
    for (const PointPtr& p : v.perState[static_cast<size_t>(s0)])
        if (p->mu[rootSf]) return p;
    return nullptr;
}

VIResult runVI(const Mdp& m, const Formula& f, const EngineConfig& cfg) {
    cfg.validate();
    m.validate();
    requireContinuing(f);
    VIResult res;
    ValueVector v = initialValueVector(m, f);

    if (PointPtr tp = targetPoint(f, v, m.initial)) {
        res.status = VIStatus::TargetMet;
        res.targetPoint = tp;
        res.frontiers = std::move(v);
        return res;
    }

    for (int iter = 1; iter <= cfg.maxIters; ++iter) {
        ValueVector next = bellmanStep(m, f, v, cfg);
        res.iterations = iter;
        if (PointPtr tp = targetPoint(f, next, m.initial)) {
            res.status = VIStatus::TargetMet;
            res.targetPoint = tp;
            res.frontiers = std::move(next);
            return res;
        }
        double change = movement(v, next);
        v = std::move(next);
        if (change < cfg.convergenceDelta) {
            res.status = VIStatus::ConvergedTargetUnmet;
            res.frontiers = std::move(v);
            return res;
        }
    }
    res.status = VIStatus::IterCap;
    res.frontiers = std::move(v);
    return res;
}

MaxAchievableResult maxAchievable(const Mdp& m, const Formula& f, int objective,
                                  const EngineConfig& cfg, int innerIndex) {
    cfg.validate();
    m.validate();
    requireContinuing(f);
    if (objective < 0 || static_cast<size_t>(objective) >= f.pfCount())
        throw std::invalid_argument("maxAchievable: objective out of range");
    if (innerIndex < 0) {
        auto req = requiredFlags(f);
        const auto& deps = req[static_cast<size_t>(objective)];
        innerIndex = deps.empty() ? 0 : deps.front();
    }
    if (static_cast<size_t>(innerIndex) >= f.pfCount())
        throw std::invalid_argument("maxAchievable: inner index out of range");

    MaxAchievableResult out;
    ValueVector v = initialValueVector(m, f);
    out.vi.status = VIStatus::IterCap;
    for (int iter = 1; iter <= cfg.maxIters; ++iter) {
        ValueVector next = bellmanStep(m, f, v, cfg);
        out.vi.iterations = iter;
        double change = movement(v, next);
        v = std::move(next);
        if (change < cfg.convergenceDelta) {
            out.vi.status = VIStatus::ConvergedTargetUnmet;
            break;
        }
    }
    out.vi.frontiers = std::move(v);

    // Upper staircase at the initial state: for each inner level reached,
    // the best objective value among points at least that high.
    std::vector<std::pair<double, double>> pts;
    for (const PointPtr& p : out.vi.frontiers.perState[static_cast<size_t>(m.initial)])
        pts.emplace_back(p->nu[static_cast<size_t>(innerIndex)],
                         p->nu[static_cast<size_t>(objective)]);
    std::sort(pts.begin(), pts.end());
    std::vector<std::pair<double, double>> curve;
    double running = 0.0;
    for (auto it = pts.rbegin(); it != pts.rend(); ++it) {
        running = std::max(running, it->second);
        if (!curve.empty() && curve.back().first == it->first)
            curve.back().second = running;
        else
            curve.emplace_back(it->first, running);
    }
    std::reverse(curve.begin(), curve.end());
    out.curve = std::move(curve);
    return out;
}

SlaterReport slaterCheck(const Mdp& m, const Formula& f, const EngineConfig& cfg) {
    SlaterReport rep;
    std::vector<double> d = f.thresholds();
    for (double& x : d) x = std::min(1.0, x + cfg.slaterMargin);
    rep.bumpedThresholds = d;
    Formula bumped = slaterTransform(f, d);
    VIResult r = runVI(m, bumped, cfg);
    rep.satisfiable = r.status == VIStatus::TargetMet;
    rep.iterations = r.iterations;
    return rep;
}

}  // namespace cpctl
