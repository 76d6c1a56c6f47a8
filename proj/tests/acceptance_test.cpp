// Acceptance suite: one self-contained check per published claim, printed as a
// single pass/fail line each. Exits nonzero if any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cpctl/engine.hpp"
#include "cpctl/policy.hpp"
#include "cpctl/reachability.hpp"
#include "cpctl/verify.hpp"
#include "test_util.hpp"

using namespace cpctl;

namespace {

int g_failures = 0;

void report(int idx, const char* title, bool ok, double seconds, const std::string& detail) {
    std::printf("criterion %d (%s): %s [%.2fs]%s%s\n", idx, title, ok ? "PASS" : "FAIL", seconds,
                detail.empty() ? "" : " — ", detail.c_str());
    if (!ok) ++g_failures;
}

template <typename Fn>
void criterion(int idx, const char* title, Fn body) {
    auto start = std::chrono::steady_clock::now();
    bool ok = false;
    std::string detail;
    try {
        ok = body(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report(idx, title, ok, secs, detail);
}

const char* kExample1Formula = "P>=2/3 [G P>=7/12 [G !a]]";
const char* kGridFormula = "P>=0.8 [G P>=0.6 [!d W (!d & G)]]";

MarkovChain example1Chain(int firstAction) {
    Mdp m = builtinExample1();
    MemorylessPolicy pi = diracFirstPolicy(m);
    pi.perState[0] = (firstAction == 0) ? std::vector<double>{1.0, 0.0}
                                        : std::vector<double>{0.0, 1.0};
    return induceChain(m, pi);
}

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// Shared state between the soundness regression and the gridworld criterion.
struct ModelRun {
    Mdp m;
    Formula f;
    MaxAchievableResult mr;
    bool pointsCertified = false;
    double bestOuter = 0.0;
};

std::vector<ModelRun> g_runs;  // example1, gridworld1, gridworld2

bool criterion1(std::string& detail) {
    Mdp m = builtinExample1();
    Formula f = parseFormula(kExample1Formula, Fragment::Cpctl);
    MarkovChain c1 = example1Chain(0);
    MarkovChain c2 = example1Chain(1);
    CheckResult r1 = exactCheck(c1, f);
    CheckResult r2 = exactCheck(c2, f);

    bool ok = true;
    ok = ok && near(r1.prob[0][0], 0.75, 1e-9);        // P(G !a | pi1, s0)
    ok = ok && near(r1.prob[1][0], 0.5, 1e-9);         // P(phi | pi1, s0)
    ok = ok && near(r2.prob[1][0], 2.0 / 3.0, 1e-9);   // P(phi | pi2, s0)

    // Per-state inner annotations over the non-initial states.
    std::vector<double> inner;
    for (size_t s = 1; s < c1.size(); ++s) inner.push_back(r1.prob[0][s]);
    std::vector<double> expect = {0.75, 2.0 / 3.0, 1.0, 0.5, 1.0, 0.0, 0.0, 1.0};
    std::sort(inner.begin(), inner.end());
    std::sort(expect.begin(), expect.end());
    for (size_t i = 0; i < expect.size(); ++i) ok = ok && near(inner[i], expect[i], 1e-9);

    // Satisfaction set of the inner operator. Note p(s7) = 1 >= 7/12, so s7
    // belongs to the set alongside the other five states.
    const FormulaNode& innerProb = f.node(f.pathSubs[0]);
    std::vector<std::string> sat;
    for (size_t s = 0; s < c1.size(); ++s)
        if (r1.sat[static_cast<size_t>(innerProb.sfIndex)][s]) sat.push_back(c1.names[s]);
    ok = ok && sat == std::vector<std::string>{"s0", "s1", "s2", "s5", "s6", "s7"};
    if (!ok) detail = "exact example-1 values deviate";
    return ok;
}

bool criterion2(std::string& detail) {
    Mdp m = builtinExample1();
    Formula f = parseFormula(kExample1Formula, Fragment::Cpctl);
    EngineConfig cfg;
    VIResult vi = runVI(m, f, cfg);
    if (vi.status != VIStatus::TargetMet || !vi.targetPoint) {
        detail = "2/3 target not met";
        return false;
    }
    FiniteMemoryPolicy pi = extractPolicy(m, f, vi.targetPoint);
    ProductCheck pc = productChainCheck(m, pi, f);
    if (pc.initialProb(1) < 2.0 / 3.0 - 1e-9) {
        detail = "product probability below 2/3";
        return false;
    }
    Formula g = parseFormula("P>=0.7 [G P>=7/12 [G !a]]", Fragment::Cpctl);
    VIResult vu = runVI(m, g, cfg);
    if (vu.status != VIStatus::ConvergedTargetUnmet) {
        detail = "0.7 threshold did not converge unmet";
        return false;
    }
    return true;
}

bool criterion3(std::string& detail) {
    for (int i = 0; i <= 10; ++i) {
        double alpha = static_cast<double>(i) / 10.0;
        for (double eps : {0.0, 0.01, 0.1}) {
            bool expected = (alpha >= 0.5 - 1e-12) && eps == 0.0;
            if (checkThm1Chain(alpha, eps) != expected) {
                std::ostringstream os;
                os << "mismatch at alpha=" << alpha << " eps=" << eps;
                detail = os.str();
                return false;
            }
        }
    }
    return true;
}

bool criterion4(std::string& detail) {
    testutil::Rng rng(404);
    for (int trial = 0; trial < 200; ++trial) {
        Formula f = testutil::randomRootedCpctl(rng);
        Formula proj = testutil::projectionComparison(f);
        MarkovChain c = testutil::randomChain(rng, 12);
        CheckResult a = exactCheck(c, f);
        CheckResult b = exactCheck(c, proj);
        int ja = f.node(f.root).pathIndex;
        int jb = proj.node(proj.root).pathIndex;
        for (size_t s = 0; s < c.size(); ++s) {
            bool oneA = a.prob[static_cast<size_t>(ja)][s] >= 1.0 - 1e-9;
            bool oneB = b.prob[static_cast<size_t>(jb)][s] >= 1.0 - 1e-9;
            if (oneA != oneB) {
                detail = "counterexample at trial " + std::to_string(trial) + " state " +
                         std::to_string(s);
                return false;
            }
        }
    }
    return true;
}

bool criterion5(std::string& detail) {
    testutil::Rng rng(505);
    for (int trial = 0; trial < 200; ++trial) {
        Formula f = testutil::randomRootedCpctl(rng);
        Formula fd = fdTransform(f);
        MarkovChain c = testutil::randomChain(rng, 12);
        CheckResult a = exactCheck(c, f);
        CheckResult b = exactCheck(c, fd);
        int ja = f.node(f.root).pathIndex;
        int jb = fd.node(fd.root).pathIndex;
        for (size_t s = 0; s < c.size(); ++s) {
            if (!near(a.prob[static_cast<size_t>(ja)][s], b.prob[static_cast<size_t>(jb)][s],
                      1e-9)) {
                detail = "counterexample at trial " + std::to_string(trial) + " state " +
                         std::to_string(s);
                return false;
            }
        }
    }
    return true;
}

bool criterion6(std::string& detail) {
    struct Spec {
        const char* model;
        const char* formula;
    };
    const Spec specs[3] = {{"example1", kExample1Formula},
                           {"gridworld1", kGridFormula},
                           {"gridworld2", kGridFormula}};
    g_runs.clear();
    for (const Spec& sp : specs) {
        ModelRun run{builtinModel(sp.model), parseFormula(sp.formula, Fragment::Cpctl), {}, false,
                     0.0};
        EngineConfig cfg;
        int objective = run.f.node(run.f.root).pathIndex;
        run.mr = maxAchievable(run.m, run.f, objective, cfg);

        const auto& pts = run.mr.vi.frontiers.perState[static_cast<size_t>(run.m.initial)];
        if (pts.empty()) {
            detail = std::string(sp.model) + ": empty frontier at the initial state";
            return false;
        }

        PointPtr best;
        for (const PointPtr& p : pts) {
            FiniteMemoryPolicy pi = extractPolicy(run.m, run.f, p);
            ProductCheck pc = productChainCheck(run.m, pi, run.f);
            for (size_t j = 0; j < run.f.pfCount(); ++j) {
                if (pc.initialProb(static_cast<int>(j)) < p->nu[j] - 1e-9) {
                    std::ostringstream os;
                    os << sp.model << ": product value " << pc.initialProb(static_cast<int>(j))
                       << " below promised " << p->nu[j] << " on counter " << j;
                    detail = os.str();
                    return false;
                }
            }
            double outer = pc.initialProb(objective);
            if (!best || outer > run.bestOuter) {
                best = p;
                run.bestOuter = outer;
            }
        }

        // Monte-Carlo bracket for the best point's exact product values.
        FiniteMemoryPolicy pi = extractPolicy(run.m, run.f, best);
        ProductCheck pc = productChainCheck(run.m, pi, run.f);
        SimResult sim = simulate(run.m, pi, run.f, 100000, 200, 42);
        for (size_t j = 0; j < run.f.pfCount(); ++j) {
            double exact = pc.initialProb(static_cast<int>(j));
            if (exact < sim.lo[j] - 1e-12 || exact > sim.hi[j] + 1e-12) {
                std::ostringstream os;
                os << sp.model << ": interval [" << sim.lo[j] << ", " << sim.hi[j]
                   << "] misses exact " << exact << " on counter " << j;
                detail = os.str();
                return false;
            }
        }
        run.pointsCertified = true;
        g_runs.push_back(std::move(run));
    }
    return true;
}

bool criterion7(std::string& detail) {
    testutil::Rng rng(707);
    for (int trial = 0; trial < 50; ++trial) {
        Mdp m = testutil::randomMdp(rng, 15);
        std::string lit = testutil::randomLiteral(rng);
        std::string thr = testutil::randomThreshold(rng);
        Formula f = parseFormula("P>=" + thr + " [G " + lit + "]", Fragment::Cpctl);
        Formula safe = parseFormula(lit, Fragment::Cpctl);

        std::vector<double> exact = maxSafetyVI(m, safe);
        EngineConfig cfg;
        cfg.convergenceDelta = 1e-9;
        MaxAchievableResult mr = maxAchievable(m, f, 0, cfg);
        double best = 0.0;
        for (const PointPtr& p : mr.vi.frontiers.perState[static_cast<size_t>(m.initial)])
            best = std::max(best, p->nu[0]);
        if (!near(best, exact[static_cast<size_t>(m.initial)], 1e-6)) {
            std::ostringstream os;
            os << "trial " << trial << ": engine " << best << " vs value iteration "
               << exact[static_cast<size_t>(m.initial)];
            detail = os.str();
            return false;
        }
    }
    return true;
}

bool criterion8(std::string& detail) {
    if (g_runs.size() != 3) {
        detail = "soundness regression did not populate the gridworld runs";
        return false;
    }
    for (size_t v = 1; v <= 2; ++v) {
        const ModelRun& run = g_runs[v];
        if (!run.pointsCertified) {
            detail = "gridworld frontier points were not certified";
            return false;
        }
        if (run.mr.curve.empty()) {
            detail = "empty frontier staircase";
            return false;
        }
        for (size_t i = 1; i < run.mr.curve.size(); ++i) {
            if (run.mr.curve[i].first < run.mr.curve[i - 1].first ||
                run.mr.curve[i].second > run.mr.curve[i - 1].second + 1e-12) {
                detail = "staircase is not nonincreasing";
                return false;
            }
        }
    }

    // Variant 1: the safest memoryless policy does not maximize the formula.
    const ModelRun& run = g_runs[1];
    Formula safe = parseFormula("!d", Fragment::Cpctl);
    std::vector<double> value = maxSafetyVI(run.m, safe);
    MemorylessPolicy greedy = greedySafetyPolicy(run.m, safe, value);
    MarkovChain chain = induceChain(run.m, greedy);
    CheckResult r = exactCheck(chain, run.f);
    int objective = run.f.node(run.f.root).pathIndex;
    double greedyOuter = r.prob[static_cast<size_t>(objective)][static_cast<size_t>(chain.initial)];
    if (run.bestOuter <= greedyOuter + 1e-9) {
        std::ostringstream os;
        os << "frontier outer " << run.bestOuter << " does not exceed greedy-safety outer "
           << greedyOuter;
        detail = os.str();
        return false;
    }
    return true;
}

bool criterion9(std::string& detail) {
    testutil::Rng rng(909);
    int done = 0;
    while (done < 100) {
        Mdp m = testutil::randomMdp(rng, 10);
        Formula f = testutil::randomRootedCpctl(rng);
        EngineConfig cfg;
        cfg.maxIters = 10;
        VIResult vi = runVI(m, f, cfg);
        const auto& pts = vi.frontiers.perState[static_cast<size_t>(m.initial)];
        if (pts.empty()) continue;
        const PointPtr& point = pts[static_cast<size_t>(rng.range(static_cast<int>(pts.size())))];
        FiniteMemoryPolicy pi = extractPolicy(m, f, point);
        ValuedPolicy vp = valuedFromPolicy(m, f, pi);
        if (!certifyCoherence(m, f, vp).valid) {
            detail = "unmutated policy failed to certify at trial " + std::to_string(done);
            return false;
        }

        // One single-entry corruption chosen so a compatibility clause
        // provably breaks: either a valuation bit raised above the canonical
        // valuation with comfortable slack, or a counter inflated past the
        // value its successors support.
        ValuedPolicy bad = vp;
        bool mutated = false;
        int start = rng.range(static_cast<int>(bad.nodes.size()));
        for (size_t off = 0; off < bad.nodes.size() && !mutated; ++off) {
            auto& n = bad.nodes[(static_cast<size_t>(start) + off) % bad.nodes.size()];
            if (rng.coin()) {
                for (int id : f.stateSubs) {
                    const FormulaNode& fn = f.node(id);
                    size_t i = static_cast<size_t>(fn.sfIndex);
                    if (n.mu[i] != 0) continue;
                    bool provable =
                        (fn.kind == NodeKind::Atom && !m.hasLabel(n.state, fn.atom)) ||
                        (fn.kind == NodeKind::NegAtom && m.hasLabel(n.state, fn.atom)) ||
                        (fn.kind == NodeKind::And &&
                         (n.mu[static_cast<size_t>(f.node(fn.left).sfIndex)] == 0 ||
                          n.mu[static_cast<size_t>(f.node(fn.right).sfIndex)] == 0)) ||
                        (fn.kind == NodeKind::ProbGeq &&
                         n.nu[static_cast<size_t>(fn.pathIndex)] < fn.p - 1e-6);
                    if (provable) {
                        n.mu[i] = 1;
                        mutated = true;
                        break;
                    }
                }
            } else {
                for (size_t j = 0; j < f.pfCount() && !mutated; ++j) {
                    const FormulaNode& prob = f.node(f.pathSubs[j]);
                    const FormulaNode& path = f.node(prob.path);
                    if (path.right < 0) continue;
                    size_t goalSf = static_cast<size_t>(f.node(path.right).sfIndex);
                    size_t condSf = static_cast<size_t>(f.node(path.left).sfIndex);
                    // With the rescue and lock cases both closed off, the
                    // counter is capped by its successor average.
                    if (n.nu[j] <= 0.69 && n.mu[goalSf] == 0 &&
                        !(n.mu[condSf] == 1 && n.nu[j] >= 1.0 - 1e-9)) {
                        n.nu[j] += 0.3;
                        mutated = true;
                    }
                }
            }
        }
        if (!mutated) continue;

        Certificate cert = certifyCoherence(m, f, bad);
        if (cert.valid) {
            detail = "mutation escaped the certifier at trial " + std::to_string(done);
            return false;
        }
        const CompatReport& rep = cert.state.ok() ? cert.path : cert.state;
        if (rep.violations.empty() || rep.violations[0].clause.empty() ||
            rep.violations[0].node < 0) {
            detail = "rejection lacked a located clause at trial " + std::to_string(done);
            return false;
        }
        ++done;
    }
    return true;
}

}  // namespace

int main() {
    criterion(1, "example-1 exact values", criterion1);
    criterion(2, "example-1 synthesis", criterion2);
    criterion(3, "two-level chain threshold grid", criterion3);
    criterion(4, "literal projection property", criterion4);
    criterion(5, "finite-decisiveness equivalence", criterion5);
    criterion(6, "soundness regression", criterion6);
    criterion(7, "flat-formula cross-check", criterion7);
    criterion(8, "gridworld frontier reproduction", criterion8);
    criterion(9, "certificate mutation testing", criterion9);
    if (g_failures > 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
