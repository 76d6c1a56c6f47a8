#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "cpctl/engine.hpp"
#include "cpctl/verify.hpp"
#include "test_util.hpp"

using namespace cpctl;

namespace {

const char* kNestedText = "P>=2/3 [G P>=7/12 [G !a]]";

MarkovChain example1Chain(int firstAction) {
    Mdp m = builtinExample1();
    MemorylessPolicy pi = diracFirstPolicy(m);
    pi.perState[0] = (firstAction == 0) ? std::vector<double>{1.0, 0.0}
                                        : std::vector<double>{0.0, 1.0};
    return induceChain(m, pi);
}

}  // namespace

TEST_CASE("exact check reproduces the example-1 values") {
    Mdp m = builtinExample1();
    Formula f = parseFormula(kNestedText, Fragment::Cpctl);
    size_t inner = 0, outer = 1;

    MarkovChain c1 = example1Chain(0);
    CheckResult r1 = exactCheck(c1, f);
    // Inner counter p(G !a) per state; s0 takes the first action's value.
    std::vector<double> expect1 = {0.75, 0.75, 1.0, 0.5, 0.0, 1.0, 2.0 / 3.0, 1.0, 0.0};
    for (size_t s = 0; s < c1.size(); ++s)
        CHECK(r1.prob[inner][s] == doctest::Approx(expect1[s]).epsilon(1e-12));
    CHECK(r1.prob[outer][0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(!r1.holdsAtInitial(f, c1));

    MarkovChain c2 = example1Chain(1);
    CheckResult r2 = exactCheck(c2, f);
    CHECK(r2.prob[inner][0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(r2.prob[outer][0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(r2.holdsAtInitial(f, c2));  // 2/3 >= 2/3, ties satisfy

    // Satisfaction set of the inner operator on the second chain.
    const FormulaNode& innerProb = f.node(f.pathSubs[inner]);
    std::vector<std::string> satNames;
    for (size_t s = 0; s < c2.size(); ++s)
        if (r2.sat[static_cast<size_t>(innerProb.sfIndex)][s]) satNames.push_back(c2.names[s]);
    CHECK(satNames == std::vector<std::string>{"s0", "s1", "s2", "s5", "s6", "s7"});
}

TEST_CASE("theorem-1 chain oracle matches its frozen region") {
    CHECK(checkThm1Chain(0.5, 0.0));
    CHECK(checkThm1Chain(0.75, 0.0));
    CHECK(checkThm1Chain(1.0, 0.0));
    CHECK(!checkThm1Chain(0.4, 0.0));
    CHECK(!checkThm1Chain(0.0, 0.0));
    CHECK(!checkThm1Chain(0.9, 0.01));
    CHECK(!checkThm1Chain(0.5, 0.1));
    CHECK(!checkThm1Chain(1.0, 0.1));
}

TEST_CASE("max safety value iteration on example 1") {
    Mdp m = builtinExample1();
    Formula notA = parseFormula("!a", Fragment::Cpctl);
    std::vector<double> v = maxSafetyVI(m, notA);
    std::vector<double> expect = {0.75, 0.75, 1.0, 0.5, 0.0, 1.0, 2.0 / 3.0, 1.0, 0.0};
    REQUIRE(v.size() == expect.size());
    for (size_t s = 0; s < v.size(); ++s)
        CHECK(v[s] == doctest::Approx(expect[s]).epsilon(1e-9));

    // The greedy policy induced by the values achieves them.
    MemorylessPolicy pi = greedySafetyPolicy(m, notA, v);
    pi.validate(m);
    CHECK(pi.perState[0][0] == 1.0);  // first action: 3/4 beats 2/3

    std::vector<FormulaNode> tn(1);
    tn[0].kind = NodeKind::True;
    Formula taut = finalizeFormula(std::move(tn), 0, Fragment::Cpctl);
    for (double x : maxSafetyVI(m, taut)) CHECK(x == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("projection lemma on random chains") {
    testutil::Rng rng(33);
    int done = 0;
    while (done < 60) {
        Formula f = testutil::randomRootedCpctl(rng);
        Formula proj = testutil::projectionComparison(f);
        MarkovChain c = testutil::randomChain(rng);
        CheckResult a = exactCheck(c, f);
        CheckResult b = exactCheck(c, proj);
        int ja = f.node(f.root).pathIndex;
        int jb = proj.node(proj.root).pathIndex;
        for (size_t s = 0; s < c.size(); ++s)
            CHECK(a.prob[static_cast<size_t>(ja)][s] ==
                  doctest::Approx(b.prob[static_cast<size_t>(jb)][s]).epsilon(1e-9));
        ++done;
    }
}

TEST_CASE("finite-decisiveness rewrite preserves probabilities") {
    testutil::Rng rng(34);
    for (int trial = 0; trial < 60; ++trial) {
        Formula f = testutil::randomRootedCpctl(rng);
        Formula fd = fdTransform(f);
        MarkovChain c = testutil::randomChain(rng);
        CheckResult a = exactCheck(c, f);
        CheckResult b = exactCheck(c, fd);
        int ja = f.node(f.root).pathIndex;
        int jb = fd.node(fd.root).pathIndex;
        for (size_t s = 0; s < c.size(); ++s)
            CHECK(a.prob[static_cast<size_t>(ja)][s] ==
                  doctest::Approx(b.prob[static_cast<size_t>(jb)][s]).epsilon(1e-9));
    }
}

TEST_CASE("next operator is a one-step expectation") {
    const char* text = R"({
      "atoms": ["a"],
      "initial": "s0",
      "states": [
        {"name": "s0", "actions": [{"name": "go", "to": [["s1", 0.5], ["s2", 0.5]]}]},
        {"name": "s1", "labels": ["a"], "actions": [{"name": "loop", "to": [["s1", 1.0]]}]},
        {"name": "s2", "actions": [{"name": "loop", "to": [["s2", 1.0]]}]}
      ]
    })";
    Mdp m = loadModel(text);
    MarkovChain c = induceChain(m, diracFirstPolicy(m));
    Formula f = parseFormula("P>=1/2 [X a]", Fragment::SafePctl);
    CheckResult r = exactCheck(c, f);
    CHECK(r.prob[0][0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.prob[0][1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.prob[0][2] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r.holdsAtInitial(f, c));  // exact tie counts
}

TEST_CASE("product chain check on an extracted policy") {
    Mdp m = builtinExample1();
    Formula f = parseFormula(kNestedText, Fragment::Cpctl);
    EngineConfig cfg;
    VIResult vi = runVI(m, f, cfg);
    REQUIRE(vi.status == VIStatus::TargetMet);
    REQUIRE(vi.targetPoint);

    FiniteMemoryPolicy pi = extractPolicy(m, f, vi.targetPoint);
    ProductCheck pc = productChainCheck(m, pi, f);
    CHECK(pc.initialProb(1) >= 2.0 / 3.0 - 1e-9);
    // The product chain's value covers every promised counter.
    for (size_t j = 0; j < f.pfCount(); ++j)
        CHECK(pc.initialProb(static_cast<int>(j)) >= vi.targetPoint->nu[j] - 1e-9);
}

TEST_CASE("simulation brackets the exact value") {
    Mdp m = builtinExample1();
    Formula f = parseFormula(kNestedText, Fragment::Cpctl);
    EngineConfig cfg;
    VIResult vi = runVI(m, f, cfg);
    REQUIRE(vi.status == VIStatus::TargetMet);
    FiniteMemoryPolicy pi = extractPolicy(m, f, vi.targetPoint);

    SimResult sr = simulate(m, pi, f, 20000, 200, 42);
    CHECK(sr.runs == 20000);
    // Exact outer probability under this policy is 2/3.
    CHECK(sr.lo[1] <= 2.0 / 3.0);
    CHECK(sr.hi[1] >= 2.0 / 3.0);
    CHECK(sr.hi[1] - sr.lo[1] < 0.05);

    // Same seed, same result; different seed, (almost surely) different counts.
    SimResult again = simulate(m, pi, f, 20000, 200, 42);
    CHECK(again.successes == sr.successes);
    CHECK(again.unsettled == sr.unsettled);

    // A lock-in policy on an always-safe state settles every run as success.
    const char* text = R"({
      "atoms": ["a"],
      "initial": "s0",
      "states": [
        {"name": "s0", "actions": [{"name": "loop", "to": [["s0", 1.0]]}]}
      ]
    })";
    Mdp safe = loadModel(text);
    Formula g = parseFormula("P>=1 [G !a]", Fragment::Cpctl);
    VIResult svi = runVI(safe, g, cfg);
    REQUIRE(svi.status == VIStatus::TargetMet);
    FiniteMemoryPolicy spi = extractPolicy(safe, g, svi.targetPoint);
    SimResult ss = simulate(safe, spi, g, 5000, 50, 7);
    CHECK(ss.successes[0] == 5000);
    CHECK(ss.lo[0] > 0.99);
    CHECK(ss.hi[0] == 1.0);
}

TEST_CASE("reachability solve handles cyclic chains exactly") {
    // Random walk on 0..4 with reflecting mix; compare against the closed form
    // for the gambler's ruin with p = q = 1/2: hitting 4 from 2 is 1/2.
    const char* text = R"({
      "atoms": ["t"],
      "initial": "s2",
      "states": [
        {"name": "s0", "actions": [{"name": "stay", "to": [["s0", 1.0]]}]},
        {"name": "s1", "actions": [{"name": "walk", "to": [["s0", 0.5], ["s2", 0.5]]}]},
        {"name": "s2", "actions": [{"name": "walk", "to": [["s1", 0.5], ["s3", 0.5]]}]},
        {"name": "s3", "actions": [{"name": "walk", "to": [["s2", 0.5], ["s4", 0.5]]}]},
        {"name": "s4", "labels": ["t"], "actions": [{"name": "stay", "to": [["s4", 1.0]]}]}
      ]
    })";
    Mdp m = loadModel(text);
    MarkovChain c = induceChain(m, diracFirstPolicy(m));
    // P(G !t) from s2 = probability of ruin = 1/2.
    Formula f = parseFormula("P>=1/2 [G !t]", Fragment::Cpctl);
    CheckResult r = exactCheck(c, f);
    CHECK(r.prob[0][2] == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(r.prob[0][1] == doctest::Approx(0.75).epsilon(1e-10));
    CHECK(r.prob[0][3] == doctest::Approx(0.25).epsilon(1e-10));
}
