#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "cpctl/frontier.hpp"
#include "test_util.hpp"

using namespace cpctl;

namespace {

PointPtr mk(std::vector<uint8_t> mu, std::vector<double> nu) {
    auto p = std::make_shared<FrontierPoint>();
    p->mu = std::move(mu);
    p->nu = std::move(nu);
    return p;
}

bool sameSet(const std::vector<PointPtr>& a, const std::vector<PointPtr>& b) {
    if (a.size() != b.size()) return false;
    for (const PointPtr& p : a) {
        bool found = false;
        for (const PointPtr& q : b)
            found = found || (p->mu == q->mu && p->nu == q->nu);
        if (!found) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("dominance is componentwise on both vectors") {
    PointPtr p = mk({1, 0}, {0.5, 0.5});
    PointPtr q = mk({1, 0}, {0.5, 0.4});
    PointPtr r = mk({0, 1}, {0.6, 0.6});
    CHECK(dominates(*p, *q));
    CHECK(!dominates(*q, *p));
    CHECK(dominates(*p, *p));
    // Incomparable on mu even though r wins on nu.
    CHECK(!dominates(*r, *p));
    CHECK(!dominates(*p, *r));
    PointPtr bad = mk({1}, {0.5});
    CHECK_THROWS(dominates(*p, *bad));
}

TEST_CASE("pruneMaximal removes dominated points and keeps incomparable ones") {
    PruneConfig cfg;
    cfg.epsilon = 0.0;
    std::vector<PointPtr> in = {
        mk({1}, {0.9, 0.1}),
        mk({1}, {0.1, 0.9}),
        mk({1}, {0.5, 0.05}),  // dominated by the first
        mk({0}, {0.95, 0.95}), // incomparable: worse mu
    };
    auto out = pruneMaximal(in, cfg);
    REQUIRE(out.size() == 3);
    for (const PointPtr& p : out) CHECK(p->nu != std::vector<double>{0.5, 0.05});
}

TEST_CASE("pruneMaximal output is a function of the input set") {
    testutil::Rng rng(11);
    PruneConfig cfg;
    cfg.epsilon = 0.05;
    cfg.maxPointsPerState = 6;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<PointPtr> in;
        int n = 4 + rng.range(12);
        for (int i = 0; i < n; ++i)
            in.push_back(mk({static_cast<uint8_t>(rng.coin())}, {rng.uniform(), rng.uniform()}));
        auto base = pruneMaximal(in, cfg);

        std::vector<PointPtr> shuffled = in;
        for (size_t i = shuffled.size(); i > 1; --i)
            std::swap(shuffled[i - 1], shuffled[static_cast<size_t>(rng.range(static_cast<int>(i)))]);
        auto perm = pruneMaximal(shuffled, cfg);
        CHECK(sameSet(base, perm));

        // Idempotence: pruning a pruned set is the identity.
        auto again = pruneMaximal(base, cfg);
        CHECK(sameSet(base, again));
    }
}

TEST_CASE("epsilon thinning drops near-duplicates covered from below") {
    PruneConfig cfg;
    cfg.epsilon = 0.01;
    std::vector<PointPtr> in = {
        mk({1}, {0.800, 0.300}),
        mk({1}, {0.804, 0.296}),  // within epsilon of a kept point on nu0, below on nu1
        mk({1}, {0.300, 0.800}),
    };
    auto out = pruneMaximal(in, cfg);
    CHECK(out.size() == 2);

    cfg.epsilon = 0.0;
    CHECK(pruneMaximal(in, cfg).size() == 3);
}

TEST_CASE("cap keeps every coordinate maximizer") {
    PruneConfig cfg;
    cfg.epsilon = 0.0;
    cfg.maxPointsPerState = 3;
    std::vector<PointPtr> in;
    // A staircase of 20 incomparable points.
    for (int i = 0; i < 20; ++i) {
        double t = static_cast<double>(i) / 19.0;
        in.push_back(mk({1}, {t, 1.0 - t}));
    }
    auto out = pruneMaximal(in, cfg);
    REQUIRE(static_cast<int>(out.size()) == 3);
    double best0 = 0.0, best1 = 0.0;
    for (const PointPtr& p : out) {
        best0 = std::max(best0, p->nu[0]);
        best1 = std::max(best1, p->nu[1]);
    }
    CHECK(best0 == 1.0);
    CHECK(best1 == 1.0);
}

TEST_CASE("ties prefer earlier input points") {
    PruneConfig cfg;
    cfg.epsilon = 0.0;
    PointPtr established = mk({1}, {0.5, 0.5});
    PointPtr newcomer = mk({1}, {0.5, 0.5});
    auto out = pruneMaximal({established, newcomer}, cfg);
    REQUIRE(out.size() == 1);
    CHECK(out[0].get() == established.get());
}

TEST_CASE("mixCandidates recomputes u exactly from the merged assignment") {
    Mdp m = builtinExample1();
    int s0 = m.stateIndex("s0");
    int s1 = m.stateIndex("s1");
    int s6 = m.stateIndex("s6");

    PointPtr p1 = mk({1}, {0.75, 0.5});
    PointPtr p6 = mk({1}, {2.0 / 3.0, 2.0 / 3.0});
    Candidate c1{{1.0, 0.0}, {{s1, p1}}, {0.75, 0.5}};
    Candidate c2{{0.0, 1.0}, {{s6, p6}}, {2.0 / 3.0, 2.0 / 3.0}};

    auto mixes = mixCandidates(m, s0, {c1, c2}, 4);
    REQUIRE(mixes.size() == 3);  // interior grid weights 1/4, 2/4, 3/4
    for (const Candidate& c : mixes) {
        double w = c.delta[0];
        CHECK(c.delta[1] == doctest::Approx(1.0 - w).epsilon(1e-15));
        // u is the delta-weighted mix of the successor counters, computed
        // from the assignment rather than interpolated.
        CHECK(c.u[0] == doctest::Approx(w * 0.75 + (1 - w) * 2.0 / 3.0).epsilon(1e-12));
        CHECK(c.u[1] == doctest::Approx(w * 0.5 + (1 - w) * 2.0 / 3.0).epsilon(1e-12));
        CHECK(c.assign.size() == 2);
    }
    // The w = 1/2 mixture reproduces the known mixed value at s0.
    bool found = false;
    for (const Candidate& c : mixes)
        found = found || (std::abs(c.u[0] - 17.0 / 24.0) < 1e-12 &&
                          std::abs(c.u[1] - 7.0 / 12.0) < 1e-12);
    CHECK(found);

    CHECK(mixCandidates(m, s0, {c1}, 4).empty());
    CHECK(mixCandidates(m, s0, {c1, c1}, 4).empty());
    CHECK(mixCandidates(m, s0, {c1, c2}, 0).empty());
}
