#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "cpctl/formula.hpp"
#include "test_util.hpp"

using namespace cpctl;

TEST_CASE("parsing basics and round-trip") {
    Formula f = parseFormula("P>=2/3 [G P>=7/12 [G !a]]", Fragment::Cpctl);
    CHECK(f.pfCount() == 2);
    CHECK(f.sfCount() >= 3);
    CHECK(f.thresholds()[0] == doctest::Approx(7.0 / 12.0).epsilon(1e-15));
    CHECK(f.thresholds()[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    // Inner path subformulas come first.
    CHECK(f.node(f.pathSubs[0]).p < f.node(f.pathSubs[1]).p);

    Formula again = parseFormula(printFormula(f), Fragment::Cpctl);
    CHECK(structurallyEqual(f, again));
}

TEST_CASE("G is sugar for a continuing weak-until against false") {
    Formula g = parseFormula("P>=1 [G a]", Fragment::Cpctl);
    const FormulaNode& path = g.node(g.node(g.root).path);
    CHECK(path.kind == NodeKind::ContinuingWeakUntil);
    CHECK(g.node(path.right).kind == NodeKind::False);
}

TEST_CASE("continuing restriction on weak-until goals") {
    // Goal repeats the condition as a conjunct: accepted, conjunct stripped.
    Formula ok = parseFormula("P>=1 [a W (a & b)]", Fragment::Cpctl);
    const FormulaNode& path = ok.node(ok.node(ok.root).path);
    CHECK(path.kind == NodeKind::ContinuingWeakUntil);
    CHECK(ok.node(path.left).kind == NodeKind::Atom);
    CHECK(ok.node(path.right).kind == NodeKind::Atom);
    CHECK(ok.node(path.right).atom == "b");

    CHECK_THROWS_AS(parseFormula("P>=1 [a W b]", Fragment::Cpctl), ParseError);
    CHECK_NOTHROW(parseFormula("P>=1 [a W b]", Fragment::SafePctl));

    // The whole goal equals the condition: the remainder is empty, stand in true.
    Formula trivial = parseFormula("P>=1 [a W a]", Fragment::Cpctl);
    const FormulaNode& tp = trivial.node(trivial.node(trivial.root).path);
    CHECK(trivial.node(tp.right).kind == NodeKind::True);
}

TEST_CASE("fragment restrictions") {
    CHECK_THROWS_AS(parseFormula("P>=1 [X a]", Fragment::Cpctl), ParseError);
    CHECK_NOTHROW(parseFormula("P>=1 [X a]", Fragment::SafePctl));
    CHECK_THROWS_AS(parseFormula("P>=1.5 [G a]", Fragment::Cpctl), ParseError);
    CHECK_THROWS_AS(parseFormula("", Fragment::Cpctl), ParseError);
    CHECK_THROWS_AS(parseFormula("P>=1 [G a", Fragment::Cpctl), ParseError);
}

TEST_CASE("G and X can double as atom names") {
    // In the gridworld formula the goal cell is labeled G; the parser only
    // treats G/X as operators when an operand follows.
    Formula f = parseFormula("P>=0.8 [G P>=0.6 [!d W (!d & G)]]", Fragment::Cpctl);
    const FormulaNode& inner = f.node(f.pathSubs[0]);
    const FormulaNode& ip = f.node(inner.path);
    CHECK(f.node(ip.right).kind == NodeKind::Atom);
    CHECK(f.node(ip.right).atom == "G");
}

TEST_CASE("literal projection") {
    Formula f = parseFormula("P>=0.7 [(a & !b) W ((a & !b) & c)]", Fragment::Cpctl);
    CHECK(printFormula(literalProjection(f)) == "a & !b");

    Formula vac = parseFormula("P>=0 [G a]", Fragment::Cpctl);
    CHECK(literalProjection(vac).node(literalProjection(vac).root).kind == NodeKind::True);

    Formula conj = parseFormula("a & P>=1/2 [G (b & c)]", Fragment::Cpctl);
    CHECK(printFormula(literalProjection(conj)) == "a & (b & c)");
}

TEST_CASE("slater transform replaces thresholds and keeps shape") {
    Formula f = parseFormula("P>=2/3 [G P>=7/12 [G !a]]", Fragment::Cpctl);
    Formula t = slaterTransform(f, {0.25, 0.75});
    CHECK(t.thresholds()[0] == 0.25);
    CHECK(t.thresholds()[1] == 0.75);
    CHECK(t.sfCount() == f.sfCount());
    CHECK(t.pfCount() == f.pfCount());
    CHECK_THROWS(slaterTransform(f, {0.5}));
    CHECK_THROWS(slaterTransform(f, {1.5, 0.5}));
}

TEST_CASE("depth measures") {
    Formula nested = parseFormula("P>=2/3 [G P>=7/12 [G !a]]", Fragment::Cpctl);
    Depths dn = depths(nested);
    CHECK(dn.nesting[static_cast<size_t>(nested.root)] == 2);
    CHECK(dn.total[static_cast<size_t>(nested.root)] == 2);

    // A conjunction of two flat operators is flat by nesting depth but not by
    // total depth.
    Formula flat = parseFormula("P>=1/2 [G a] & P>=1/2 [G b]", Fragment::Cpctl);
    Depths df = depths(flat);
    CHECK(df.nesting[static_cast<size_t>(flat.root)] == 1);
    CHECK(df.total[static_cast<size_t>(flat.root)] == 2);

    Formula boolOnly = parseFormula("a & !b", Fragment::Cpctl);
    Depths db = depths(boolOnly);
    CHECK(db.nesting[static_cast<size_t>(boolOnly.root)] == 0);
    CHECK(db.total[static_cast<size_t>(boolOnly.root)] == 0);
}

TEST_CASE("canonical valuation matches boolean evaluation and is monotone") {
    testutil::Rng rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        Formula f = testutil::randomRootedCpctl(rng);
        std::set<std::string> labels;
        for (const auto& atom : testutil::kAtoms)
            if (rng.coin()) labels.insert(atom);

        std::vector<double> lo(f.pfCount()), hi(f.pfCount());
        for (size_t j = 0; j < f.pfCount(); ++j) {
            lo[j] = rng.uniform();
            hi[j] = lo[j] + (1.0 - lo[j]) * rng.uniform();
        }
        auto muLo = canonicalValuation(f, labels, lo);
        auto muHi = canonicalValuation(f, labels, hi);
        for (size_t i = 0; i < muLo.size(); ++i) CHECK(muLo[i] <= muHi[i]);

        // Thresholds met exactly count as satisfied.
        auto muAt = canonicalValuation(f, labels, f.thresholds());
        for (int id : f.stateSubs) {
            const FormulaNode& n = f.node(id);
            if (n.kind == NodeKind::ProbGeq) CHECK(muAt[static_cast<size_t>(n.sfIndex)] == 1);
        }
    }

    Formula boolOnly = parseFormula("a & !b", Fragment::Cpctl);
    auto mu = canonicalValuation(boolOnly, {"a"}, {});
    CHECK(mu[static_cast<size_t>(boolOnly.node(boolOnly.root).sfIndex)] == 1);
    CHECK(evalBoolean(boolOnly, {"a"}));
    CHECK(!evalBoolean(boolOnly, {"a", "b"}));
}

TEST_CASE("finite-decisiveness rewrite produces until-against-globally shape") {
    Formula f = parseFormula("P>=1/2 [a W (a & b)]", Fragment::Cpctl);
    Formula fd = fdTransform(f);
    const FormulaNode& path = fd.node(fd.node(fd.root).path);
    CHECK(path.kind == NodeKind::Until);
    CHECK(fd.node(path.right).kind == NodeKind::Or);
}

TEST_CASE("random formulas round-trip through the printer") {
    testutil::Rng rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        Formula f = testutil::randomRootedCpctl(rng);
        Formula again = parseFormula(printFormula(f), Fragment::Cpctl);
        CHECK(structurallyEqual(f, again));
    }
}
