#ifndef CPCTL_ENGINE_HPP
#define CPCTL_ENGINE_HPP

#include <utility>
#include <vector>

#include "cpctl/formula.hpp"
#include "cpctl/frontier.hpp"
#include "cpctl/model.hpp"

namespace cpctl {

struct EngineConfig {
    double epsilon = 1e-3;          // frontier thinning radius
    int maxIters = 100000;
    double convergenceDelta = 1e-6; // per-state frontier movement threshold
    int wMix = 4;                   // mixing grid resolution
    int maxPointsPerState = 64;
    double slaterMargin = 0.01;
    int threads = 1;

    void validate() const;
};

enum class VIStatus { TargetMet, ConvergedTargetUnmet, IterCap };

struct VIResult {
    VIStatus status = VIStatus::IterCap;
    ValueVector frontiers;
    int iterations = 0;
    PointPtr targetPoint;  // witness point at s0 when TargetMet
};

// One application of the extended Bellman operator: per state, pure-action
// candidates over successor points from V, plus grid mixtures, evaluated
// bottom-up; union with V(s); pruned to maximal points.
ValueVector bellmanStep(const Mdp& m, const Formula& f, const ValueVector& v,
                        const EngineConfig& cfg);

// Value iteration from the initial value vector until the target point
// appears at s0, the frontiers stop moving, or the iteration cap hits.
VIResult runVI(const Mdp& m, const Formula& f, const EngineConfig& cfg);

// True when some point at s0 asserts the whole formula (root valuation 1).
PointPtr targetPoint(const Formula& f, const ValueVector& v, int s0);

struct MaxAchievableResult {
    VIResult vi;  // run to convergence, target guard ignored
    // Upper staircase of the s0 frontier: (inner counter level, best
    // objective counter among points at least that high on the inner axis),
    // sorted by inner level; nonincreasing in the first component.
    std::vector<std::pair<double, double>> curve;
};

// objective indexes a top-level path subformula; innerIndex < 0 picks the
// deepest counter the objective's condition depends on.
MaxAchievableResult maxAchievable(const Mdp& m, const Formula& f, int objective,
                                  const EngineConfig& cfg, int innerIndex = -1);

struct SlaterReport {
    std::vector<double> bumpedThresholds;
    bool satisfiable = false;  // target met with all thresholds increased
    int iterations = 0;
};

// Diagnostic rerun with thresholds raised by slaterMargin (clamped to 1):
// evidence for the generalized Slater assumption, not a proof.
SlaterReport slaterCheck(const Mdp& m, const Formula& f, const EngineConfig& cfg);

}  // namespace cpctl

#endif
