#ifndef CPCTL_VERIFY_HPP
#define CPCTL_VERIFY_HPP

#include <cstdint>
#include <vector>

#include "cpctl/formula.hpp"
#include "cpctl/model.hpp"
#include "cpctl/policy.hpp"

namespace cpctl {

// Exact model checking on a Markov chain: one satisfaction bit per state
// subformula and one probability per path subformula, per state.
struct CheckResult {
    std::vector<std::vector<uint8_t>> sat;  // [sfIndex][state]
    std::vector<std::vector<double>> prob;  // [pathIndex][state]

    bool holdsAtInitial(const Formula& f, const MarkovChain& c) const {
        return sat[static_cast<size_t>(f.node(f.root).sfIndex)][static_cast<size_t>(c.initial)] != 0;
    }
};

// Bottom-up exact checker. Reachability systems are solved per SCC with dense
// Gaussian elimination (partial pivoting); the global residual is verified to
// 1e-10. Handles the evaluation-only Or/Until nodes so FD output is checkable.
CheckResult exactCheck(const MarkovChain& c, const Formula& f);

// Whether the two-level chain family satisfies
//   P>=1 [ c W P>=1/2 [ c W (c & a) ] ]
// at the given parameters; reference curve for the threshold grid.
bool checkThm1Chain(double alpha, double eps);

// max_pi P_pi(G safe) per state: value iteration from above with the
// almost-sure region pinned to 1, converged to 1e-9.
std::vector<double> maxSafetyVI(const Mdp& m, const Formula& safe);

// Greedy memoryless policy induced by the safety values: in each state pick
// the action maximizing the expected successor value.
MemorylessPolicy greedySafetyPolicy(const Mdp& m, const Formula& safe,
                                    const std::vector<double>& value);

struct ProductCheck {
    MarkovChain chain;                        // (state, memory) product
    std::vector<std::pair<int, int>> origin;  // product index -> (state, memory)
    CheckResult result;
    int initial = 0;

    // Exact probability of path subformula j from the product initial state.
    double initialProb(int j) const {
        return result.prob[static_cast<size_t>(j)][static_cast<size_t>(initial)];
    }
};

// Builds the Markov chain induced by a finite-memory policy and checks the
// formula on it exactly. Throws when the product exceeds 1e7 transitions.
ProductCheck productChainCheck(const Mdp& m, const FiniteMemoryPolicy& pi, const Formula& f);

struct SimResult {
    // Per path subformula: settled counts and Wilson 99% bounds that are
    // guaranteed to bracket the true satisfaction probability.
    std::vector<long> successes;   // certainly satisfied runs
    std::vector<long> failures;    // certainly violated runs
    std::vector<long> unsettled;   // horizon hit with the outcome open
    std::vector<double> lo;        // lower bound from successes alone
    std::vector<double> hi;        // upper bound counting unsettled as successes
    long runs = 0;
};

// Monte-Carlo estimation of the path probabilities under the policy, from the
// initial state. Deterministic for a fixed seed (counter-based generator).
SimResult simulate(const Mdp& m, const FiniteMemoryPolicy& pi, const Formula& f,
                   long runs, int horizon, uint64_t seed = 42);

}  // namespace cpctl

#endif
