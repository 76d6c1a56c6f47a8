#ifndef CPCTL_REACHABILITY_HPP
#define CPCTL_REACHABILITY_HPP

#include <vector>

#include "cpctl/formula.hpp"
#include "cpctl/frontier.hpp"
#include "cpctl/model.hpp"

namespace cpctl {

struct SafeSet {
    std::vector<uint8_t> member;   // one flag per state
    std::vector<int> safeAction;   // lowest-indexed closed action; -1 outside
};

// Greatest U subseteq [[b]] such that every member has an action whose whole
// support stays in U; b must be probability-free.
SafeSet almostSureGlobally(const Mdp& m, const Formula& b);

// For each path subformula j, the set of path indices whose counters must be
// 1 alongside nu_j = 1 for a lock-in point to be coherent: the positive-
// threshold probability operators on the condition side, transitively.
std::vector<std::vector<int>> requiredFlags(const Formula& f);

// I_M: per state, the maximal points whose counters are 0/1 indicators of
// jointly lockable almost-sure G(alit) sets, with canonical valuations.
ValueVector initialValueVector(const Mdp& m, const Formula& f);

}  // namespace cpctl

#endif
