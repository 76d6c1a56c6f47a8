#ifndef CPCTL_POLICY_HPP
#define CPCTL_POLICY_HPP

#include <map>
#include <string>
#include <vector>

#include "cpctl/formula.hpp"
#include "cpctl/frontier.hpp"
#include "cpctl/model.hpp"

namespace cpctl {

// How a memory element chooses actions and updates.
enum class MemoryMode {
    Atomic,     // all obligations settled here: play anything, drop to zero
    SafeLock,   // inside an almost-sure G region: play the lock's safe action
    Recursive,  // play delta at the anchor state, hand successors their memory
};

struct FmMemory {
    MemoryMode mode = MemoryMode::Atomic;
    int anchor = -1;                // state this memory was extracted at
    std::vector<double> nu;         // counters promised by this memory
    std::vector<double> delta;      // Recursive: distribution over A(anchor)
    std::map<int, int> next;        // Recursive: successor state -> memory id
    std::map<int, int> safeActions; // SafeLock: member state -> action index
};

// Finite-memory policy as extracted from a witness DAG. The zero memory is
// absorbing: no outstanding obligations.
struct FiniteMemoryPolicy {
    std::vector<FmMemory> memories;
    int initialMemory = -1;
    int zeroMemory = -1;

    // Distribution over A(state); SafeLock falls back to the member table,
    // Atomic/zero play Dirac on action 0.
    std::vector<double> actionRule(const Mdp& m, int state, int mem) const;
    int memoryUpdate(int state, int mem, int nextState) const;
};

// Unfolds the witness DAG below one frontier point, sharing memories between
// points reached through different paths (dedup by pointer identity).
FiniteMemoryPolicy extractPolicy(const Mdp& m, const Formula& f, const PointPtr& point);

// Valued policy: the reachable (state, memory) product annotated with the
// claimed valuations and counters -- the object the certifier consumes.
struct ValuedPolicy {
    struct Node {
        int state = -1;
        int memory = -1;
        std::vector<uint8_t> mu;
        std::vector<double> nu;
        std::vector<double> delta;     // distribution over A(state)
        std::map<int, int> succ;       // successor state -> node id
    };
    std::vector<Node> nodes;
    int initial = -1;
};

ValuedPolicy valuedFromPolicy(const Mdp& m, const Formula& f, const FiniteMemoryPolicy& pi);

struct Violation {
    std::string clause;  // which compatibility clause failed
    int node = -1;       // valued-policy node
    int subIndex = -1;   // state or path subformula index
    double slack = 0.0;  // amount by which the inequality fails
};

struct CompatReport {
    std::vector<Violation> violations;
    int nodesChecked = 0;
    bool ok() const { return violations.empty(); }
};

// State compatibility: asserted valuations are supported by labels, children,
// and counters at every node.
CompatReport checkStateCompatibility(const Mdp& m, const Formula& f, const ValuedPolicy& vp);

// Path compatibility: every counter is bounded by what the path operator
// allows given the successors' counters and local valuations.
CompatReport checkPathCompatibility(const Mdp& m, const Formula& f, const ValuedPolicy& vp);

// Single-node state check against a label set (no successors needed); used to
// validate standalone points.
CompatReport checkStatePoint(const Formula& f, const std::set<std::string>& labels,
                             const std::vector<uint8_t>& mu, const std::vector<double>& nu);

struct Certificate {
    bool valid = false;
    CompatReport state;
    CompatReport path;
};

Certificate certifyCoherence(const Mdp& m, const Formula& f, const ValuedPolicy& vp);
std::string certificateJson(const Mdp& m, const Formula& f, const Certificate& c);

std::string savePolicy(const Mdp& m, const FiniteMemoryPolicy& pi);
FiniteMemoryPolicy loadPolicy(const Mdp& m, const std::string& bytes);
std::string saveValuedPolicy(const Mdp& m, const ValuedPolicy& vp);
ValuedPolicy loadValuedPolicy(const Mdp& m, const std::string& bytes);

// History-based view of a valued policy: replays the visited states through
// the memory structure and returns the action distribution after a history.
class ProjectedPolicy {
public:
    ProjectedPolicy(const Mdp& m, ValuedPolicy vp);
    // Empty distribution when the history leaves the policy's support.
    std::vector<double> operator()(const History& h) const;

private:
    const Mdp* m_;
    ValuedPolicy vp_;
};

inline ProjectedPolicy projectPolicy(const Mdp& m, const ValuedPolicy& vp) {
    return ProjectedPolicy(m, vp);
}

}  // namespace cpctl

#endif
