#ifndef CPCTL_MODEL_HPP
#define CPCTL_MODEL_HPP

#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cpctl {

inline constexpr double kDistributionTolerance = 1e-9;

struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Mdp {
    struct Action {
        std::string name;
        std::vector<std::pair<int, double>> to;  // (successor, probability)
    };
    struct State {
        std::string name;
        std::vector<std::string> labels;  // kept sorted
        double reward = 0.0;              // parsed and stored, not optimized
        std::vector<Action> actions;
    };

    std::vector<State> states;
    std::vector<std::string> atoms;
    int initial = 0;

    int stateIndex(const std::string& name) const;  // -1 if absent
    bool hasLabel(int s, const std::string& atom) const;
    std::set<std::string> labelSet(int s) const;
    size_t size() const { return states.size(); }

    // Throws ModelError naming the offending state/action.
    void validate() const;
};

struct MemorylessPolicy {
    std::vector<std::vector<double>> perState;  // distribution over A(s)

    void validate(const Mdp& m) const;
};

struct MarkovChain {
    std::vector<std::string> names;
    std::vector<std::vector<std::string>> labels;  // kept sorted
    std::vector<std::vector<std::pair<int, double>>> rows;
    int initial = 0;

    bool hasLabel(int s, const std::string& atom) const;
    std::set<std::string> labelSet(int s) const;
    size_t size() const { return rows.size(); }
    void validate() const;
};

struct History {
    std::vector<int> states;
};

// True when every consecutive pair is connected by a positive-probability
// action of the MDP.
bool validHistory(const Mdp& m, const History& h);

Mdp loadModel(const std::string& bytes);
std::string saveModel(const Mdp& m);
Mdp loadModelFile(const std::string& path);
void saveModelFile(const Mdp& m, const std::string& path);

MarkovChain induceChain(const Mdp& m, const MemorylessPolicy& pi);

// Dirac on the lowest-indexed action of every state; handy for models that
// are already chains.
MemorylessPolicy diracFirstPolicy(const Mdp& m);

// Per-tier total slip mass. The defaults make the polished strip next to the
// left border genuinely treacherous (its cells fall below the 0.6 inner
// threshold of the benchmark formula) so the safest route and the
// formula-optimal route disagree, while keeping the tier ordering
// low < medium = constant < high. All four are CLI-overridable.
struct GridworldSlips {
    double high = 0.9;
    double medium = 0.25;
    double low = 0.05;
    double constant = 0.25;
};

Mdp gridworldModel(int variant, const GridworldSlips& slips = {});

Mdp builtinExample1();
Mdp builtinThm1Chain(double alpha, double eps);

// Resolves "example1", "gridworld1", "gridworld2"; throws on unknown names
// ("thm1" needs parameters, use builtinThm1Chain).
Mdp builtinModel(const std::string& name);

}  // namespace cpctl

#endif
