#include "cpctl/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace cpctl {

using nlohmann::json;

int Mdp::stateIndex(const std::string& name) const {
    for (size_t i = 0; i < states.size(); ++i)
        if (states[i].name == name) return static_cast<int>(i);
    return -1;
}

bool Mdp::hasLabel(int s, const std::string& atom) const {
    const auto& l = states[static_cast<size_t>(s)].labels;
    return std::binary_search(l.begin(), l.end(), atom);
}

std::set<std::string> Mdp::labelSet(int s) const {
    const auto& l = states[static_cast<size_t>(s)].labels;
    return {l.begin(), l.end()};
}

void Mdp::validate() const {
    if (states.empty()) throw ModelError("model has no states");
    if (initial < 0 || initial >= static_cast<int>(states.size()))
        throw ModelError("initial state out of range");
    for (const auto& st : states) {
        if (st.actions.empty()) throw ModelError("state '" + st.name + "' has no actions");
        for (const auto& lab : st.labels)
            if (std::find(atoms.begin(), atoms.end(), lab) == atoms.end())
                throw ModelError("state '" + st.name + "' uses unknown atom '" + lab + "'");
        for (const auto& act : st.actions) {
            double sum = 0.0;
            for (auto [succ, p] : act.to) {
                if (succ < 0 || succ >= static_cast<int>(states.size()))
                    throw ModelError("state '" + st.name + "' action '" + act.name +
                                     "' targets an unknown state");
                if (p < 0.0 || p > 1.0 + kDistributionTolerance)
                    throw ModelError("state '" + st.name + "' action '" + act.name +
                                     "' has a probability outside [0, 1]");
                sum += p;
            }
            if (std::abs(sum - 1.0) > kDistributionTolerance)
                throw ModelError("state '" + st.name + "' action '" + act.name +
                                 "' distribution sums to " + std::to_string(sum));
        }
    }
}

void MemorylessPolicy::validate(const Mdp& m) const {
    if (perState.size() != m.states.size())
        throw ModelError("policy has wrong number of states");
    for (size_t s = 0; s < perState.size(); ++s) {
        if (perState[s].size() != m.states[s].actions.size())
            throw ModelError("policy at state '" + m.states[s].name +
                             "' has wrong action dimension");
        double sum = 0.0;
        for (double w : perState[s]) {
            if (w < 0.0) throw ModelError("negative policy weight");
            sum += w;
        }
        if (std::abs(sum - 1.0) > kDistributionTolerance)
            throw ModelError("policy at state '" + m.states[s].name + "' sums to " +
                             std::to_string(sum));
    }
}

bool MarkovChain::hasLabel(int s, const std::string& atom) const {
    const auto& l = labels[static_cast<size_t>(s)];
    return std::binary_search(l.begin(), l.end(), atom);
}

std::set<std::string> MarkovChain::labelSet(int s) const {
    const auto& l = labels[static_cast<size_t>(s)];
    return {l.begin(), l.end()};
}

void MarkovChain::validate() const {
    for (size_t s = 0; s < rows.size(); ++s) {
        double sum = 0.0;
        for (auto [succ, p] : rows[s]) {
            if (succ < 0 || succ >= static_cast<int>(rows.size()))
                throw ModelError("chain row targets an unknown state");
            sum += p;
        }
        if (std::abs(sum - 1.0) > kDistributionTolerance)
            throw ModelError("chain row " + std::to_string(s) + " sums to " + std::to_string(sum));
    }
}

bool validHistory(const Mdp& m, const History& h) {
    if (h.states.empty()) return false;
    for (int s : h.states)
        if (s < 0 || s >= static_cast<int>(m.states.size())) return false;
    for (size_t i = 0; i + 1 < h.states.size(); ++i) {
        bool connected = false;
        for (const auto& act : m.states[static_cast<size_t>(h.states[i])].actions) {
            for (auto [succ, p] : act.to)
                if (succ == h.states[i + 1] && p > 0.0) connected = true;
        }
        if (!connected) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// JSON model files.

namespace {

double parseProbability(const json& v, const std::string& where) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        auto slash = s.find('/');
        if (slash == std::string::npos)
            throw ModelError("probability string without '/' at " + where);
        try {
            double num = std::stod(s.substr(0, slash));
            double den = std::stod(s.substr(slash + 1));
            if (den == 0) throw ModelError("zero denominator at " + where);
            return num / den;
        } catch (const std::invalid_argument&) {
            throw ModelError("malformed fraction at " + where);
        }
    }
    throw ModelError("probability must be a number or \"a/b\" string at " + where);
}

}  // namespace

Mdp loadModel(const std::string& bytes) {
    json j;
    try {
        j = json::parse(bytes);
    } catch (const json::parse_error& e) {
        throw ModelError(std::string("model file is not valid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("states") || !j.contains("atoms") || !j.contains("initial"))
        throw ModelError("model file must contain 'atoms', 'initial' and 'states'");

    Mdp m;
    for (const auto& a : j.at("atoms")) m.atoms.push_back(a.get<std::string>());

    std::map<std::string, int> index;
    for (const auto& js : j.at("states")) {
        Mdp::State st;
        st.name = js.at("name").get<std::string>();
        if (index.count(st.name)) throw ModelError("duplicate state name '" + st.name + "'");
        index[st.name] = static_cast<int>(m.states.size());
        m.states.push_back(std::move(st));
    }

    size_t i = 0;
    for (const auto& js : j.at("states")) {
        Mdp::State& st = m.states[i++];
        if (js.contains("labels"))
            for (const auto& l : js.at("labels")) st.labels.push_back(l.get<std::string>());
        std::sort(st.labels.begin(), st.labels.end());
        if (js.contains("reward")) st.reward = js.at("reward").get<double>();
        if (!js.contains("actions")) throw ModelError("state '" + st.name + "' lacks 'actions'");
        for (const auto& ja : js.at("actions")) {
            Mdp::Action act;
            act.name = ja.at("name").get<std::string>();
            for (const auto& edge : ja.at("to")) {
                const std::string target = edge.at(0).get<std::string>();
                auto it = index.find(target);
                if (it == index.end())
                    throw ModelError("state '" + st.name + "' action '" + act.name +
                                     "' targets unknown state '" + target + "'");
                act.to.emplace_back(it->second,
                                    parseProbability(edge.at(1), st.name + "/" + act.name));
            }
            st.actions.push_back(std::move(act));
        }
    }

    const std::string init = j.at("initial").get<std::string>();
    auto it = index.find(init);
    if (it == index.end()) throw ModelError("initial state '" + init + "' not found");
    m.initial = it->second;
    m.validate();
    return m;
}

std::string saveModel(const Mdp& m) {
    json j;
    j["atoms"] = m.atoms;
    j["initial"] = m.states[static_cast<size_t>(m.initial)].name;
    json states = json::array();
    for (const auto& st : m.states) {
        json js;
        js["name"] = st.name;
        js["labels"] = st.labels;
        js["reward"] = st.reward;
        json actions = json::array();
        for (const auto& act : st.actions) {
            json ja;
            ja["name"] = act.name;
            json to = json::array();
            for (auto [succ, p] : act.to)
                to.push_back(json::array({m.states[static_cast<size_t>(succ)].name, p}));
            ja["to"] = to;
            actions.push_back(ja);
        }
        js["actions"] = actions;
        states.push_back(js);
    }
    j["states"] = states;
    return j.dump(2) + "\n";
}

Mdp loadModelFile(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ModelError("cannot open model file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return loadModel(buf.str());
}

void saveModelFile(const Mdp& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ModelError("cannot write model file '" + path + "'");
    out << saveModel(m);
}

// ---------------------------------------------------------------------------
// Induced chains.

MarkovChain induceChain(const Mdp& m, const MemorylessPolicy& pi) {
    pi.validate(m);
    MarkovChain c;
    c.initial = m.initial;
    c.rows.resize(m.states.size());
    for (size_t s = 0; s < m.states.size(); ++s) {
        c.names.push_back(m.states[s].name);
        c.labels.push_back(m.states[s].labels);
        std::map<int, double> row;
        for (size_t a = 0; a < m.states[s].actions.size(); ++a) {
            double w = pi.perState[s][a];
            if (w == 0.0) continue;
            for (auto [succ, p] : m.states[s].actions[a].to) row[succ] += w * p;
        }
        for (auto [succ, p] : row)
            if (p > 0.0) c.rows[s].emplace_back(succ, p);
    }
    c.validate();
    return c;
}

MemorylessPolicy diracFirstPolicy(const Mdp& m) {
    MemorylessPolicy pi;
    pi.perState.resize(m.states.size());
    for (size_t s = 0; s < m.states.size(); ++s) {
        pi.perState[s].assign(m.states[s].actions.size(), 0.0);
        pi.perState[s][0] = 1.0;
    }
    return pi;
}

// ---------------------------------------------------------------------------
// Gridworld generators.

namespace {

struct GridGeometry {
    int width = 0, height = 0;
    int goalRow = 0, goalCol = 0;
    int startRow = 0, startCol = 0;
    std::vector<std::pair<int, int>> walls;
    // slip tier per column for interior columns; border columns are unsafe
    std::vector<double> columnSlip;
};

bool isWall(const GridGeometry& g, int r, int c) {
    return std::find(g.walls.begin(), g.walls.end(), std::make_pair(r, c)) != g.walls.end();
}

Mdp buildGrid(const GridGeometry& g) {
    Mdp m;
    m.atoms = {"G", "d"};
    std::map<std::pair<int, int>, int> index;
    for (int r = 0; r < g.height; ++r) {
        for (int c = 0; c < g.width; ++c) {
            if (isWall(g, r, c)) continue;
            Mdp::State st;
            st.name = "r" + std::to_string(r) + "c" + std::to_string(c);
            if (c == 0 || c == g.width - 1) st.labels = {"d"};
            if (r == g.goalRow && c == g.goalCol) st.labels = {"G"};
            index[{r, c}] = static_cast<int>(m.states.size());
            m.states.push_back(std::move(st));
        }
    }

    struct Dir {
        const char* name;
        int dr, dc;
    };
    const Dir dirs[4] = {{"N", -1, 0}, {"S", 1, 0}, {"E", 0, 1}, {"W", 0, -1}};

    for (auto& [cell, id] : index) {
        auto [r, c] = cell;
        Mdp::State& st = m.states[static_cast<size_t>(id)];
        bool absorbing = (c == 0 || c == g.width - 1) || (r == g.goalRow && c == g.goalCol);
        if (absorbing) {
            st.actions.push_back({"stay", {{id, 1.0}}});
            continue;
        }
        double slip = g.columnSlip[static_cast<size_t>(c)];
        std::vector<int> avail;  // ids of reachable neighbours
        for (const Dir& d : dirs) {
            int nr = r + d.dr, nc = c + d.dc;
            auto it = index.find({nr, nc});
            if (it != index.end()) avail.push_back(it->second);
        }
        for (const Dir& d : dirs) {
            int nr = r + d.dr, nc = c + d.dc;
            auto it = index.find({nr, nc});
            // Moving into a wall or off the grid bounces back to the cell.
            int intended = (it != index.end()) ? it->second : id;
            std::map<int, double> dist;
            dist[intended] += 1.0 - slip;
            for (int n : avail) dist[n] += slip / static_cast<double>(avail.size());
            Mdp::Action act;
            act.name = d.name;
            for (auto [succ, p] : dist)
                if (p > 0.0) act.to.emplace_back(succ, p);
            st.actions.push_back(std::move(act));
        }
    }

    m.initial = index.at({g.startRow, g.startCol});
    m.validate();
    return m;
}

}  // namespace

Mdp gridworldModel(int variant, const GridworldSlips& slips) {
    GridGeometry g;
    if (variant == 1) {
        g.width = 7;
        g.height = 7;
        g.goalRow = 0;
        g.goalCol = 3;
        g.startRow = 6;
        g.startCol = 3;
        for (int r = 1; r <= 5; ++r) g.walls.emplace_back(r, 3);
        g.columnSlip = {0.0,        slips.high,     slips.low,     slips.constant,
                        slips.constant, slips.constant, 0.0};
    } else if (variant == 2) {
        g.width = 9;
        g.height = 10;
        g.goalRow = 0;
        g.goalCol = 4;
        g.startRow = 9;
        g.startCol = 4;
        for (int r : {1, 2, 3, 6, 7, 8}) g.walls.emplace_back(r, 4);
        g.columnSlip = {0.0,        slips.high,     slips.medium,   slips.low,
                        slips.constant, slips.constant, slips.constant, slips.constant,
                        0.0};
    } else {
        throw ModelError("unknown gridworld variant " + std::to_string(variant));
    }
    return buildGrid(g);
}

// ---------------------------------------------------------------------------
// Built-in paper models.

Mdp builtinExample1() {
    Mdp m;
    m.atoms = {"a"};
    auto add = [&](const std::string& name, bool labelled) {
        Mdp::State st;
        st.name = name;
        if (labelled) st.labels = {"a"};
        m.states.push_back(std::move(st));
        return static_cast<int>(m.states.size() - 1);
    };
    // The a-labelled sinks are the low branch of a3 and the low branch of a5;
    // this is the assignment under which every published value of the example
    // (3/4, 1/2, 2/3 and the per-state annotations) checks out.
    int s0 = add("s0", false);
    int s1 = add("s1", false);
    int s2 = add("s2", false);
    int s3 = add("s3", false);
    int s4 = add("s4", true);
    int s5 = add("s5", false);
    int s6 = add("s6", false);
    int s7 = add("s7", false);
    int s8 = add("s8", true);

    auto& S = m.states;
    S[s0].actions.push_back({"a1", {{s1, 1.0}}});
    S[s0].actions.push_back({"a4", {{s6, 1.0}}});
    S[s1].actions.push_back({"a2", {{s2, 0.5}, {s3, 0.5}}});
    S[s2].actions.push_back({"loop", {{s2, 1.0}}});
    S[s3].actions.push_back({"a3", {{s4, 0.5}, {s5, 0.5}}});
    S[s4].actions.push_back({"loop", {{s4, 1.0}}});
    S[s5].actions.push_back({"loop", {{s5, 1.0}}});
    S[s6].actions.push_back({"a5", {{s7, 2.0 / 3.0}, {s8, 1.0 / 3.0}}});
    S[s7].actions.push_back({"loop", {{s7, 1.0}}});
    S[s8].actions.push_back({"loop", {{s8, 1.0}}});
    m.initial = s0;
    m.validate();
    return m;
}

Mdp builtinThm1Chain(double alpha, double eps) {
    if (alpha < 0 || alpha > 1 || eps < 0 || eps > 1)
        throw ModelError("thm1chain parameters must lie in [0, 1]");
    Mdp m;
    m.atoms = {"a", "b", "c"};
    auto add = [&](const std::string& name, std::vector<std::string> labels) {
        Mdp::State st;
        st.name = name;
        st.labels = std::move(labels);
        std::sort(st.labels.begin(), st.labels.end());
        m.states.push_back(std::move(st));
        return static_cast<int>(m.states.size() - 1);
    };
    int root = add("root", {"c"});
    int left1 = add("left1", {"c"});
    int right1 = add("right1", {});
    int left2 = add("left2", {"a", "c"});
    int right2 = add("right2", {"b"});

    auto dist = [](std::initializer_list<std::pair<int, double>> edges) {
        std::vector<std::pair<int, double>> out;
        for (auto [s, p] : edges)
            if (p > 0.0) out.emplace_back(s, p);
        return out;
    };
    auto& S = m.states;
    S[root].actions.push_back({"step", dist({{left1, 1.0 - eps}, {right1, eps}})});
    S[left1].actions.push_back({"step", dist({{left2, alpha}, {right2, 1.0 - alpha}})});
    S[right1].actions.push_back({"loop", {{right1, 1.0}}});
    S[left2].actions.push_back({"loop", {{left2, 1.0}}});
    S[right2].actions.push_back({"loop", {{right2, 1.0}}});
    m.initial = root;
    m.validate();
    return m;
}

Mdp builtinModel(const std::string& name) {
    if (name == "example1") return builtinExample1();
    if (name == "gridworld1") return gridworldModel(1);
    if (name == "gridworld2") return gridworldModel(2);
    throw ModelError("unknown builtin model '" + name + "'");
}

}  // namespace cpctl
