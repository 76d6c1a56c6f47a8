#include "cpctl/policy.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "json.hpp"

namespace cpctl {

namespace {
using nlohmann::json;

constexpr double kCompatTolerance = 1e-9;
constexpr size_t kNodeCap = 1000000;

std::vector<double> diracAction(size_t actionCount, int a) {
    std::vector<double> d(actionCount, 0.0);
    if (actionCount > 0) d[static_cast<size_t>(a)] = 1.0;
    return d;
}

}  // namespace

// ---------------------------------------------------------------------------
// Finite-memory policy mechanics.

std::vector<double> FiniteMemoryPolicy::actionRule(const Mdp& m, int state, int mem) const {
    const size_t actionCount = m.states[static_cast<size_t>(state)].actions.size();
    if (mem < 0 || mem == zeroMemory) return diracAction(actionCount, 0);
    const FmMemory& mm = memories[static_cast<size_t>(mem)];
    switch (mm.mode) {
        case MemoryMode::Atomic:
            return diracAction(actionCount, 0);
        case MemoryMode::SafeLock: {
            auto it = mm.safeActions.find(state);
            return diracAction(actionCount, it != mm.safeActions.end() ? it->second : 0);
        }
        case MemoryMode::Recursive:
            if (state == mm.anchor && mm.delta.size() == actionCount) return mm.delta;
            return diracAction(actionCount, 0);
    }
    return diracAction(actionCount, 0);
}

int FiniteMemoryPolicy::memoryUpdate(int state, int mem, int nextState) const {
    (void)state;
    if (mem < 0 || mem == zeroMemory) return zeroMemory;
    const FmMemory& mm = memories[static_cast<size_t>(mem)];
    switch (mm.mode) {
        case MemoryMode::Atomic:
            return zeroMemory;
        case MemoryMode::SafeLock:
            return mem;  // locked in for good
        case MemoryMode::Recursive: {
            auto it = mm.next.find(nextState);
            return it != mm.next.end() ? it->second : zeroMemory;
        }
    }
    return zeroMemory;
}

// ---------------------------------------------------------------------------
// Witness-DAG unfolding.

FiniteMemoryPolicy extractPolicy(const Mdp& m, const Formula& f, const PointPtr& point) {
    (void)m;
    if (!point) throw std::invalid_argument("extractPolicy: null frontier point");
    FiniteMemoryPolicy pi;

    FmMemory zero;
    zero.mode = MemoryMode::Atomic;
    zero.nu.assign(f.pfCount(), 0.0);
    pi.memories.push_back(std::move(zero));
    pi.zeroMemory = 0;

    std::map<const FrontierPoint*, int> seen;
    // Iterative DFS; historical witness chains can be as deep as the number
    // of value-iteration steps that produced them.
    std::function<int(const PointPtr&)> build = [&](const PointPtr& p) -> int {
        auto it = seen.find(p.get());
        if (it != seen.end()) return it->second;

        if (p->witness.kind == WitnessKind::Zero) {
            seen[p.get()] = pi.zeroMemory;
            return pi.zeroMemory;
        }

        int id = static_cast<int>(pi.memories.size());
        pi.memories.emplace_back();
        seen[p.get()] = id;

        FmMemory mm;
        mm.anchor = p->state;
        mm.nu = p->nu;
        switch (p->witness.kind) {
            case WitnessKind::SafeSet:
                mm.mode = MemoryMode::SafeLock;
                mm.safeActions = p->witness.safeActions;
                break;
            case WitnessKind::TerminalOne:
                mm.mode = MemoryMode::Atomic;
                break;
            case WitnessKind::Recursive:
                mm.mode = MemoryMode::Recursive;
                mm.delta = p->witness.delta;
                for (const auto& [succState, succPoint] : p->witness.succ)
                    mm.next[succState] = build(succPoint);
                break;
            case WitnessKind::Zero:
                break;  // handled above
        }
        pi.memories[static_cast<size_t>(id)] = std::move(mm);
        return id;
    };

    pi.initialMemory = build(point);
    return pi;
}

// ---------------------------------------------------------------------------
// Valued policy and the compatibility certifier.

ValuedPolicy valuedFromPolicy(const Mdp& m, const Formula& f, const FiniteMemoryPolicy& pi) {
    ValuedPolicy vp;
    std::map<std::pair<int, int>, int> index;
    std::vector<std::pair<int, int>> todo;
    const std::vector<double> zeroNu(f.pfCount(), 0.0);

    auto intern = [&](int s, int mem) {
        auto key = std::make_pair(s, mem);
        auto it = index.find(key);
        if (it != index.end()) return it->second;
        if (index.size() >= kNodeCap)
            throw std::runtime_error("valued policy exceeds the node cap");
        int id = static_cast<int>(index.size());
        index[key] = id;
        vp.nodes.emplace_back();
        todo.push_back(key);
        return id;
    };

    vp.initial = intern(m.initial, pi.initialMemory);
    while (!todo.empty()) {
        auto [s, mem] = todo.back();
        todo.pop_back();
        int id = index.at({s, mem});
        const std::vector<double>& nu =
            (mem >= 0) ? pi.memories[static_cast<size_t>(mem)].nu : zeroNu;

        ValuedPolicy::Node node;
        node.state = s;
        node.memory = mem;
        node.nu = nu;
        node.mu = canonicalValuation(f, m.labelSet(s), nu);
        node.delta = pi.actionRule(m, s, mem);
        const auto& actions = m.states[static_cast<size_t>(s)].actions;
        for (size_t a = 0; a < actions.size(); ++a) {
            if (node.delta[a] <= 0.0) continue;
            for (auto [t, p] : actions[a].to)
                if (p > 0.0) node.succ[t] = intern(t, pi.memoryUpdate(s, mem, t));
        }
        vp.nodes[static_cast<size_t>(id)] = std::move(node);
    }
    return vp;
}

namespace {

void checkStateNode(const Formula& f, const std::set<std::string>& labels,
                    const std::vector<uint8_t>& mu, const std::vector<double>& nu, int nodeId,
                    CompatReport& report) {
    for (int id : f.stateSubs) {
        const FormulaNode& nd = f.node(id);
        size_t sf = static_cast<size_t>(nd.sfIndex);
        if (!mu[sf]) continue;  // only positive claims carry obligations
        switch (nd.kind) {
            case NodeKind::False:
                report.violations.push_back({"state: false asserted", nodeId, nd.sfIndex, 1.0});
                break;
            case NodeKind::Atom:
                if (!labels.count(nd.atom))
                    report.violations.push_back(
                        {"state: literal '" + nd.atom + "' not labeled", nodeId, nd.sfIndex, 1.0});
                break;
            case NodeKind::NegAtom:
                if (labels.count(nd.atom))
                    report.violations.push_back(
                        {"state: literal '!" + nd.atom + "' not labeled", nodeId, nd.sfIndex, 1.0});
                break;
            case NodeKind::And: {
                bool l = mu[static_cast<size_t>(f.node(nd.left).sfIndex)];
                bool r = mu[static_cast<size_t>(f.node(nd.right).sfIndex)];
                if (!l || !r)
                    report.violations.push_back(
                        {"state: conjunction without both conjuncts", nodeId, nd.sfIndex, 1.0});
                break;
            }
            case NodeKind::Or: {
                bool l = mu[static_cast<size_t>(f.node(nd.left).sfIndex)];
                bool r = mu[static_cast<size_t>(f.node(nd.right).sfIndex)];
                if (!l && !r)
                    report.violations.push_back(
                        {"state: disjunction without a disjunct", nodeId, nd.sfIndex, 1.0});
                break;
            }
            case NodeKind::ProbGeq: {
                double have = nu[static_cast<size_t>(nd.pathIndex)];
                if (have < nd.p - kCompatTolerance)
                    report.violations.push_back({"state: threshold claim unmet by counter", nodeId,
                                                 nd.sfIndex, nd.p - have});
                break;
            }
            default:
                break;
        }
    }
}

}  // namespace

CompatReport checkStateCompatibility(const Mdp& m, const Formula& f, const ValuedPolicy& vp) {
    CompatReport report;
    for (size_t i = 0; i < vp.nodes.size(); ++i) {
        const auto& node = vp.nodes[i];
        checkStateNode(f, m.labelSet(node.state), node.mu, node.nu, static_cast<int>(i), report);
        ++report.nodesChecked;
        if (static_cast<size_t>(report.nodesChecked) > kNodeCap) break;
    }
    return report;
}

CompatReport checkStatePoint(const Formula& f, const std::set<std::string>& labels,
                             const std::vector<uint8_t>& mu, const std::vector<double>& nu) {
    CompatReport report;
    checkStateNode(f, labels, mu, nu, 0, report);
    report.nodesChecked = 1;
    return report;
}

CompatReport checkPathCompatibility(const Mdp& m, const Formula& f, const ValuedPolicy& vp) {
    CompatReport report;
    for (size_t i = 0; i < vp.nodes.size(); ++i) {
        const auto& node = vp.nodes[i];
        const auto& actions = m.states[static_cast<size_t>(node.state)].actions;

        // Transition distribution under the node's action mix.
        std::map<int, double> dist;
        for (size_t a = 0; a < actions.size(); ++a) {
            if (node.delta[a] <= 0.0) continue;
            for (auto [t, p] : actions[a].to)
                if (p > 0.0) dist[t] += node.delta[a] * p;
        }

        for (size_t j = 0; j < f.pfCount(); ++j) {
            const FormulaNode& prob = f.node(f.pathSubs[j]);
            const FormulaNode& pn = f.node(prob.path);
            if (node.nu[j] <= kCompatTolerance) continue;  // zero claims are free

            // Successor-weighted counter mass; missing successors contribute
            // nothing and are flagged separately.
            double sum = 0.0;
            bool missing = false;
            for (const auto& [t, p] : dist) {
                auto it = node.succ.find(t);
                if (it == node.succ.end()) {
                    missing = true;
                    continue;
                }
                if (pn.kind == NodeKind::Next)
                    sum += p * (vp.nodes[static_cast<size_t>(it->second)]
                                    .mu[static_cast<size_t>(f.node(pn.left).sfIndex)]
                                    ? 1.0
                                    : 0.0);
                else
                    sum += p * vp.nodes[static_cast<size_t>(it->second)].nu[j];
            }
            if (missing)
                report.violations.push_back(
                    {"path: successor missing from the policy support", static_cast<int>(i),
                     static_cast<int>(j), 1.0});

            double mu1 = node.mu[static_cast<size_t>(f.node(pn.left).sfIndex)] ? 1.0 : 0.0;
            double bound = 0.0;
            switch (pn.kind) {
                case NodeKind::ContinuingWeakUntil: {
                    double mu2 = node.mu[static_cast<size_t>(f.node(pn.right).sfIndex)] ? 1.0 : 0.0;
                    bound = std::max(mu1 * sum, mu1 * mu2);
                    break;
                }
                case NodeKind::WeakUntil:
                case NodeKind::Until: {
                    double mu2 = node.mu[static_cast<size_t>(f.node(pn.right).sfIndex)] ? 1.0 : 0.0;
                    bound = std::max(mu1 * sum, mu2);
                    break;
                }
                case NodeKind::Next:
                    bound = sum;
                    break;
                default:
                    throw std::logic_error("checkPathCompatibility: malformed path node");
            }
            if (node.nu[j] > bound + kCompatTolerance)
                report.violations.push_back({"path: counter exceeds its operator bound",
                                             static_cast<int>(i), static_cast<int>(j),
                                             node.nu[j] - bound});
        }
        ++report.nodesChecked;
        if (static_cast<size_t>(report.nodesChecked) > kNodeCap) break;
    }
    return report;
}

Certificate certifyCoherence(const Mdp& m, const Formula& f, const ValuedPolicy& vp) {
    Certificate c;
    c.state = checkStateCompatibility(m, f, vp);
    c.path = checkPathCompatibility(m, f, vp);
    c.valid = c.state.ok() && c.path.ok();
    return c;
}

std::string certificateJson(const Mdp& m, const Formula& f, const Certificate& c) {
    json j;
    j["valid"] = c.valid;
    j["formula"] = printFormula(f);
    j["nodesChecked"] = std::max(c.state.nodesChecked, c.path.nodesChecked);
    json viols = json::array();
    auto emit = [&](const CompatReport& r) {
        for (const auto& v : r.violations) {
            json e;
            e["clause"] = v.clause;
            e["node"] = v.node;
            e["subIndex"] = v.subIndex;
            e["slack"] = v.slack;
            viols.push_back(std::move(e));
        }
    };
    emit(c.state);
    emit(c.path);
    j["violations"] = std::move(viols);
    (void)m;
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Serialization.

namespace {

std::string modeName(MemoryMode mode) {
    switch (mode) {
        case MemoryMode::Atomic: return "atomic";
        case MemoryMode::SafeLock: return "safelock";
        case MemoryMode::Recursive: return "recursive";
    }
    return "atomic";
}

MemoryMode modeFromName(const std::string& name) {
    if (name == "atomic") return MemoryMode::Atomic;
    if (name == "safelock") return MemoryMode::SafeLock;
    if (name == "recursive") return MemoryMode::Recursive;
    throw std::runtime_error("unknown memory mode '" + name + "'");
}

}  // namespace

std::string savePolicy(const Mdp& m, const FiniteMemoryPolicy& pi) {
    json j;
    j["initial"] = pi.initialMemory;
    j["zero"] = pi.zeroMemory;
    json mems = json::array();
    for (const auto& mm : pi.memories) {
        json e;
        e["mode"] = modeName(mm.mode);
        e["anchor"] = mm.anchor >= 0 ? m.states[static_cast<size_t>(mm.anchor)].name : "";
        e["nu"] = mm.nu;
        if (mm.mode == MemoryMode::Recursive) {
            e["delta"] = mm.delta;
            json next = json::object();
            for (const auto& [s, mem] : mm.next)
                next[m.states[static_cast<size_t>(s)].name] = mem;
            e["next"] = std::move(next);
        }
        if (mm.mode == MemoryMode::SafeLock) {
            json sa = json::object();
            for (const auto& [s, a] : mm.safeActions)
                sa[m.states[static_cast<size_t>(s)].name] = a;
            e["safeActions"] = std::move(sa);
        }
        mems.push_back(std::move(e));
    }
    j["memories"] = std::move(mems);
    return j.dump(2) + "\n";
}

FiniteMemoryPolicy loadPolicy(const Mdp& m, const std::string& bytes) {
    json j = json::parse(bytes);
    FiniteMemoryPolicy pi;
    pi.initialMemory = j.at("initial").get<int>();
    pi.zeroMemory = j.at("zero").get<int>();
    for (const auto& e : j.at("memories")) {
        FmMemory mm;
        mm.mode = modeFromName(e.at("mode").get<std::string>());
        std::string anchor = e.value("anchor", std::string());
        mm.anchor = anchor.empty() ? -1 : m.stateIndex(anchor);
        mm.nu = e.at("nu").get<std::vector<double>>();
        if (e.contains("delta")) mm.delta = e.at("delta").get<std::vector<double>>();
        if (e.contains("next"))
            for (const auto& [name, mem] : e.at("next").items()) {
                int s = m.stateIndex(name);
                if (s < 0) throw std::runtime_error("policy references unknown state '" + name + "'");
                mm.next[s] = mem.get<int>();
            }
        if (e.contains("safeActions"))
            for (const auto& [name, a] : e.at("safeActions").items()) {
                int s = m.stateIndex(name);
                if (s < 0) throw std::runtime_error("policy references unknown state '" + name + "'");
                mm.safeActions[s] = a.get<int>();
            }
        pi.memories.push_back(std::move(mm));
    }
    if (pi.initialMemory < 0 || static_cast<size_t>(pi.initialMemory) >= pi.memories.size())
        throw std::runtime_error("policy initial memory out of range");
    return pi;
}

std::string saveValuedPolicy(const Mdp& m, const ValuedPolicy& vp) {
    json j;
    j["initial"] = vp.initial;
    json nodes = json::array();
    for (const auto& node : vp.nodes) {
        json e;
        e["state"] = m.states[static_cast<size_t>(node.state)].name;
        e["memory"] = node.memory;
        e["mu"] = node.mu;
        e["nu"] = node.nu;
        e["delta"] = node.delta;
        json succ = json::object();
        for (const auto& [t, id] : node.succ) succ[m.states[static_cast<size_t>(t)].name] = id;
        e["succ"] = std::move(succ);
        nodes.push_back(std::move(e));
    }
    j["nodes"] = std::move(nodes);
    return j.dump(2) + "\n";
}

ValuedPolicy loadValuedPolicy(const Mdp& m, const std::string& bytes) {
    json j = json::parse(bytes);
    ValuedPolicy vp;
    vp.initial = j.at("initial").get<int>();
    for (const auto& e : j.at("nodes")) {
        ValuedPolicy::Node node;
        std::string name = e.at("state").get<std::string>();
        node.state = m.stateIndex(name);
        if (node.state < 0)
            throw std::runtime_error("valued policy references unknown state '" + name + "'");
        node.memory = e.value("memory", -1);
        node.mu = e.at("mu").get<std::vector<uint8_t>>();
        node.nu = e.at("nu").get<std::vector<double>>();
        node.delta = e.at("delta").get<std::vector<double>>();
        for (const auto& [sname, id] : e.at("succ").items()) {
            int s = m.stateIndex(sname);
            if (s < 0)
                throw std::runtime_error("valued policy references unknown state '" + sname + "'");
            node.succ[s] = id.get<int>();
        }
        vp.nodes.push_back(std::move(node));
    }
    return vp;
}

// ---------------------------------------------------------------------------
// History projection.

ProjectedPolicy::ProjectedPolicy(const Mdp& m, ValuedPolicy vp) : m_(&m), vp_(std::move(vp)) {}

std::vector<double> ProjectedPolicy::operator()(const History& h) const {
    if (vp_.initial < 0 || vp_.nodes.empty()) return {};
    int cur = vp_.initial;
    if (h.states.empty()) return {};
    if (h.states.front() != vp_.nodes[static_cast<size_t>(cur)].state) return {};
    for (size_t i = 1; i < h.states.size(); ++i) {
        const auto& node = vp_.nodes[static_cast<size_t>(cur)];
        auto it = node.succ.find(h.states[i]);
        if (it == node.succ.end()) return {};
        cur = it->second;
    }
    return vp_.nodes[static_cast<size_t>(cur)].delta;
}

}  // namespace cpctl
