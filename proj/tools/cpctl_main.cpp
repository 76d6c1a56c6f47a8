// Command-line front end: model inspection, synthesis, certification,
// exact/simulated checking, and frontier plot-data export.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cpctl/engine.hpp"
#include "cpctl/formula.hpp"
#include "cpctl/model.hpp"
#include "cpctl/policy.hpp"
#include "cpctl/reachability.hpp"
#include "cpctl/verify.hpp"

namespace {

using nlohmann::json;
using namespace cpctl;

constexpr const char* kVersion = "1.0.0";

enum ExitCode {
    kOk = 0,
    kTargetUnmet = 2,
    kIterCap = 3,
    kUsage = 64,
    kDomain = 65,
    kNoInput = 66,
    kCantCreate = 73,
};

struct FileError : std::runtime_error {
    int code;
    FileError(const std::string& msg, int c) : std::runtime_error(msg), code(c) {}
};

std::string readFileOrThrow(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileError("cannot open input file '" + path + "'", kNoInput);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void writeFileOrThrow(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FileError("cannot create output file '" + path + "'", kCantCreate);
    out << bytes;
    if (!out) throw FileError("cannot write output file '" + path + "'", kCantCreate);
}

uint64_t fnv1a(const std::string& bytes) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string fmtDouble(double x) {
    std::ostringstream ss;
    ss.precision(17);
    ss << x;
    return ss.str();
}

// Written on every run, success or failure, so results stay traceable.
struct Manifest {
    json j;
    std::string path = "cpctl-manifest.json";

    Manifest() {
        j["tool"] = "cpctl";
        j["version"] = kVersion;
        j["status"] = "error";
        j["outputs"] = json::array();
    }
    void addOutput(const std::string& p) { j["outputs"].push_back(p); }
    void flush(long long ms, int code) {
        j["timingMs"] = ms;
        j["exitCode"] = code;
        std::ofstream out(path, std::ios::binary);
        if (out) out << j.dump(2) << "\n";
    }
};

struct ModelOptions {
    std::string name;
    GridworldSlips slips;
};

Mdp resolveModel(const ModelOptions& opt) {
    if (opt.name == "example1") return builtinExample1();
    if (opt.name == "gridworld1") return gridworldModel(1, opt.slips);
    if (opt.name == "gridworld2") return gridworldModel(2, opt.slips);
    Mdp m = loadModel(readFileOrThrow(opt.name));
    m.validate();
    return m;
}

void addModelFlags(CLI::App* cmd, ModelOptions& opt) {
    cmd->add_option("--model", opt.name, "builtin name (example1, gridworld1, gridworld2) or model file")
        ->required();
    cmd->add_option("--slip-high", opt.slips.high, "high-slip column probability");
    cmd->add_option("--slip-medium", opt.slips.medium, "medium-slip column probability");
    cmd->add_option("--slip-low", opt.slips.low, "low-slip column probability");
    cmd->add_option("--slip-constant", opt.slips.constant, "default column slip probability");
}

int effectiveThreads(int flagValue) {
    if (const char* env = std::getenv("CPCTL_THREADS")) {
        int v = std::atoi(env);
        if (v >= 1) return v;
    }
    if (flagValue >= 1) return flagValue;
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

std::string frontierCsv(const Mdp& m, const Formula& f, const ValueVector& v) {
    std::ostringstream ss;
    ss << "state";
    for (size_t i = 0; i < f.sfCount(); ++i) ss << ",mu" << i;
    for (size_t j = 0; j < f.pfCount(); ++j) ss << ",nu" << j;
    ss << "\n";
    for (size_t s = 0; s < v.perState.size(); ++s) {
        for (const PointPtr& p : v.perState[s]) {
            ss << m.states[s].name;
            for (uint8_t b : p->mu) ss << "," << static_cast<int>(b);
            for (double x : p->nu) ss << "," << fmtDouble(x);
            ss << "\n";
        }
    }
    return ss.str();
}

json frontierJson(const Mdp& m, const Formula& f, const ValueVector& v) {
    json out = json::array();
    (void)f;
    for (size_t s = 0; s < v.perState.size(); ++s) {
        for (const PointPtr& p : v.perState[s]) {
            json e;
            e["state"] = m.states[s].name;
            e["mu"] = p->mu;
            e["nu"] = p->nu;
            out.push_back(std::move(e));
        }
    }
    return out;
}

int runModel(const ModelOptions& opt, const std::string& outPath, Manifest& man) {
    Mdp m = resolveModel(opt);
    man.j["modelHash"] = fnv1a(saveModel(m));
    if (!outPath.empty()) {
        writeFileOrThrow(outPath, saveModel(m));
        man.addOutput(outPath);
    }
    json summary;
    summary["states"] = m.size();
    summary["atoms"] = m.atoms;
    summary["initial"] = m.states[static_cast<size_t>(m.initial)].name;
    size_t transitions = 0, actions = 0;
    for (const auto& st : m.states) {
        actions += st.actions.size();
        for (const auto& a : st.actions) transitions += a.to.size();
    }
    summary["actions"] = actions;
    summary["transitions"] = transitions;
    std::cout << summary.dump(2) << "\n";
    man.j["status"] = "ok";
    return kOk;
}

int runSynth(const ModelOptions& opt, const std::string& formulaText, EngineConfig cfg,
             const std::string& frontierPath, const std::string& policyPath, bool slater,
             Manifest& man) {
    Mdp m = resolveModel(opt);
    man.j["modelHash"] = fnv1a(saveModel(m));
    Formula f = parseFormula(formulaText, Fragment::Cpctl);
    VIResult res = runVI(m, f, cfg);

    json out;
    out["iterations"] = res.iterations;
    switch (res.status) {
        case VIStatus::TargetMet: out["status"] = "TARGET_MET"; break;
        case VIStatus::ConvergedTargetUnmet: out["status"] = "CONVERGED_TARGET_UNMET"; break;
        case VIStatus::IterCap: out["status"] = "ITER_CAP"; break;
    }

    if (!frontierPath.empty()) {
        writeFileOrThrow(frontierPath, frontierCsv(m, f, res.frontiers));
        writeFileOrThrow(frontierPath + ".json",
                         frontierJson(m, f, res.frontiers).dump(2) + "\n");
        man.addOutput(frontierPath);
        man.addOutput(frontierPath + ".json");
    }
    if (res.status == VIStatus::TargetMet) {
        FiniteMemoryPolicy pi = extractPolicy(m, f, res.targetPoint);
        ProductCheck pc = productChainCheck(m, pi, f);
        json probs = json::array();
        for (size_t j = 0; j < f.pfCount(); ++j) probs.push_back(pc.initialProb(static_cast<int>(j)));
        out["productProbabilities"] = std::move(probs);
        if (!policyPath.empty()) {
            writeFileOrThrow(policyPath, savePolicy(m, pi));
            man.addOutput(policyPath);
        }
    }
    if (slater) {
        SlaterReport rep = slaterCheck(m, f, cfg);
        out["slater"] = {{"satisfiable", rep.satisfiable},
                         {"bumpedThresholds", rep.bumpedThresholds},
                         {"iterations", rep.iterations}};
    }
    std::cout << out.dump(2) << "\n";
    man.j["status"] = out["status"];
    switch (res.status) {
        case VIStatus::TargetMet: return kOk;
        case VIStatus::ConvergedTargetUnmet: return kTargetUnmet;
        case VIStatus::IterCap: return kIterCap;
    }
    return kDomain;
}

int runCertify(const ModelOptions& opt, const std::string& formulaText,
               const std::string& policyPath, const std::string& outPath, Manifest& man) {
    Mdp m = resolveModel(opt);
    man.j["modelHash"] = fnv1a(saveModel(m));
    Formula f = parseFormula(formulaText, Fragment::Cpctl);
    FiniteMemoryPolicy pi = loadPolicy(m, readFileOrThrow(policyPath));
    ValuedPolicy vp = valuedFromPolicy(m, f, pi);
    Certificate cert = certifyCoherence(m, f, vp);
    std::string doc = certificateJson(m, f, cert);
    if (!outPath.empty()) {
        writeFileOrThrow(outPath, doc);
        man.addOutput(outPath);
    }
    std::cout << doc;
    man.j["status"] = cert.valid ? "valid" : "invalid";
    return cert.valid ? kOk : kDomain;
}

int runCheck(const ModelOptions& opt, const std::string& formulaText,
             const std::string& policyPath, double alpha, double eps, bool haveAlpha,
             long simRuns, int simHorizon, uint64_t seed, Manifest& man) {
    json out;
    if (opt.name == "thm1") {
        if (!haveAlpha) throw CLI::ValidationError("--model thm1 requires --alpha and --eps");
        bool sat = checkThm1Chain(alpha, eps);
        out["satisfied"] = sat;
        out["alpha"] = alpha;
        out["eps"] = eps;
        std::cout << out.dump(2) << "\n";
        man.j["status"] = "ok";
        return kOk;
    }

    Mdp m = resolveModel(opt);
    man.j["modelHash"] = fnv1a(saveModel(m));
    if (formulaText.empty()) throw CLI::ValidationError("--formula is required");
    Formula f;
    try {
        f = parseFormula(formulaText, Fragment::Cpctl);
    } catch (const ParseError&) {
        f = parseFormula(formulaText, Fragment::SafePctl);
    }

    if (!policyPath.empty()) {
        FiniteMemoryPolicy pi = loadPolicy(m, readFileOrThrow(policyPath));
        if (simRuns > 0) {
            SimResult sim = simulate(m, pi, f, simRuns, simHorizon, seed);
            json per = json::array();
            for (size_t j = 0; j < f.pfCount(); ++j)
                per.push_back({{"lower", sim.lo[j]},
                               {"upper", sim.hi[j]},
                               {"successes", sim.successes[j]},
                               {"failures", sim.failures[j]},
                               {"unsettled", sim.unsettled[j]}});
            out["simulate"] = std::move(per);
            out["runs"] = sim.runs;
            out["seed"] = seed;
        } else {
            ProductCheck pc = productChainCheck(m, pi, f);
            out["satisfied"] = pc.result.holdsAtInitial(f, pc.chain);
            json probs = json::array();
            for (size_t j = 0; j < f.pfCount(); ++j)
                probs.push_back(pc.initialProb(static_cast<int>(j)));
            out["probabilities"] = std::move(probs);
            out["productStates"] = pc.chain.size();
        }
    } else {
        // No policy: the model must already be a chain (one action per state).
        for (const auto& st : m.states)
            if (st.actions.size() != 1)
                throw std::invalid_argument(
                    "state '" + st.name + "' has several actions; supply --policy");
        MarkovChain c = induceChain(m, diracFirstPolicy(m));
        CheckResult r = exactCheck(c, f);
        out["satisfied"] = r.holdsAtInitial(f, c);
        json probs = json::array();
        for (size_t j = 0; j < f.pfCount(); ++j)
            probs.push_back(r.prob[j][static_cast<size_t>(c.initial)]);
        out["probabilities"] = std::move(probs);
    }
    std::cout << out.dump(2) << "\n";
    man.j["status"] = "ok";
    return kOk;
}

int runFrontierPlot(const std::string& inPath, const std::string& outPath,
                    const std::string& stateFilter, int innerCol, int objectiveCol,
                    Manifest& man) {
    std::istringstream in(readFileOrThrow(inPath));
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("empty frontier file");
    std::vector<std::string> header;
    {
        std::istringstream hs(line);
        std::string cell;
        while (std::getline(hs, cell, ',')) header.push_back(cell);
    }
    auto findCol = [&](const std::string& name) {
        for (size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        return -1;
    };
    int xCol = findCol("nu" + std::to_string(innerCol));
    int yCol = findCol("nu" + std::to_string(objectiveCol));
    if (xCol < 0 || yCol < 0)
        throw std::invalid_argument("frontier file lacks the requested counter columns");

    std::vector<std::pair<double, double>> pts;
    std::string chosenState = stateFilter;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::vector<std::string> cells;
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (chosenState.empty()) chosenState = cells[0];
        if (cells[0] != chosenState) continue;
        pts.emplace_back(std::stod(cells[static_cast<size_t>(xCol)]),
                         std::stod(cells[static_cast<size_t>(yCol)]));
    }

    // Upper staircase, two columns per breakpoint.
    std::sort(pts.begin(), pts.end());
    std::vector<std::pair<double, double>> curve;
    double running = 0.0;
    for (auto it = pts.rbegin(); it != pts.rend(); ++it) {
        running = std::max(running, it->second);
        if (!curve.empty() && curve.back().first == it->first)
            curve.back().second = running;
        else
            curve.emplace_back(it->first, running);
    }
    std::reverse(curve.begin(), curve.end());

    std::ostringstream ss;
    for (auto [x, y] : curve) ss << fmtDouble(x) << " " << fmtDouble(y) << "\n";
    writeFileOrThrow(outPath, ss.str());
    man.addOutput(outPath);
    man.j["status"] = "ok";
    std::cout << "wrote " << curve.size() << " step points for state " << chosenState << "\n";
    return kOk;
}

int runPreinfo(const ModelOptions& opt, const std::string& formulaText, Manifest& man) {
    Mdp m = resolveModel(opt);
    man.j["modelHash"] = fnv1a(saveModel(m));
    Formula f = parseFormula(formulaText, Fragment::Cpctl);
    Depths d = depths(f);
    json out;
    out["formula"] = printFormula(f);
    out["nestingDepth"] = d.nesting[static_cast<size_t>(f.root)];
    out["totalDepth"] = d.total[static_cast<size_t>(f.root)];
    out["thresholds"] = f.thresholds();
    auto req = requiredFlags(f);
    json perPath = json::array();
    for (size_t j = 0; j < f.pfCount(); ++j) {
        json e;
        Formula alit = literalProjection(f, f.pathSubs[j]);
        e["alit"] = printFormula(alit);
        e["requiredFlags"] = req[j];
        SafeSet ss = almostSureGlobally(m, alit);
        json members = json::array();
        for (size_t s = 0; s < m.size(); ++s)
            if (ss.member[s]) members.push_back(m.states[s].name);
        e["almostSureGloballyAlit"] = std::move(members);
        perPath.push_back(std::move(e));
    }
    out["pathSubformulas"] = std::move(perPath);
    ValueVector v = initialValueVector(m, f);
    size_t points = 0;
    for (const auto& ps : v.perState) points += ps.size();
    out["initialPoints"] = points;
    std::cout << out.dump(2) << "\n";
    man.j["status"] = "ok";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"CPCTL synthesis and model checking"};
    app.require_subcommand(1);

    Manifest man;
    app.add_option("--manifest", man.path, "run manifest output path");

    ModelOptions modelOpt, synthOpt, certOpt, checkOpt, preOpt;
    std::string modelOut;
    auto* cmdModel = app.add_subcommand("model", "load, validate, and summarize a model");
    addModelFlags(cmdModel, modelOpt);
    cmdModel->add_option("--out", modelOut, "write the normalized model");

    std::string synthFormula, frontierPath, policyOutPath;
    EngineConfig cfg;
    bool slater = false;
    int threadsFlag = 0;
    auto* cmdSynth = app.add_subcommand("synth", "frontier value iteration and policy extraction");
    addModelFlags(cmdSynth, synthOpt);
    cmdSynth->add_option("--formula", synthFormula, "target formula")->required();
    cmdSynth->add_option("--epsilon", cfg.epsilon, "frontier thinning radius");
    cmdSynth->add_option("--max-iters", cfg.maxIters, "iteration cap");
    cmdSynth->add_option("--delta", cfg.convergenceDelta, "convergence threshold");
    cmdSynth->add_option("--w-mix", cfg.wMix, "mixing grid resolution");
    cmdSynth->add_option("--max-points", cfg.maxPointsPerState, "frontier size cap per state");
    cmdSynth->add_option("--frontier", frontierPath, "frontier CSV output (JSON mirror alongside)");
    cmdSynth->add_option("--policy", policyOutPath, "extracted policy output");
    cmdSynth->add_flag("--slater-check", slater, "rerun with bumped thresholds");
    cmdSynth->add_option("--threads", threadsFlag, "worker threads (0 = all cores)");

    std::string certFormula, certPolicy, certOut;
    auto* cmdCertify = app.add_subcommand("certify", "check a policy's compatibility certificate");
    addModelFlags(cmdCertify, certOpt);
    cmdCertify->add_option("--formula", certFormula, "formula the policy claims")->required();
    cmdCertify->add_option("--policy", certPolicy, "finite-memory policy file")->required();
    cmdCertify->add_option("--out", certOut, "certificate output path");

    std::string checkFormula, checkPolicy;
    double alpha = 0.0, eps = 0.0;
    long simRuns = 0;
    int simHorizon = 200;
    uint64_t seed = 42;
    auto* cmdCheck = app.add_subcommand("check", "exact or simulated verification");
    checkOpt.name.clear();
    cmdCheck->add_option("--model", checkOpt.name,
                         "builtin name (example1, thm1, gridworld1, gridworld2) or model file")
        ->required();
    cmdCheck->add_option("--slip-high", checkOpt.slips.high, "high-slip column probability");
    cmdCheck->add_option("--slip-medium", checkOpt.slips.medium, "medium-slip column probability");
    cmdCheck->add_option("--slip-low", checkOpt.slips.low, "low-slip column probability");
    cmdCheck->add_option("--slip-constant", checkOpt.slips.constant, "default column slip");
    cmdCheck->add_option("--formula", checkFormula, "formula to check");
    cmdCheck->add_option("--policy", checkPolicy, "finite-memory policy file");
    auto* alphaOpt = cmdCheck->add_option("--alpha", alpha, "two-level chain branch weight");
    cmdCheck->add_option("--eps", eps, "two-level chain escape weight");
    cmdCheck->add_option("--simulate", simRuns, "Monte-Carlo runs (0 = exact)");
    cmdCheck->add_option("--horizon", simHorizon, "simulation horizon");
    cmdCheck->add_option("--seed", seed, "simulation seed");

    std::string plotIn, plotOut, plotState;
    int plotInner = 0, plotObjective = -1;
    auto* cmdPlot = app.add_subcommand("frontier-plot", "convert a frontier CSV to step data");
    cmdPlot->add_option("--in", plotIn, "frontier CSV")->required();
    cmdPlot->add_option("--out", plotOut, "step-function output")->required();
    cmdPlot->add_option("--state", plotState, "state to plot (default: first row)");
    cmdPlot->add_option("--inner", plotInner, "inner counter column");
    cmdPlot->add_option("--objective", plotObjective, "objective counter column (-1 = last)");

    std::string preFormula;
    auto* cmdPre = app.add_subcommand("preinfo", "literal projections, safe sets, initial points");
    addModelFlags(cmdPre, preOpt);
    cmdPre->add_option("--formula", preFormula, "formula to analyze")->required();

    auto started = std::chrono::steady_clock::now();
    auto elapsed = [&]() {
        return std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::steady_clock::now() - started)
            .count();
    };

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        man.j["command"] = "parse-error";
        man.flush(elapsed(), rc == 0 ? 0 : kUsage);
        return rc == 0 ? 0 : kUsage;
    }

    cfg.threads = effectiveThreads(threadsFlag);
    for (int i = 0; i < argc; ++i)
        man.j["argv"].push_back(argv[i]);
    man.j["seed"] = seed;

    int code = kDomain;
    try {
        if (cmdModel->parsed()) {
            man.j["command"] = "model";
            code = runModel(modelOpt, modelOut, man);
        } else if (cmdSynth->parsed()) {
            man.j["command"] = "synth";
            man.j["formula"] = synthFormula;
            man.j["config"] = {{"epsilon", cfg.epsilon},
                               {"maxIters", cfg.maxIters},
                               {"convergenceDelta", cfg.convergenceDelta},
                               {"wMix", cfg.wMix},
                               {"maxPointsPerState", cfg.maxPointsPerState},
                               {"threads", cfg.threads}};
            code = runSynth(synthOpt, synthFormula, cfg, frontierPath, policyOutPath, slater, man);
        } else if (cmdCertify->parsed()) {
            man.j["command"] = "certify";
            man.j["formula"] = certFormula;
            code = runCertify(certOpt, certFormula, certPolicy, certOut, man);
        } else if (cmdCheck->parsed()) {
            man.j["command"] = "check";
            man.j["formula"] = checkFormula;
            code = runCheck(checkOpt, checkFormula, checkPolicy, alpha, eps, alphaOpt->count() > 0,
                            simRuns, simHorizon, seed, man);
        } else if (cmdPlot->parsed()) {
            man.j["command"] = "frontier-plot";
            if (plotObjective < 0) {
                // Default to the last counter column present in the header.
                std::istringstream in(readFileOrThrow(plotIn));
                std::string header;
                std::getline(in, header);
                int last = 0;
                size_t pos = 0;
                while ((pos = header.find(",nu", pos)) != std::string::npos) {
                    last = std::atoi(header.c_str() + pos + 3);
                    ++pos;
                }
                plotObjective = last;
            }
            code = runFrontierPlot(plotIn, plotOut, plotState, plotInner, plotObjective, man);
        } else if (cmdPre->parsed()) {
            man.j["command"] = "preinfo";
            man.j["formula"] = preFormula;
            code = runPreinfo(preOpt, preFormula, man);
        }
    } catch (const FileError& e) {
        std::cerr << "error: " << e.what() << "\n";
        man.j["error"] = e.what();
        code = e.code;
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        man.j["error"] = e.what();
        code = kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        man.j["error"] = e.what();
        code = kDomain;
    }
    man.flush(elapsed(), code);
    return code;
}
