// antroute: run scenarios, generate topologies, query the oracle, merge
// reports. Exit codes: 0 done, 2 bad input, 3 invariant violation.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "antroute/batch.hpp"
#include "antroute/errors.hpp"
#include "antroute/oracle.hpp"
#include "antroute/simulator.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace antroute;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitInvariant = 3;

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("antroute");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("%^%l%$: %v");
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("ANTROUTE_LOG")) {
        const auto level = spdlog::level::from_str(env);
        if (level == spdlog::level::off && std::string(env) != "off")
            spdlog::warn("ANTROUTE_LOG: unknown level '{}', keeping 'warn'", env);
        else
            spdlog::set_level(level);
    }
}

json read_json(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open '" + file.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("'" + file.string() + "' is not valid JSON: " + e.what());
    }
}

void write_file(const fs::path& file, const std::string& text) {
    if (file.has_parent_path()) fs::create_directories(file.parent_path());
    std::ofstream out(file, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + file.string() + "'");
    out << text;
}

// "flood_all", "top_k:K" or "pareto_weighted:ALPHA:K".
json policy_arg(const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    try {
        if (parts.size() == 1 && parts[0] == "flood_all") return "flood_all";
        if (parts.size() == 2 && parts[0] == "top_k") return {{"top_k", std::stoul(parts[1])}};
        if (parts.size() == 3 && parts[0] == "pareto_weighted")
            return {{"pareto_weighted", {{"alpha", std::stod(parts[1])}, {"k", std::stoul(parts[2])}}}};
    } catch (const std::exception&) {
    }
    throw ConfigError("--policy: expected flood_all, top_k:K or pareto_weighted:ALPHA:K, got '" + s + "'");
}

// "NODE:counter_cheat:DELTA", "NODE:fee_inflate:DELTA", "NODE:dropper:P",
// "NODE:transparent_cheat".
json adversary_arg(const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    try {
        if (parts.size() >= 2) {
            json a = {{"node", std::stoul(parts[0])}, {"kind", parts[1]}};
            if (parts.size() == 2 && parts[1] == "transparent_cheat") return a;
            if (parts.size() == 3 && (parts[1] == "counter_cheat" || parts[1] == "fee_inflate")) {
                a["delta"] = std::stoull(parts[2]);
                return a;
            }
            if (parts.size() == 3 && parts[1] == "dropper") {
                a["p"] = std::stod(parts[2]);
                return a;
            }
        }
    } catch (const std::exception&) {
    }
    throw ConfigError("--adversary: cannot parse '" + s + "'");
}

struct RunArgs {
    std::string scenario;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::string policy;
    std::vector<std::string> adversaries;
    bool event_log = false;
    bool csv = false;
    std::size_t repeat = 1;
    int threads = 0;
};

std::string csv_for(const json& doc) {
    std::ostringstream out;
    write_payment_csv_header(out, false);
    write_payment_csv_rows(out, doc);
    return out.str();
}

int cmd_run(const RunArgs& a) {
    json doc = read_json(a.scenario);
    if (!doc.is_object()) throw ConfigError("scenario must be a JSON object");
    if (a.seed) doc["seed"] = *a.seed;
    if (!a.policy.empty()) doc["node_defaults"]["policy"] = policy_arg(a.policy);
    for (const auto& adv : a.adversaries) doc["adversaries"].push_back(adversary_arg(adv));
    const Scenario scenario = scenario_from_json(doc, fs::path(a.scenario).parent_path());
    if (a.repeat == 0) throw ConfigError("--repeat must be at least 1");
    if (a.repeat > 1 && a.event_log) throw ConfigError("--event-log cannot be combined with --repeat");

    const fs::path out(a.out);
    fs::create_directories(out);
    std::size_t violations = 0;
    if (a.repeat == 1) {
        spdlog::info("running scenario {} (seed {}, {} nodes)", a.scenario, scenario.seed, scenario.topology.nodes);
        std::ofstream log;
        if (a.event_log) {
            log.open(out / "events.jsonl", std::ios::binary);
            if (!log) throw ConfigError("cannot write '" + (out / "events.jsonl").string() + "'");
        }
        const Metrics m = run_scenario(scenario, a.event_log ? &log : nullptr);
        const json mdoc = metrics_to_json(m);
        write_file(out / "metrics.json", mdoc.dump(2) + "\n");
        if (a.csv) write_file(out / "payments.csv", csv_for(mdoc));
        spdlog::info("{} payments, success rate {:.3f}, {} messages", m.payments.size(), m.success_rate(), m.messages);
        violations = m.invariant_violations.size();
        for (const auto& v : m.invariant_violations) spdlog::error("invariant violation: {}", v);
    } else {
        const auto runs = run_batch(repeat_with_seeds(scenario, a.repeat), a.threads);
        for (std::size_t i = 0; i < runs.size(); ++i) {
            char name[32];
            std::snprintf(name, sizeof name, "run_%03zu", i);
            const json mdoc = metrics_to_json(runs[i]);
            write_file(out / (std::string(name) + "_metrics.json"), mdoc.dump(2) + "\n");
            if (a.csv) write_file(out / (std::string(name) + "_payments.csv"), csv_for(mdoc));
            spdlog::info("{}: seed {}, success rate {:.3f}", name, runs[i].seed, runs[i].success_rate());
            violations += runs[i].invariant_violations.size();
            for (const auto& v : runs[i].invariant_violations) spdlog::error("{}: invariant violation: {}", name, v);
        }
    }
    return violations ? kExitInvariant : 0;
}

struct TopoArgs {
    std::string kind;
    std::uint32_t n = 0, width = 0, height = 0, m = 0;
    double p = 0.0;
    std::uint64_t seed = 1;
    std::optional<Msat> capacity;
    std::vector<Msat> capacity_range;
    double unidirectional = 0.0;
    std::string out;
};

int cmd_topo(const TopoArgs& a) {
    TopologyParams params;
    params.kind = topology_kind_from_string(a.kind);
    params.n = a.n;
    params.width = a.width;
    params.height = a.height;
    params.m = a.m;
    params.p = a.p;
    CapacityModel cap;
    if (!a.capacity_range.empty()) {
        if (a.capacity_range.size() != 2) throw ConfigError("--capacity-range takes LO HI");
        cap = CapacityModel::uniform_range(a.capacity_range[0], a.capacity_range[1]);
    } else if (a.capacity) {
        cap = CapacityModel::constant(*a.capacity);
    }
    cap.unidirectional_fraction = a.unidirectional;
    Topology t;
    try {
        t = generate_topology(params, cap, a.seed);
    } catch (const TopologyError& e) {
        throw ConfigError(e.what());
    }
    write_file(a.out, topology_to_json(t).dump(2) + "\n");
    std::cout << a.kind << ": " << t.nodes << " nodes, " << t.channels.size() << " channels -> " << a.out << "\n";
    return 0;
}

struct OracleArgs {
    std::string topology;
    std::uint32_t payer = 0, payee = 0;
    Msat amount = 0;
    std::optional<Msat> fee;
    std::vector<Msat> fees;
};

int cmd_oracle(const OracleArgs& a) {
    Topology t;
    try {
        t = topology_from_json(read_json(a.topology));
    } catch (const TopologyError& e) {
        throw ConfigError(e.what());
    }
    if (a.payer >= t.nodes || a.payee >= t.nodes) throw ConfigError("payer/payee outside topology");
    auto path_text = [](const OraclePath& p) {
        std::string s;
        for (auto n : p.nodes) s += (s.empty() ? "" : ",") + std::to_string(n.value);
        return s;
    };
    const auto shortest = oracle_shortest_path(t.nodes, t.channels, NodeId{a.payer}, NodeId{a.payee}, a.amount);
    if (!shortest) {
        std::cout << "unreachable\n";
        return 0;
    }
    std::cout << "hops " << shortest->hops() << " path " << path_text(*shortest) << "\n";
    if (a.fee || !a.fees.empty()) {
        std::vector<Msat> fees = a.fees;
        if (fees.empty()) fees.assign(t.nodes, *a.fee);
        if (fees.size() != t.nodes) throw ConfigError("--fees needs one value per node");
        const auto cheap =
            oracle_cheapest_path(t.nodes, t.channels, NodeId{a.payer}, NodeId{a.payee}, a.amount, fees);
        std::cout << "fee " << cheap->fee << " hops " << cheap->hops() << " path " << path_text(*cheap) << "\n";
    }
    return 0;
}

int cmd_report(const std::vector<std::string>& files, const std::string& out_file) {
    std::ostringstream rows;
    write_payment_csv_header(rows, true);
    std::size_t payments = 0, successes = 0;
    std::uint64_t messages = 0;
    for (const auto& f : files) {
        const json doc = read_json(f);
        if (!doc.contains("payments") || !doc.contains("aggregate"))
            throw ConfigError("'" + f + "' is not a metrics document");
        write_payment_csv_rows(rows, doc, f);
        for (const auto& p : doc.at("payments")) {
            payments++;
            successes += p.at("success").get<bool>();
            messages += p.at("messages").get<std::uint64_t>();
        }
    }
    write_file(out_file, rows.str());
    const json summary = {{"runs", files.size()},
                          {"payments", payments},
                          {"successes", successes},
                          {"success_rate", payments ? double(successes) / double(payments) : 0.0},
                          {"messages_per_payment", payments ? double(messages) / double(payments) : 0.0}};
    std::cout << summary.dump() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    setup_logging();
    CLI::App app{"Decentralized route discovery simulator"};
    app.require_subcommand(1);

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "Run a scenario and write metrics.json");
    run_cmd->add_option("--scenario", run.scenario, "Scenario JSON file")->required();
    run_cmd->add_option("--out", run.out, "Output directory")->required();
    run_cmd->add_option("--seed", run.seed, "Override the scenario seed");
    run_cmd->add_option("--policy", run.policy, "Override node_defaults.policy: flood_all | top_k:K | pareto_weighted:ALPHA:K");
    run_cmd->add_option("--adversary", run.adversaries,
                        "Add an adversary: NODE:counter_cheat:D | NODE:fee_inflate:D | NODE:dropper:P | "
                        "NODE:transparent_cheat");
    run_cmd->add_flag("--event-log", run.event_log, "Write events.jsonl");
    run_cmd->add_flag("--csv", run.csv, "Write payments.csv");
    run_cmd->add_option("--repeat", run.repeat, "Run N copies with seeds seed, seed+1, ...");
    run_cmd->add_option("--threads", run.threads, "Threads for --repeat (default: OpenMP default)");

    TopoArgs topo;
    auto* topo_cmd = app.add_subcommand("topo", "Generate a topology file");
    topo_cmd->add_option("kind", topo.kind, "line | ring | grid | erdos_renyi | barabasi_albert")->required();
    topo_cmd->add_option("--n", topo.n, "Node count (line, ring, erdos_renyi, barabasi_albert)");
    topo_cmd->add_option("--width", topo.width, "Grid width");
    topo_cmd->add_option("--height", topo.height, "Grid height");
    topo_cmd->add_option("--p", topo.p, "Edge probability (erdos_renyi)");
    topo_cmd->add_option("--m", topo.m, "Edges per new node (barabasi_albert)");
    topo_cmd->add_option("--seed", topo.seed, "Generator seed");
    topo_cmd->add_option("--capacity", topo.capacity, "Constant capacity per direction (msat)");
    topo_cmd->add_option("--capacity-range", topo.capacity_range, "Uniform capacity range LO HI (msat)")->expected(2);
    topo_cmd->add_option("--unidirectional", topo.unidirectional, "Fraction of unidirectional channels");
    topo_cmd->add_option("--out", topo.out, "Output file")->required();

    OracleArgs oracle;
    auto* oracle_cmd = app.add_subcommand("oracle", "Shortest and cheapest feasible paths");
    oracle_cmd->add_option("--topology", oracle.topology, "Topology JSON file")->required();
    oracle_cmd->add_option("--payer", oracle.payer, "Payer node")->required();
    oracle_cmd->add_option("--payee", oracle.payee, "Payee node")->required();
    oracle_cmd->add_option("--amount", oracle.amount, "Amount (msat)")->required();
    oracle_cmd->add_option("--fee", oracle.fee, "Same fee at every node (msat)");
    oracle_cmd->add_option("--fees", oracle.fees, "Per-node fees (msat), one per node")->delimiter(',');

    std::vector<std::string> report_files;
    std::string report_out;
    auto* report_cmd = app.add_subcommand("report", "Concatenate per-payment rows of several metrics files");
    report_cmd->add_option("files", report_files, "metrics.json files")->required();
    report_cmd->add_option("--out", report_out, "Output CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*run_cmd) return cmd_run(run);
        if (*topo_cmd) return cmd_topo(topo);
        if (*oracle_cmd) return cmd_oracle(oracle);
        if (*report_cmd) return cmd_report(report_files, report_out);
    } catch (const ConfigError& e) {
        spdlog::error("{}", e.what());
        return kExitConfig;
    } catch (const InvariantViolation& e) {
        spdlog::error("{}", e.what());
        return kExitInvariant;
    }
    return kExitConfig;
}
