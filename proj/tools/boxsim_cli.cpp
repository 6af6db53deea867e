// Command line front end. Four subcommands cover the whole workflow:
//
//   boxsim run <scenario.json> --out <dir>   execute and write the log
//   boxsim audit <log.jsonl>                 check the log, write the report
//   boxsim replay <log.jsonl>                re-execute and compare bit-exact
//   boxsim report <audit.json> [--csv f]     render tables and CSV series
//
// Exit codes: 0 clean, 1 invariant failure or replay divergence, 2 clean but
// the opponent defaulted, 3 unusable input. All randomness comes from the
// scenario, so identical invocations produce identical artifacts.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "boxsim/run.hpp"
#include "boxsim/verifier.hpp"

namespace fs = std::filesystem;
using boxsim::AuditFinding;
using boxsim::AuditReport;
using boxsim::json;
using boxsim::ReplayResult;
using boxsim::RunLog;
using boxsim::Scenario;

namespace {

constexpr int kExitClean = 0;
constexpr int kExitInvariant = 1;
constexpr int kExitDefaulted = 2;
constexpr int kExitInput = 3;

json load_json_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw boxsim::LogError("cannot open " + path);
    json j;
    try {
        j = json::parse(is);
    } catch (const json::parse_error& ex) {
        throw boxsim::LogError(path + ": " + ex.what());
    }
    return j;
}

Scenario load_scenario(const std::string& path) {
    json j = load_json_file(path);
    try {
        return boxsim::scenario_from_json(j);
    } catch (const json::exception& ex) {
        throw boxsim::ScenarioError(path + ": " + ex.what());
    }
}

std::string stem_of(const std::string& path) {
    fs::path p(path);
    std::string s = p.stem().string();
    // strip a second extension, so run.log.jsonl becomes run.log -> run
    return s.empty() ? "run" : s;
}

void print_findings(const std::vector<AuditFinding>& fs, const char* label,
                    std::size_t limit) {
    if (fs.empty()) return;
    std::cout << label << ":\n";
    for (std::size_t i = 0; i < fs.size() && i < limit; ++i)
        std::cout << "  tick " << std::setw(6) << fs[i].tick << "  " << std::setw(22)
                  << std::left << fs[i].check << std::right << "  " << fs[i].detail
                  << "\n";
    if (fs.size() > limit)
        std::cout << "  ... " << (fs.size() - limit) << " more\n";
}

int cmd_run(const std::string& scenario_path, const std::string& out_dir,
            std::uint64_t seed, bool seed_set, std::uint64_t override_cap,
            bool negative_control) {
    Scenario sc = load_scenario(scenario_path);
    if (seed_set) sc.adversary.seed = seed;
    if (override_cap) sc.capacity_override = override_cap;
    if (negative_control) sc.negative_control = true;
    boxsim::validate_scenario(sc);

    RunLog log = boxsim::run_scenario(sc);
    fs::create_directories(out_dir);
    std::string path = (fs::path(out_dir) / (stem_of(scenario_path) + ".jsonl")).string();
    boxsim::write_log_file(path, log);

    std::cout << "engine " << sc.engine << ", " << log.ticks.size() << " ticks, "
              << log.enumerated.size() << " enumerated, " << log.satisfied.size()
              << " requirements satisfied\n";
    std::cout << "log written to " << path << "\n";
    if (log.violated) {
        std::cout << "run stopped by a capacity violation at tick "
                  << log.ticks.back().tick << "\n";
        return kExitInvariant;
    }
    return kExitClean;
}

int cmd_audit(const std::string& log_path, std::string out_path) {
    RunLog log = boxsim::read_log_file(log_path);
    AuditReport rep = boxsim::audit_run(log);
    if (out_path.empty()) {
        fs::path p(log_path);
        p.replace_extension();
        out_path = p.string() + ".audit.json";
    }
    {
        std::ofstream os(out_path);
        if (!os) throw boxsim::LogError("cannot open " + out_path + " for writing");
        os << boxsim::audit_report_json(rep).dump(2) << "\n";
    }
    std::cout << "classification: " << rep.classification << "\n";
    std::cout << "findings: " << rep.findings.size() << ", notices: "
              << rep.notices.size() << "\n";
    if (rep.violation) std::cout << "the run ended in a capacity violation\n";
    print_findings(rep.findings, "findings", 10);
    std::cout << "report written to " << out_path << "\n";
    if (!rep.clean()) return kExitInvariant;
    if (rep.classification == "defaulted") {
        std::cout << "opponent defaulted; limit checks were skipped\n";
        return kExitDefaulted;
    }
    return kExitClean;
}

int cmd_replay(const std::string& log_path) {
    RunLog log = boxsim::read_log_file(log_path);
    ReplayResult res = boxsim::replay_run(log);
    if (res.ok) {
        std::cout << "replay matched " << log.ticks.size() << " ticks bit-exactly\n";
        return kExitClean;
    }
    std::cout << "replay diverged: " << res.detail << "\n";
    if (res.first_divergence)
        std::cout << "first divergent tick: " << res.first_divergence << "\n";
    return kExitInvariant;
}

void print_max_sizes(const json& stats) {
    if (!stats.contains("max_sizes") || stats["max_sizes"].empty()) return;
    bool tree = stats.value("engine", "mp") == "tree";
    std::cout << "\npeak occupancy per cell (bound in brackets):\n";
    std::cout << "  " << std::setw(6) << (tree ? "node" : "side") << std::setw(4) << "k"
              << std::setw(12) << "K" << std::setw(12) << "L" << std::setw(16) << "G"
              << "\n";
    for (const auto& row : stats["max_sizes"]) {
        std::ostringstream kk, ll, gg;
        kk << row["K"].get<std::uint64_t>() << " [" << row["K_bound"].get<std::uint64_t>()
           << "]";
        ll << row["L"].get<std::uint64_t>() << " [" << row["L_bound"].get<std::uint64_t>()
           << "]";
        gg << row["G"].get<std::uint64_t>() << " ["
           << row["G_bound"].get<std::string>() << "]";
        int key = tree ? row["node"].get<int>() : row["side"].get<int>();
        std::cout << "  " << std::setw(6) << key << std::setw(4)
                  << row["k"].get<std::uint64_t>() << std::setw(12) << kk.str()
                  << std::setw(12) << ll.str() << std::setw(16) << gg.str() << "\n";
    }
}

void write_series_csv(const json& stats, const std::string& csv_path) {
    std::ofstream os(csv_path);
    if (!os) throw boxsim::LogError("cannot open " + csv_path + " for writing");
    bool tree = stats.value("engine", "mp") == "tree";
    os << "tick," << (tree ? "node" : "side") << ",k,K,L,G\n";
    for (const auto& entry : stats.at("series")) {
        std::uint64_t tick = entry.at("tick").get<std::uint64_t>();
        for (const auto& row : entry.at("rows")) {
            int key = tree ? row.at("node").get<int>() : row.at("side").get<int>();
            os << tick << "," << key << "," << row.at("k").get<std::uint64_t>() << ","
               << row.at("K").get<std::uint64_t>() << ","
               << row.at("L").get<std::uint64_t>() << ","
               << row.at("G").get<std::uint64_t>() << "\n";
        }
    }
}

int cmd_report(const std::string& audit_path, const std::string& csv_path) {
    json j = load_json_file(audit_path);
    AuditReport rep;
    try {
        rep = boxsim::audit_report_from_json(j);
    } catch (const json::exception& ex) {
        throw boxsim::LogError(audit_path + ": " + ex.what());
    }

    const json& st = rep.stats;
    std::cout << "classification: " << rep.classification
              << (rep.violation ? " (capacity violation)" : "") << "\n";
    std::cout << "ticks: " << st.value("ticks", std::uint64_t{0});
    if (st.contains("stages"))
        std::cout << ", stages: " << st["stages"].get<std::uint64_t>();
    std::cout << ", followers: " << st.value("followers", std::uint64_t{0})
              << ", enumerated: "
              << (st.contains("final_E") ? st["final_E"].size() : 0) << "\n";

    print_findings(rep.findings, "findings", 20);
    print_findings(rep.notices, "notices", 20);
    print_max_sizes(st);

    if (!rep.reduction.empty()) {
        std::uint64_t in = 0, notin = 0, exceeded = 0, excepted = 0, mism = 0;
        for (const auto& a : rep.reduction) {
            if (a.verdict == "in-E") ++in;
            else if (a.verdict == "not-in-E") ++notin;
            else ++exceeded;
            if (a.excepted) ++excepted;
            if (a.verdict != "exceeded-horizon" && !a.matches_final) ++mism;
        }
        std::cout << "\nreduction answers: " << in << " in, " << notin << " out, "
                  << exceeded << " open at the horizon (" << excepted
                  << " within the exception set), " << mism << " mismatches\n";
    }
    if (st.contains("true_path_names") && !st["true_path_names"].empty()) {
        std::cout << "true path at horizon:";
        for (const auto& n : st["true_path_names"])
            std::cout << " " << n.get<std::string>();
        std::cout << "\n";
    }
    if (!csv_path.empty()) {
        write_series_csv(st, csv_path);
        std::cout << "occupancy series written to " << csv_path << "\n";
    }
    return kExitClean;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"deterministic box-promotion construction runner and auditor"};
    app.require_subcommand(1);

    std::string scenario_path, out_dir = ".", log_path, audit_path;
    std::string audit_out, csv_path;
    std::uint64_t seed = 0, override_cap = 0;
    bool negative_control = false;

    CLI::App* run = app.add_subcommand("run", "execute a scenario and write its log");
    run->add_option("scenario", scenario_path, "scenario JSON file")->required();
    run->add_option("--out", out_dir, "output directory for the log");
    CLI::Option* seed_opt =
        run->add_option("--seed", seed, "override the adversary seed");
    run->add_option("--override-capacity", override_cap,
                    "shrink every digit bound to this value (negative control)");
    run->add_flag("--negative-control", negative_control,
                  "acknowledge that the capacity override breaks the construction");

    CLI::App* audit = app.add_subcommand("audit", "check a log and write the report");
    audit->add_option("log", log_path, "run log (JSON Lines)")->required();
    audit->add_option("--out", audit_out, "report path (default: <log>.audit.json)");

    CLI::App* replay = app.add_subcommand("replay", "re-execute a log's scenario");
    replay->add_option("log", log_path, "run log (JSON Lines)")->required();

    CLI::App* report = app.add_subcommand("report", "render an audit report");
    report->add_option("audit", audit_path, "audit report JSON")->required();
    report->add_option("--csv", csv_path, "write the occupancy series as CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitClean : kExitInput;
    }

    try {
        if (run->parsed()) {
            if (override_cap && !negative_control) {
                std::cerr << "--override-capacity requires --negative-control\n";
                return kExitInput;
            }
            return cmd_run(scenario_path, out_dir, seed, seed_opt->count() > 0,
                           override_cap, negative_control);
        }
        if (audit->parsed()) return cmd_audit(log_path, audit_out);
        if (replay->parsed()) return cmd_replay(log_path);
        if (report->parsed()) return cmd_report(audit_path, csv_path);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitInput;
    }
    return kExitInput;
}
