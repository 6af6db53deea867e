#pragma once

// Runs a scenario to completion and carries the result around as a log:
// the scenario itself, one record per tick, and a closing summary. On disk
// a log is JSON Lines with a header line first and the summary last; every
// field is an integer, string or list, so byte-exact replay comparison is
// meaningful. A log embeds its scenario, so the file alone reproduces the
// run.

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "boxsim/engine_mp.hpp"
#include "boxsim/engine_tree.hpp"
#include "boxsim/policies.hpp"
#include "boxsim/policies_tree.hpp"
#include "boxsim/scenario.hpp"
#include "boxsim/stage_log.hpp"

namespace boxsim {

struct LogError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunLog {
    Scenario scenario;
    std::vector<TickRecord> ticks;
    bool violated = false;
    std::vector<std::uint64_t> enumerated;
    std::vector<std::uint64_t> satisfied;
    std::uint64_t explicit_entries = 0;  // final allocation counter
};

inline std::vector<Requirement> scenario_requirements(const Scenario& sc) {
    std::vector<Requirement> reqs;
    for (const auto& r : sc.requirements) reqs.push_back(parse_requirement(r));
    return reqs;
}

inline RunLog run_scenario(const Scenario& sc) {
    validate_scenario(sc);
    RunLog out;
    out.scenario = sc;
    auto finish = [&out](const auto& core) {
        out.violated = core.violated();
        out.enumerated.assign(core.enumerated().begin(), core.enumerated().end());
        out.satisfied.assign(core.satisfied().begin(), core.satisfied().end());
        out.explicit_entries = core.counters().explicit_z_entries;
    };
    if (sc.engine == "mp") {
        MpCore core(MpConfig{sc.c, sc.e_max, sc.active, sc.capacity_override});
        auto pol = make_policy_mp(sc.adversary);
        for (Tick t = 0; t < sc.horizon && !core.violated(); ++t)
            out.ticks.push_back(core.step(pol->plan(core)));
        finish(core);
    } else {
        TreeCore core(
            TreeConfig{sc.depth, sc.c, scenario_requirements(sc), sc.capacity_override});
        auto pol = make_policy_tree(sc.adversary);
        for (Tick t = 0; t < sc.horizon && !core.violated(); ++t)
            out.ticks.push_back(core.step(pol->plan(core)));
        finish(core);
    }
    return out;
}

inline json summary_json(const RunLog& run) {
    return json{{"kind", "summary"},
                {"ticks", run.ticks.size()},
                {"violated", run.violated},
                {"enumerated", run.enumerated},
                {"satisfied", run.satisfied},
                {"explicit_entries", run.explicit_entries}};
}

inline void write_log(std::ostream& os, const RunLog& run) {
    json hdr{{"kind", "header"},
             {"schema", kLogVersion},
             {"engine", run.scenario.engine},
             {"scenario", scenario_json(run.scenario)}};
    os << hdr.dump() << "\n";
    for (const auto& r : run.ticks) os << tick_record_json(r).dump() << "\n";
    os << summary_json(run).dump() << "\n";
}

inline void write_log_file(const std::string& path, const RunLog& run) {
    std::ofstream os(path);
    if (!os) throw LogError("cannot open " + path + " for writing");
    write_log(os, run);
}

inline RunLog read_log(std::istream& is) {
    RunLog out;
    std::string line;
    std::size_t lineno = 0;
    bool saw_header = false, saw_summary = false;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& ex) {
            throw LogError("line " + std::to_string(lineno) + ": not JSON: " + ex.what());
        }
        try {
            std::string kind = j.value("kind", "tick");
            if (kind == "header") {
                if (saw_header) throw LogError("line " + std::to_string(lineno) +
                                               ": duplicate header");
                if (j.at("schema").get<int>() != kLogVersion)
                    throw LogError("unsupported log schema " +
                                   std::to_string(j.at("schema").get<int>()));
                out.scenario = scenario_from_json(j.at("scenario"));
                saw_header = true;
            } else if (kind == "summary") {
                out.violated = j.at("violated").get<bool>();
                out.enumerated = j.at("enumerated").get<std::vector<std::uint64_t>>();
                out.satisfied = j.at("satisfied").get<std::vector<std::uint64_t>>();
                out.explicit_entries = j.value("explicit_entries", std::uint64_t{0});
                saw_summary = true;
            } else {
                if (!saw_header)
                    throw LogError("line " + std::to_string(lineno) +
                                   ": record before header");
                if (saw_summary)
                    throw LogError("line " + std::to_string(lineno) +
                                   ": record after summary");
                out.ticks.push_back(tick_record_from_json(j));
            }
        } catch (const json::exception& ex) {
            throw LogError("line " + std::to_string(lineno) + ": " + ex.what());
        } catch (const ScenarioError& ex) {
            throw LogError("line " + std::to_string(lineno) + ": " + ex.what());
        }
    }
    if (!saw_header) throw LogError("log has no header line");
    if (!saw_summary) throw LogError("log has no summary line");
    return out;
}

inline RunLog read_log_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw LogError("cannot open " + path);
    return read_log(is);
}

// Re-executes the embedded scenario and compares record by record against
// the log, serialized form to serialized form.
struct ReplayResult {
    bool ok = true;
    Tick first_divergence = 0;  // tick number, or 0 when the shapes differ
    std::string detail;
};

inline ReplayResult replay_run(const RunLog& log) {
    RunLog fresh = run_scenario(log.scenario);
    ReplayResult res;
    if (fresh.ticks.size() != log.ticks.size()) {
        res.ok = false;
        res.detail = "tick count " + std::to_string(fresh.ticks.size()) + " vs " +
                     std::to_string(log.ticks.size());
        return res;
    }
    for (std::size_t i = 0; i < log.ticks.size(); ++i) {
        std::string a = tick_record_json(log.ticks[i]).dump();
        std::string b = tick_record_json(fresh.ticks[i]).dump();
        if (a != b) {
            res.ok = false;
            res.first_divergence = log.ticks[i].tick;
            res.detail = "record mismatch at tick " + std::to_string(res.first_divergence);
            return res;
        }
    }
    if (summary_json(fresh) != summary_json(log)) {
        res.ok = false;
        res.detail = "summary mismatch";
    }
    return res;
}

}  // namespace boxsim
