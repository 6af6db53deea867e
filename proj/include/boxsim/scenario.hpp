#pragma once

// A scenario is everything needed to reproduce a run: engine choice and
// shape, the opponent and its seed, the horizon, and the reporting knobs.
// Scenarios travel as JSON and are embedded verbatim in the log header, so a
// log file alone is enough to replay its run.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "boxsim/events.hpp"
#include "boxsim/tree.hpp"

namespace boxsim {

using json = nlohmann::json;

struct ScenarioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ScriptedEvent {
    Tick tick = 0;
    AdvEvent event;

    bool operator==(const ScriptedEvent&) const = default;
};

struct AdversarySpec {
    std::string name = "permissive";  // permissive|stonewall|seesaw|random|scripted
    std::uint64_t seed = 0;
    std::map<std::string, std::uint64_t> params;
    std::vector<ScriptedEvent> script;  // scripted only, sorted by tick

    bool operator==(const AdversarySpec&) const = default;
};

struct Scenario {
    std::string engine = "mp";  // mp|tree
    // Two-sided engine shape.
    std::uint64_t c = 1;
    std::uint64_t e_max = 1;
    std::vector<std::uint64_t> active;  // empty: all of [c, e_max]
    // Tree engine shape.
    std::uint64_t depth = 2;
    std::vector<std::string> requirements;  // empty: alternating default list
    Tick horizon = 1000;
    AdversarySpec adversary;
    std::uint64_t capacity_override = 0;  // 0: canonical capacities
    bool negative_control = false;        // must be set to use the override
    // Reporting knobs: the tail window for limit behaviour and the patience
    // threshold separating a compliant opponent from a defaulting one.
    std::uint64_t limit_percent = 20;
    std::uint64_t compliance_gap = 100;

    bool operator==(const Scenario&) const = default;
};

inline void validate_scenario(const Scenario& sc) {
    if (sc.engine != "mp" && sc.engine != "tree")
        throw ScenarioError("engine must be \"mp\" or \"tree\"");
    if (sc.horizon == 0) throw ScenarioError("horizon must be positive");
    if (sc.engine == "mp") {
        if (sc.e_max < sc.c) throw ScenarioError("e_max must be at least c");
        if (sc.e_max - sc.c > 8)
            throw ScenarioError("e_max - c larger than 8 is not supported");
        for (auto e : sc.active)
            if (e < sc.c || e > sc.e_max)
                throw ScenarioError("active entry " + std::to_string(e) +
                                    " outside [c, e_max]");
    } else {
        if (sc.depth == 0 || sc.depth > 8)
            throw ScenarioError("depth must be in [1, 8]");
        if (!sc.requirements.empty()) {
            std::vector<Requirement> reqs;
            for (const auto& r : sc.requirements) reqs.push_back(parse_requirement(r));
            StrategyTree probe(sc.depth, reqs);  // throws on a bad list
        }
    }
    const auto& a = sc.adversary;
    if (a.name != "permissive" && a.name != "stonewall" && a.name != "seesaw" &&
        a.name != "random" && a.name != "scripted")
        throw ScenarioError("unknown adversary \"" + a.name + "\"");
    if (a.name == "scripted") {
        for (std::size_t i = 1; i < a.script.size(); ++i)
            if (a.script[i].tick < a.script[i - 1].tick)
                throw ScenarioError("script events out of order at index " +
                                    std::to_string(i));
        for (const auto& se : a.script)
            if (se.tick == 0) throw ScenarioError("script events start at tick 1");
    } else if (!a.script.empty()) {
        throw ScenarioError("script given for a non-scripted adversary");
    }
    if (sc.capacity_override && !sc.negative_control)
        throw ScenarioError("capacity_override is only valid in a negative control");
    if (sc.limit_percent == 0 || sc.limit_percent > 100)
        throw ScenarioError("limit_percent must be in [1, 100]");
    if (sc.compliance_gap == 0)
        throw ScenarioError("compliance_gap must be positive");
}

inline json scenario_json(const Scenario& sc) {
    json a{{"name", sc.adversary.name}, {"seed", sc.adversary.seed}};
    if (!sc.adversary.params.empty()) a["params"] = sc.adversary.params;
    if (!sc.adversary.script.empty()) {
        json arr = json::array();
        for (const auto& se : sc.adversary.script)
            arr.push_back(json{{"tick", se.tick}, {"event", event_json(se.event)}});
        a["script"] = arr;
    }
    json j{{"engine", sc.engine}, {"horizon", sc.horizon}, {"adversary", a}};
    if (sc.engine == "mp") {
        j["c"] = sc.c;
        j["e_max"] = sc.e_max;
        if (!sc.active.empty()) j["active"] = sc.active;
    } else {
        j["depth"] = sc.depth;
        if (!sc.requirements.empty()) j["requirements"] = sc.requirements;
    }
    if (sc.capacity_override) j["capacity_override"] = sc.capacity_override;
    if (sc.negative_control) j["negative_control"] = true;
    j["limit_percent"] = sc.limit_percent;
    j["compliance_gap"] = sc.compliance_gap;
    return j;
}

inline Scenario scenario_from_json(const json& j) {
    if (!j.is_object()) throw ScenarioError("scenario must be a JSON object");
    Scenario sc;
    try {
        sc.engine = j.at("engine").get<std::string>();
        sc.horizon = j.at("horizon").get<Tick>();
        if (sc.engine == "mp") {
            sc.c = j.at("c").get<std::uint64_t>();
            sc.e_max = j.at("e_max").get<std::uint64_t>();
            if (j.contains("active"))
                sc.active = j.at("active").get<std::vector<std::uint64_t>>();
        } else {
            sc.depth = j.at("depth").get<std::uint64_t>();
            if (j.contains("requirements"))
                sc.requirements = j.at("requirements").get<std::vector<std::string>>();
        }
        const json& a = j.at("adversary");
        sc.adversary.name = a.at("name").get<std::string>();
        if (a.contains("seed")) sc.adversary.seed = a.at("seed").get<std::uint64_t>();
        if (a.contains("params"))
            sc.adversary.params =
                a.at("params").get<std::map<std::string, std::uint64_t>>();
        if (a.contains("script"))
            for (const auto& e : a.at("script")) {
                ScriptedEvent se;
                se.tick = e.at("tick").get<Tick>();
                se.event = event_from_json(e.at("event"));
                sc.adversary.script.push_back(se);
            }
        if (j.contains("capacity_override"))
            sc.capacity_override = j.at("capacity_override").get<std::uint64_t>();
        if (j.contains("negative_control"))
            sc.negative_control = j.at("negative_control").get<bool>();
        if (j.contains("limit_percent"))
            sc.limit_percent = j.at("limit_percent").get<std::uint64_t>();
        if (j.contains("compliance_gap"))
            sc.compliance_gap = j.at("compliance_gap").get<std::uint64_t>();
    } catch (const json::exception& ex) {
        throw ScenarioError(std::string("malformed scenario: ") + ex.what());
    }
    validate_scenario(sc);
    return sc;
}

}  // namespace boxsim
