#pragma once

// Run log records. A run serializes to JSONL: one header object, one object
// per tick, one summary object. Records are forward-complete: the auditor
// reconstructs the whole state of the construction from them without engine
// access. All numbers are integers; addresses that may exceed 64 bits travel
// as decimal strings inside region objects.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "boxsim/carve.hpp"
#include "boxsim/events.hpp"
#include "boxsim/ints.hpp"

namespace boxsim {

constexpr int kLogVersion = 1;

// Outcome of one posted axiom, aligned with the tick's axiom events in order.
struct AxiomResult {
    std::uint64_t id = 0;
    bool accepted = false;
};

// An axiom leaving the delay queue.
struct AdmitRec {
    std::uint64_t trace_e = 0;
    std::uint64_t trace_c = 0;
    std::uint64_t id = 0;

    bool operator==(const AdmitRec&) const = default;
};

// One block assignment performed by an action.
struct BoxAssignRec {
    int side = -1;          // two-sided engine
    int node = -1;          // tree engine: the guarded ancestor
    bool priv = false;
    std::uint64_t k = 0;
    Address alpha;          // non-private
    Address beta;           // stem chosen by the bookkeeping rule
    std::uint64_t m = 0;    // chosen digit
    Interval region;        // resolved block

    bool operator==(const BoxAssignRec&) const = default;
};

struct ActionRec {
    // "none", "appoint", "promote1", "promote2", "promote3", "violation"
    std::string kind = "none";
    std::uint64_t x = 0;    // follower receiving attention / appointed
    std::uint64_t e = 0;    // owning requirement
    int node = -1;          // tree: acting node (sigma for appoint, tau for promote)
    int side = -1;          // two-sided: promoted side (promote3), dropped side (promote2)
    int new_top = -1;       // top after the action (mp: 0/1; tree: node id)
    std::vector<BoxAssignRec> assigns;
    // violation details
    std::uint64_t viol_k = 0;
    Address viol_beta;
    std::vector<std::uint64_t> viol_blocked;
    std::uint64_t viol_bound = 0;

    bool operator==(const ActionRec&) const = default;
};

struct SetSizeRec {
    int side = -1;   // mp
    int node = -1;   // tree
    std::uint64_t k = 0;
    std::uint64_t K = 0, L = 0, G = 0;

    bool operator==(const SetSizeRec&) const = default;
};

struct TickRecord {
    Tick tick = 0;
    std::vector<AdvEvent> events;
    std::vector<AxiomResult> axiom_results;  // aligned with axiom events
    std::vector<AdmitRec> admitted;          // delay-queue admissions this tick
    bool is_stage = false;                   // two-sided engine
    std::vector<int> walk;                   // tree: accessible nodes, root first
    std::vector<int> tau_stages;             // tree: subset of walk that were expansionary
    ActionRec action;
    std::vector<std::uint64_t> cancelled;
    std::optional<std::uint64_t> enumerated;
    std::vector<std::uint64_t> satisfied;
    std::vector<SetSizeRec> sizes;

    bool operator==(const TickRecord&) const = default;
};

inline json box_assign_json(const BoxAssignRec& b) {
    json j{{"k", b.k}, {"priv", b.priv}, {"region", interval_json(b.region)}};
    if (b.side >= 0) j["side"] = b.side;
    if (b.node >= 0) j["node"] = b.node;
    if (!b.priv) {
        j["alpha"] = b.alpha;
        j["beta"] = b.beta;
        j["m"] = b.m;
    }
    return j;
}

inline BoxAssignRec box_assign_from_json(const json& j) {
    BoxAssignRec b;
    b.k = j.at("k").get<std::uint64_t>();
    b.priv = j.at("priv").get<bool>();
    b.region = interval_from_json(j.at("region"));
    if (j.contains("side")) b.side = j.at("side").get<int>();
    if (j.contains("node")) b.node = j.at("node").get<int>();
    if (!b.priv) {
        b.alpha = j.at("alpha").get<Address>();
        b.beta = j.at("beta").get<Address>();
        b.m = j.at("m").get<std::uint64_t>();
    }
    return b;
}

inline json action_json(const ActionRec& a) {
    json j{{"kind", a.kind}};
    if (a.kind == "none") return j;
    j["x"] = a.x;
    j["e"] = a.e;
    if (a.node >= 0) j["node"] = a.node;
    if (a.side >= 0) j["side"] = a.side;
    if (a.new_top >= 0) j["new_top"] = a.new_top;
    if (!a.assigns.empty()) {
        json arr = json::array();
        for (const auto& b : a.assigns) arr.push_back(box_assign_json(b));
        j["assigns"] = arr;
    }
    if (a.kind == "violation") {
        j["viol_k"] = a.viol_k;
        j["viol_beta"] = a.viol_beta;
        j["viol_blocked"] = a.viol_blocked;
        j["viol_bound"] = a.viol_bound;
    }
    return j;
}

inline ActionRec action_from_json(const json& j) {
    ActionRec a;
    a.kind = j.at("kind").get<std::string>();
    if (a.kind == "none") return a;
    a.x = j.at("x").get<std::uint64_t>();
    a.e = j.at("e").get<std::uint64_t>();
    if (j.contains("node")) a.node = j.at("node").get<int>();
    if (j.contains("side")) a.side = j.at("side").get<int>();
    if (j.contains("new_top")) a.new_top = j.at("new_top").get<int>();
    if (j.contains("assigns"))
        for (const auto& b : j.at("assigns")) a.assigns.push_back(box_assign_from_json(b));
    if (a.kind == "violation") {
        a.viol_k = j.at("viol_k").get<std::uint64_t>();
        a.viol_beta = j.at("viol_beta").get<Address>();
        a.viol_blocked = j.at("viol_blocked").get<std::vector<std::uint64_t>>();
        a.viol_bound = j.at("viol_bound").get<std::uint64_t>();
    }
    return a;
}

inline json tick_record_json(const TickRecord& r) {
    json j{{"type", "tick"}, {"tick", r.tick}};
    json evs = json::array();
    for (const auto& ev : r.events) evs.push_back(event_json(ev));
    j["events"] = evs;
    json axr = json::array();
    for (const auto& ar : r.axiom_results)
        axr.push_back(json{{"id", ar.id}, {"accepted", ar.accepted}});
    j["axiom_results"] = axr;
    json adm = json::array();
    for (const auto& ad : r.admitted)
        adm.push_back(json::array({ad.trace_e, ad.trace_c, ad.id}));
    j["admitted"] = adm;
    j["is_stage"] = r.is_stage;
    j["walk"] = r.walk;
    j["tau_stages"] = r.tau_stages;
    j["action"] = action_json(r.action);
    j["cancelled"] = r.cancelled;
    if (r.enumerated) j["enumerated"] = *r.enumerated;
    j["satisfied"] = r.satisfied;
    json sz = json::array();
    for (const auto& s : r.sizes) {
        json row{{"k", s.k}, {"K", s.K}, {"L", s.L}, {"G", s.G}};
        if (s.side >= 0) row["side"] = s.side;
        if (s.node >= 0) row["node"] = s.node;
        sz.push_back(row);
    }
    j["sizes"] = sz;
    return j;
}

inline TickRecord tick_record_from_json(const json& j) {
    TickRecord r;
    r.tick = j.at("tick").get<Tick>();
    for (const auto& ev : j.at("events")) r.events.push_back(event_from_json(ev));
    for (const auto& ar : j.at("axiom_results"))
        r.axiom_results.push_back(
            AxiomResult{ar.at("id").get<std::uint64_t>(), ar.at("accepted").get<bool>()});
    for (const auto& ad : j.at("admitted"))
        r.admitted.push_back(AdmitRec{ad[0].get<std::uint64_t>(), ad[1].get<std::uint64_t>(),
                                      ad[2].get<std::uint64_t>()});
    r.is_stage = j.at("is_stage").get<bool>();
    r.walk = j.at("walk").get<std::vector<int>>();
    r.tau_stages = j.at("tau_stages").get<std::vector<int>>();
    r.action = action_from_json(j.at("action"));
    r.cancelled = j.at("cancelled").get<std::vector<std::uint64_t>>();
    if (j.contains("enumerated")) r.enumerated = j.at("enumerated").get<std::uint64_t>();
    r.satisfied = j.at("satisfied").get<std::vector<std::uint64_t>>();
    for (const auto& row : j.at("sizes")) {
        SetSizeRec s;
        s.k = row.at("k").get<std::uint64_t>();
        s.K = row.at("K").get<std::uint64_t>();
        s.L = row.at("L").get<std::uint64_t>();
        s.G = row.at("G").get<std::uint64_t>();
        if (row.contains("side")) s.side = row.at("side").get<int>();
        if (row.contains("node")) s.node = row.at("node").get<int>();
        r.sizes.push_back(s);
    }
    return r;
}

}  // namespace boxsim
