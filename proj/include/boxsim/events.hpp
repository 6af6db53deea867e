#pragma once

// Adversary events. One tick may carry any number of events; they are applied
// at the start of the tick in list order, before the construction moves.
//
// JSON forms (regions always use decimal strings):
//   {"kind":"enumerate", "oracle":i, "elem":n}
//   {"kind":"axiom", "trace":[e,c], "region":{"lo":"..","hi":".."},
//    "value":v, "use":u}                          (two-sided: trace=[i,0])
//   {"kind":"halt", "e":e, "x":x, "v":v}

#include <cstdint>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "boxsim/ints.hpp"

namespace boxsim {

using nlohmann::json;

inline json interval_json(const Interval& iv) {
    return json{{"lo", big_str(iv.lo)}, {"hi", big_str(iv.hi)}};
}

inline Interval interval_from_json(const json& j) {
    if (!j.is_object() || !j.contains("lo") || !j.contains("hi"))
        throw std::invalid_argument("region must be {lo, hi}");
    return Interval{big_parse(j.at("lo").get<std::string>()),
                    big_parse(j.at("hi").get<std::string>())};
}

struct AdvEvent {
    enum class Kind { enumerate_set, post_axiom, declare_halt };
    Kind kind = Kind::enumerate_set;

    // enumerate_set
    std::uint64_t oracle = 0;  // side for the two-sided engine, functional for the tree
    std::uint64_t elem = 0;

    // post_axiom
    std::uint64_t trace_e = 0;  // side / functional
    std::uint64_t trace_c = 0;  // trace index (tree only)
    Interval region;
    std::uint64_t value = 0;
    std::uint64_t use = 0;

    // declare_halt
    std::uint64_t e = 0;
    std::uint64_t x = 0;
    std::uint64_t v = 0;

    static AdvEvent enumerate(std::uint64_t oracle, std::uint64_t elem) {
        AdvEvent ev;
        ev.kind = Kind::enumerate_set;
        ev.oracle = oracle;
        ev.elem = elem;
        return ev;
    }
    static AdvEvent axiom(std::uint64_t trace_e, std::uint64_t trace_c, Interval region,
                          std::uint64_t value, std::uint64_t use) {
        AdvEvent ev;
        ev.kind = Kind::post_axiom;
        ev.trace_e = trace_e;
        ev.trace_c = trace_c;
        ev.region = region;
        ev.value = value;
        ev.use = use;
        return ev;
    }
    static AdvEvent halt(std::uint64_t e, std::uint64_t x, std::uint64_t v) {
        AdvEvent ev;
        ev.kind = Kind::declare_halt;
        ev.e = e;
        ev.x = x;
        ev.v = v;
        return ev;
    }

    bool operator==(const AdvEvent& o) const = default;
};

inline json event_json(const AdvEvent& ev) {
    switch (ev.kind) {
        case AdvEvent::Kind::enumerate_set:
            return json{{"kind", "enumerate"}, {"oracle", ev.oracle}, {"elem", ev.elem}};
        case AdvEvent::Kind::post_axiom:
            return json{{"kind", "axiom"},
                        {"trace", json::array({ev.trace_e, ev.trace_c})},
                        {"region", interval_json(ev.region)},
                        {"value", ev.value},
                        {"use", ev.use}};
        case AdvEvent::Kind::declare_halt:
            return json{{"kind", "halt"}, {"e", ev.e}, {"x", ev.x}, {"v", ev.v}};
    }
    throw std::logic_error("unreachable");
}

inline AdvEvent event_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "enumerate")
        return AdvEvent::enumerate(j.at("oracle").get<std::uint64_t>(),
                                   j.at("elem").get<std::uint64_t>());
    if (kind == "axiom") {
        const auto& tr = j.at("trace");
        if (!tr.is_array() || tr.size() != 2)
            throw std::invalid_argument("axiom trace must be [e,c]");
        return AdvEvent::axiom(tr[0].get<std::uint64_t>(), tr[1].get<std::uint64_t>(),
                               interval_from_json(j.at("region")),
                               j.at("value").get<std::uint64_t>(),
                               j.at("use").get<std::uint64_t>());
    }
    if (kind == "halt")
        return AdvEvent::halt(j.at("e").get<std::uint64_t>(), j.at("x").get<std::uint64_t>(),
                              j.at("v").get<std::uint64_t>());
    throw std::invalid_argument("unknown event kind: " + kind);
}

}  // namespace boxsim
