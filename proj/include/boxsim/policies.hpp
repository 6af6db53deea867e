#pragma once

// Opponents for the two-sided engine. A policy sees the whole public engine
// state after a tick and plans the events for the next tick. All policies
// are deterministic given the scenario (the random one draws from a seeded
// generator), so a run can be reproduced from its scenario alone.
//
// Shared conventions: axiom uses grow two per tick while enumerated
// elements grow at most one per tick, so a policy that wants to feed a
// permission can always find a fresh element below the recorded use. Event
// order within a tick is halts, then enumerations, then posts; posts are
// planned from the pre-tick state, so a policy that enumerates on a side
// reposts that side's whole marker table, knowing the kills it causes.

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "boxsim/engine_mp.hpp"
#include "boxsim/scenario.hpp"

namespace boxsim {

class PolicyMP {
public:
    virtual ~PolicyMP() = default;
    virtual std::vector<AdvEvent> plan(const MpCore& core) = 0;
};

namespace detail {

inline std::uint64_t param(const AdversarySpec& spec, const std::string& key,
                           std::uint64_t dflt) {
    auto it = spec.params.find(key);
    return it == spec.params.end() ? dflt : it->second;
}

inline bool pending_cover(const TraceState& trace, const Interval& iv,
                          std::uint64_t value) {
    for (const auto& ax : trace.axioms())
        if (!ax.accepted && !ax.dead && ax.value == value && ax.region.contains(iv))
            return true;
    return false;
}

inline std::optional<std::uint64_t> oldest_pending(const TraceState& trace) {
    if (trace.pending().empty()) return std::nullopt;
    return trace.pending().front();
}

// Kill the axioms crowding the oldest delayed axiom on this side by
// enumerating a fresh element below their least use.
inline bool plan_unblock(const MpCore& core, int side, std::vector<AdvEvent>& out) {
    auto id = oldest_pending(core.trace(side));
    if (!id) return false;
    auto mbu = core.trace(side).min_blocking_use(*id);
    if (!mbu) return false;  // queue clears by itself at the tick boundary
    std::uint64_t elem = core.oracle(side).least_absent();
    if (elem >= *mbu) return false;
    out.push_back(AdvEvent::enumerate(side, elem));
    return true;
}

// Feed a permission to the strongest realised follower still waiting for
// one. Returns the side enumerated on, or -1.
inline int plan_grant(const MpCore& core, std::vector<AdvEvent>& out) {
    for (const auto& f : core.followers()) {
        if (!f.alive() || !core.realised(f)) continue;
        if (core.permitted(f)) return -1;  // will promote without help
        int i = f.top;
        auto v = f.side[i].v_last;
        if (!v) return -1;
        std::uint64_t elem = core.oracle(i).least_absent();
        if (elem >= *v) return -1;
        out.push_back(AdvEvent::enumerate(i, elem));
        return i;
    }
    return -1;
}

inline void plan_posts(const MpCore& core, int side, bool repost_all,
                       std::uint64_t use, std::vector<AdvEvent>& out) {
    for (const auto& [iv, piece] : core.psi(side).all_pieces()) {
        if (!repost_all) {
            if (core.trace(side).covers_value(iv, piece.value)) continue;
            if (pending_cover(core.trace(side), iv, piece.value)) continue;
        }
        out.push_back(
            AdvEvent::axiom(static_cast<std::uint64_t>(side), 0, iv, piece.value, use));
    }
}

inline void plan_halts(const MpCore& core, Tick upcoming, std::uint64_t delay,
                       std::vector<AdvEvent>& out) {
    for (const auto& f : core.followers())
        if (f.alive() && !core.pcf().value(f.e, f.id).has_value() &&
            upcoming - f.id >= delay)
            out.push_back(AdvEvent::halt(f.e, f.id, 0));
}

inline std::uint64_t use_for(Tick upcoming) { return 1000 + 2 * upcoming; }

}  // namespace detail

// Cooperates fully: realises followers at once, keeps the traces current,
// clears crowded slots, and always feeds the next permission.
class PermissivePolicyMP : public PolicyMP {
public:
    std::vector<AdvEvent> plan(const MpCore& core) override {
        Tick up = core.clock().tick + 1;
        std::vector<AdvEvent> ev;
        detail::plan_halts(core, up, 1, ev);
        bool bumped[2] = {false, false};
        for (int i = 0; i < 2; ++i) bumped[i] = detail::plan_unblock(core, i, ev);
        if (!bumped[0] && !bumped[1]) {
            int g = detail::plan_grant(core, ev);
            if (g >= 0) bumped[g] = true;
        }
        for (int i = 0; i < 2; ++i)
            detail::plan_posts(core, i, bumped[i], detail::use_for(up), ev);
        return ev;
    }
};

// Keeps the books but never enumerates anything: delayed axioms stay
// delayed, permissions never arrive, and runs freeze with E empty.
class StonewallPolicyMP : public PolicyMP {
public:
    std::vector<AdvEvent> plan(const MpCore& core) override {
        Tick up = core.clock().tick + 1;
        std::vector<AdvEvent> ev;
        detail::plan_halts(core, up, 1, ev);
        for (int i = 0; i < 2; ++i)
            detail::plan_posts(core, i, false, detail::use_for(up), ev);
        return ev;
    }
};

// Lets followers pile up before releasing them. Realisation is delayed past
// the first stage after appointment, so the free permission window closes
// and fresh followers land in sibling blocks instead of being promoted.
// Once the run freezes on a crowded slot, one release enumeration clears it
// and the cycle restarts. Under canonical capacities the sibling digits
// always stay within bounds; a capacity override is exhausted within a few
// appointments.
class SeeSawPolicyMP : public PolicyMP {
public:
    explicit SeeSawPolicyMP(const AdversarySpec& spec)
        : realise_delay_(detail::param(spec, "realise_delay", 2)),
          release_after_(detail::param(spec, "release_after", 8)) {}

    std::vector<AdvEvent> plan(const MpCore& core) override {
        Tick up = core.clock().tick + 1;
        std::vector<AdvEvent> ev;
        detail::plan_halts(core, up, realise_delay_, ev);
        bool bumped[2] = {false, false};
        if (up - core.last_stage() >= release_after_ &&
            up - last_release_ >= release_after_) {
            int side = pick_frozen_side(core);
            if (side >= 0 && detail::plan_unblock(core, side, ev)) {
                bumped[side] = true;
                last_release_ = up;
            }
        }
        for (int i = 0; i < 2; ++i)
            detail::plan_posts(core, i, bumped[i], detail::use_for(up), ev);
        return ev;
    }

private:
    static int pick_frozen_side(const MpCore& core) {
        int best = -1;
        Tick oldest = 0;
        for (int i = 0; i < 2; ++i) {
            auto id = detail::oldest_pending(core.trace(i));
            if (!id) continue;
            Tick posted = core.trace(i).axioms()[*id].posted;
            if (best < 0 || posted < oldest) {
                best = i;
                oldest = posted;
            }
        }
        return best;
    }

    std::uint64_t realise_delay_;
    std::uint64_t release_after_;
    Tick last_release_ = 0;
};

// Draws one word of randomness per tick and mixes grants, slot clears and
// harmless noise, with a forced clear or grant once the gap since the last
// enumeration reaches max_gap. Fully reproducible from the seed.
class RandomPolicyMP : public PolicyMP {
public:
    explicit RandomPolicyMP(const AdversarySpec& spec)
        : seed_(spec.seed), rng_(spec.seed),
          max_gap_(detail::param(spec, "max_gap", 8)) {}

    std::vector<AdvEvent> plan(const MpCore& core) override {
        Tick up = core.clock().tick + 1;
        std::uint64_t r = rng_();
        std::vector<AdvEvent> ev;
        for (const auto& f : core.followers()) {
            std::uint64_t delay = 1 + (f.id * 2654435761ULL + seed_) % 3;
            if (f.alive() && !core.pcf().value(f.e, f.id).has_value() &&
                up - f.id >= delay)
                ev.push_back(AdvEvent::halt(f.e, f.id, 0));
        }
        bool bumped[2] = {false, false};
        bool starved = up - last_enum_ >= max_gap_;
        bool have_pending = detail::oldest_pending(core.trace(0)).has_value() ||
                            detail::oldest_pending(core.trace(1)).has_value();
        if (have_pending && (starved || r % 4 == 0)) {
            for (int i = 0; i < 2 && !bumped[i]; ++i)
                if (detail::plan_unblock(core, i, ev)) {
                    bumped[i] = true;
                    last_enum_ = up;
                }
        } else if (starved || r % 4 == 1) {
            int g = detail::plan_grant(core, ev);
            if (g >= 0) {
                bumped[g] = true;
                last_enum_ = up;
            }
        } else if (r % 16 == 7) {
            ev.push_back(AdvEvent::enumerate(r % 2, (1ULL << 40) + noise_++));
        }
        for (int i = 0; i < 2; ++i)
            detail::plan_posts(core, i, bumped[i], detail::use_for(up), ev);
        return ev;
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 rng_;
    std::uint64_t max_gap_;
    Tick last_enum_ = 0;
    std::uint64_t noise_ = 0;
};

// Replays a fixed event list and does nothing else.
class ScriptedPolicyMP : public PolicyMP {
public:
    explicit ScriptedPolicyMP(const AdversarySpec& spec) : script_(spec.script) {}

    std::vector<AdvEvent> plan(const MpCore& core) override {
        Tick up = core.clock().tick + 1;
        std::vector<AdvEvent> ev;
        while (next_ < script_.size() && script_[next_].tick == up)
            ev.push_back(script_[next_++].event);
        return ev;
    }

private:
    std::vector<ScriptedEvent> script_;
    std::size_t next_ = 0;
};

inline std::unique_ptr<PolicyMP> make_policy_mp(const AdversarySpec& spec) {
    if (spec.name == "permissive") return std::make_unique<PermissivePolicyMP>();
    if (spec.name == "stonewall") return std::make_unique<StonewallPolicyMP>();
    if (spec.name == "seesaw") return std::make_unique<SeeSawPolicyMP>(spec);
    if (spec.name == "random") return std::make_unique<RandomPolicyMP>(spec);
    if (spec.name == "scripted") return std::make_unique<ScriptedPolicyMP>(spec);
    throw ScenarioError("unknown adversary \"" + spec.name + "\"");
}

}  // namespace boxsim
