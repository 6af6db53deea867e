#pragma once

// Opponents for the tree engine, mirroring the two-sided set. The moving
// parts change shape: instead of two sides there is one guarded set per
// functional and one marker table per negative node, and an enumeration
// into a functional disturbs every column that guards it. The same event
// conventions apply: halts first, then enumerations, then posts, with uses
// growing faster than elements so permissions can always be fed.

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include "boxsim/engine_tree.hpp"
#include "boxsim/policies.hpp"

namespace boxsim {

class PolicyTree {
public:
    virtual ~PolicyTree() = default;
    virtual std::vector<AdvEvent> plan(const TreeCore& core) = 0;
};

namespace detail {

// Kill the axioms crowding the oldest delayed axiom among the columns that
// guard functional e, by enumerating a fresh element below their least use.
inline bool plan_unblock_tree(const TreeCore& core, std::uint64_t e,
                              std::vector<AdvEvent>& out) {
    int target = -1;
    Tick oldest = 0;
    for (int tau : core.tree().negative_nodes_for(e)) {
        auto id = oldest_pending(core.trace(tau));
        if (!id) continue;
        Tick posted = core.trace(tau).axioms()[*id].posted;
        if (target < 0 || posted < oldest) {
            target = tau;
            oldest = posted;
        }
    }
    if (target < 0) return false;
    auto id = oldest_pending(core.trace(target));
    auto mbu = core.trace(target).min_blocking_use(*id);
    if (!mbu) return false;  // clears by itself at the tick boundary
    std::uint64_t elem = core.oracle(e).least_absent();
    if (elem >= *mbu) return false;
    out.push_back(AdvEvent::enumerate(e, elem));
    return true;
}

// Feed a permission to the strongest realised follower still waiting for
// one; the element goes into the functional guarded by the follower's top
// node. Returns the functional enumerated into, if any.
inline std::optional<std::uint64_t> plan_grant_tree(const TreeCore& core,
                                                    std::vector<AdvEvent>& out) {
    for (const auto& f : core.followers()) {
        if (!f.alive() || !core.realised(f)) continue;
        if (core.permitted(f)) return std::nullopt;  // promotes without help
        std::uint64_t e = core.tree().node(f.top).e;
        auto v = f.per.at(f.top).v_last;
        if (!v) return std::nullopt;
        std::uint64_t elem = core.oracle(e).least_absent();
        if (elem >= *v) return std::nullopt;
        out.push_back(AdvEvent::enumerate(e, elem));
        return e;
    }
    return std::nullopt;
}

inline void plan_posts_tree(const TreeCore& core, int tau, bool repost_all,
                            std::uint64_t use, std::vector<AdvEvent>& out) {
    const TreeNode& n = core.tree().node(tau);
    for (const auto& [iv, piece] : core.psi(tau).all_pieces()) {
        if (!repost_all) {
            if (core.trace(tau).covers_value(iv, piece.value)) continue;
            if (pending_cover(core.trace(tau), iv, piece.value)) continue;
        }
        out.push_back(AdvEvent::axiom(n.e, n.c, iv, piece.value, use));
    }
}

inline void plan_all_posts_tree(const TreeCore& core,
                                const std::set<std::uint64_t>& bumped,
                                std::uint64_t use, std::vector<AdvEvent>& out) {
    for (int tau : core.tree().negative_nodes())
        plan_posts_tree(core, tau, bumped.count(core.tree().node(tau).e) > 0, use, out);
}

inline void plan_halts_tree(const TreeCore& core, Tick upcoming, std::uint64_t delay,
                            std::vector<AdvEvent>& out) {
    for (const auto& f : core.followers()) {
        std::uint64_t e = core.tree().node(f.sigma).e;
        if (f.alive() && !core.pcf().value(e, f.id).has_value() &&
            upcoming - f.id >= delay)
            out.push_back(AdvEvent::halt(e, f.id, 0));
    }
}

}  // namespace detail

// Cooperates fully: realises followers at once, keeps every column current,
// clears crowded slots, and always feeds the next permission.
class PermissivePolicyTree : public PolicyTree {
public:
    std::vector<AdvEvent> plan(const TreeCore& core) override {
        Tick up = core.clock().tick + 1;
        std::vector<AdvEvent> ev;
        detail::plan_halts_tree(core, up, 1, ev);
        std::set<std::uint64_t> bumped;
        for (std::uint64_t e : core.functionals())
            if (detail::plan_unblock_tree(core, e, ev)) bumped.insert(e);
        if (bumped.empty()) {
            auto g = detail::plan_grant_tree(core, ev);
            if (g) bumped.insert(*g);
        }
        detail::plan_all_posts_tree(core, bumped, detail::use_for(up), ev);
        return ev;
    }
};

// Keeps the books but never enumerates: permissions never arrive after the
// free window closes, and delayed axioms stay delayed.
class StonewallPolicyTree : public PolicyTree {
public:
    std::vector<AdvEvent> plan(const TreeCore& core) override {
        Tick up = core.clock().tick + 1;
        std::vector<AdvEvent> ev;
        detail::plan_halts_tree(core, up, 1, ev);
        detail::plan_all_posts_tree(core, {}, detail::use_for(up), ev);
        return ev;
    }
};

// Parks each follower by holding its realisation past the first
// expansionary visit, letting siblings pile up in a column, then releases
// the crowded slot once the column has been quiet long enough.
class SeeSawPolicyTree : public PolicyTree {
public:
    explicit SeeSawPolicyTree(const AdversarySpec& spec)
        : realise_delay_(detail::param(spec, "realise_delay", 2)),
          release_after_(detail::param(spec, "release_after", 8)) {}

    std::vector<AdvEvent> plan(const TreeCore& core) override {
        Tick up = core.clock().tick + 1;
        std::vector<AdvEvent> ev;
        detail::plan_halts_tree(core, up, realise_delay_, ev);
        std::set<std::uint64_t> bumped;
        if (up - last_release_ >= release_after_) {
            int tau = pick_frozen_node(core);
            if (tau >= 0 && up - core.last_tau_stage(tau) >= release_after_) {
                std::uint64_t e = core.tree().node(tau).e;
                if (detail::plan_unblock_tree(core, e, ev)) {
                    bumped.insert(e);
                    last_release_ = up;
                }
            }
        }
        detail::plan_all_posts_tree(core, bumped, detail::use_for(up), ev);
        return ev;
    }

private:
    static int pick_frozen_node(const TreeCore& core) {
        int best = -1;
        Tick oldest = 0;
        for (int tau : core.tree().negative_nodes()) {
            auto id = detail::oldest_pending(core.trace(tau));
            if (!id) continue;
            Tick posted = core.trace(tau).axioms()[*id].posted;
            if (best < 0 || posted < oldest) {
                best = tau;
                oldest = posted;
            }
        }
        return best;
    }

    std::uint64_t realise_delay_;
    std::uint64_t release_after_;
    Tick last_release_ = 0;
};

// One word of randomness per tick, mixed into grants, slot clears and
// noise, with a forced move once the quiet gap reaches max_gap.
class RandomPolicyTree : public PolicyTree {
public:
    explicit RandomPolicyTree(const AdversarySpec& spec)
        : seed_(spec.seed), rng_(spec.seed),
          max_gap_(detail::param(spec, "max_gap", 8)) {}

    std::vector<AdvEvent> plan(const TreeCore& core) override {
        Tick up = core.clock().tick + 1;
        std::uint64_t r = rng_();
        std::vector<AdvEvent> ev;
        for (const auto& f : core.followers()) {
            std::uint64_t e = core.tree().node(f.sigma).e;
            std::uint64_t delay = 1 + (f.id * 2654435761ULL + seed_) % 3;
            if (f.alive() && !core.pcf().value(e, f.id).has_value() &&
                up - f.id >= delay)
                ev.push_back(AdvEvent::halt(e, f.id, 0));
        }
        std::set<std::uint64_t> bumped;
        bool starved = up - last_enum_ >= max_gap_;
        bool have_pending = false;
        for (int tau : core.tree().negative_nodes())
            if (detail::oldest_pending(core.trace(tau))) have_pending = true;
        if (have_pending && (starved || r % 4 == 0)) {
            for (std::uint64_t e : core.functionals()) {
                if (detail::plan_unblock_tree(core, e, ev)) {
                    bumped.insert(e);
                    last_enum_ = up;
                    break;
                }
            }
        } else if (starved || r % 4 == 1) {
            auto g = detail::plan_grant_tree(core, ev);
            if (g) {
                bumped.insert(*g);
                last_enum_ = up;
            }
        } else if (r % 16 == 7) {
            // Far above every use in play: kills nothing, grants nothing.
            auto it = core.functionals().begin();
            std::advance(it, r % core.functionals().size());
            ev.push_back(AdvEvent::enumerate(*it, (1ULL << 40) + noise_++));
        }
        detail::plan_all_posts_tree(core, bumped, detail::use_for(up), ev);
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
class ScriptedPolicyTree : public PolicyTree {
public:
    explicit ScriptedPolicyTree(const AdversarySpec& spec) : script_(spec.script) {}

    std::vector<AdvEvent> plan(const TreeCore& core) override {
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

inline std::unique_ptr<PolicyTree> make_policy_tree(const AdversarySpec& spec) {
    if (spec.name == "permissive") return std::make_unique<PermissivePolicyTree>();
    if (spec.name == "stonewall") return std::make_unique<StonewallPolicyTree>();
    if (spec.name == "seesaw") return std::make_unique<SeeSawPolicyTree>(spec);
    if (spec.name == "random") return std::make_unique<RandomPolicyTree>(spec);
    if (spec.name == "scripted") return std::make_unique<ScriptedPolicyTree>(spec);
    throw ScenarioError("unknown adversary \"" + spec.name + "\"");
}

}  // namespace boxsim
