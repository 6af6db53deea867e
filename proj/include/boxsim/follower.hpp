#pragma once

// Follower records shared by the two engines. A follower is appointed at a
// positive requirement (or positive node) and carries, per side it still
// answers to, a current level, a marker block, and the tick of that block's
// assignment. The block is either the side's reserved private slot or a box
// address in the carving of its level.

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "boxsim/carve.hpp"
#include "boxsim/ints.hpp"

namespace boxsim {

struct BoxRef {
    bool priv = false;
    std::uint64_t k = 0;
    Address alpha;  // empty and unused for private slots
};

// Per-side (or per-node) follower state.
struct SideState {
    std::uint64_t k = 0;
    BoxRef box;
    Tick t = 0;  // tick of the current block assignment; also the traced value
    // Computation recorded at the end of the side's most recent stage.
    std::optional<std::uint64_t> v_last;
    Tick v_stage = 0;
};

enum class FollowerStatus { alive, cancelled, enumerated };

struct FollowerMP {
    std::uint64_t id = 0;  // appointment tick
    std::uint64_t e = 0;   // owning requirement
    bool has_side1 = true;
    int top = 1;
    SideState side[2];
    FollowerStatus status = FollowerStatus::alive;
    Tick status_tick = 0;
    std::uint64_t promotions = 0;

    bool alive() const { return status == FollowerStatus::alive; }
    bool has_side(int i) const { return i == 0 || has_side1; }
};

struct FollowerTree {
    std::uint64_t id = 0;
    int sigma = -1;             // appointing positive node
    std::vector<int> chain;     // remaining guarded ancestors, shortest first
    int top = -1;               // current top node
    std::map<int, SideState> per;  // keyed by node, for every node in chain
    FollowerStatus status = FollowerStatus::alive;
    Tick status_tick = 0;
    std::uint64_t promotions = 0;

    bool alive() const { return status == FollowerStatus::alive; }
    bool answers_to(int tau) const {
        for (int n : chain)
            if (n == tau) return true;
        return false;
    }
};

}  // namespace boxsim
