#pragma once

// Address layout for one functional of the tree construction. Every negative
// node guarding that functional owns a column of the address space; a column
// is the union of its per-level intervals I(tau, k), k >= |tau|. Levels are
// laid out level-major - all level-0 intervals first, then level 1, and so on,
// columns in tree (BFS) order within a level - so that
//   * each I(tau, k) is one contiguous half-open interval,
//   * the slot bound h is nondecreasing across the whole space.
//
// Each I(tau, k) begins with 2^k reserved private slots followed by the root
// box of size a(k)^(k+1). Private slots are handed to the positive nodes
// anchored at tau in name order, which is a stable injection because at most
// 2^k positive nodes of length k anchor at any tau.
//
// The slot bound is h(z) = max(k, 1) on level k. The level-0 intervals exist
// for completeness but the construction never assigns boxes there (a box
// assignment at level 0 would need a follower answering to a node below the
// root while its top level is already 1, which the level-shape invariant
// rules out), so the positive floor never bites.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "boxsim/carve.hpp"
#include "boxsim/ints.hpp"
#include "boxsim/tree.hpp"

namespace boxsim {

class LayoutTree {
public:
    LayoutTree(const StrategyTree* tree, std::uint64_t e)
        : tree_(tree), e_(e), k_max_(tree->depth()) {
        columns_ = tree_->negative_nodes_for(e_);
        if (columns_.empty())
            throw std::invalid_argument("no negative node guards functional " +
                                        std::to_string(e_));
        Big at = 0;
        for (std::uint64_t k = 0; k <= k_max_; ++k) {
            for (int tau : columns_) {
                if (tree_->node(tau).length() > k) continue;
                start_[{tau, k}] = at;
                at += level_size(k);
            }
        }
        end_ = at;
    }

    std::uint64_t e() const { return e_; }
    std::uint64_t k_max() const { return k_max_; }
    Big domain_end() const { return end_; }
    const std::vector<int>& columns() const { return columns_; }

    // |I(tau, k)| = 2^k + a(k)^(k+1): the private block plus the root box.
    static Big level_size(std::uint64_t k) {
        return (Big(1) << k) + pow_big(cap_tree(k), k + 1);
    }

    Interval interval_of(int tau, std::uint64_t k) const {
        auto it = start_.find({tau, k});
        if (it == start_.end())
            throw std::invalid_argument("no interval for that node and level");
        return Interval{it->second, it->second + level_size(k)};
    }

    // Slot bound: max(k, 1) on level k, nondecreasing in z.
    std::uint64_t h_value(const Big& z) const {
        auto [tau, k] = locate(z);
        (void)tau;
        return k < 1 ? 1 : k;
    }

    // Which column the address belongs to.
    int node_of(const Big& z) const { return locate(z).first; }

    Interval carve(int tau, std::uint64_t k, const Address& alpha) const {
        Interval ik = interval_of(tau, k);
        return carve_in_root(ik.lo + (Big(1) << k), cap_tree(k), k, alpha);
    }

    // Private slot for a positive node sigma of length k anchored at tau.
    Big private_slot(int tau, std::uint64_t k, int sigma) const {
        if (tree_->node(sigma).length() != k)
            throw std::invalid_argument("private slot level must equal the node length");
        std::uint64_t rank = tree_->theta_rank(tau, sigma);
        Interval ik = interval_of(tau, k);
        if (Big(rank) >= (Big(1) << k))
            throw std::invalid_argument("private block exhausted");  // unreachable
        return ik.lo + rank;
    }

    // The whole column of tau, as a finite list of intervals.
    std::vector<Interval> column_of(int tau) const {
        std::vector<Interval> out;
        for (std::uint64_t k = tree_->node(tau).length(); k <= k_max_; ++k)
            out.push_back(interval_of(tau, k));
        return out;
    }

private:
    std::pair<int, std::uint64_t> locate(const Big& z) const {
        // start_ is ordered by (node, level); do a linear scan over the per-
        // level table instead, it is tiny.
        for (const auto& [key, lo] : start_) {
            if (z >= lo && z < lo + level_size(key.second)) return key;
        }
        throw std::invalid_argument("address outside the laid-out domain: " + big_str(z));
    }

    const StrategyTree* tree_;
    std::uint64_t e_;
    std::uint64_t k_max_;
    std::vector<int> columns_;
    std::map<std::pair<int, std::uint64_t>, Big> start_;
    Big end_;
};

}  // namespace boxsim
