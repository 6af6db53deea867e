#pragma once

// Finite tree of strategies. Negative (trace-guarding) nodes branch on the
// two outcomes "infinitely many expansionary stages" / "finitely many"; the
// infinite outcome is the stronger one. Positive (diagonalization) nodes have
// a single child. A node's name is its path word: 'i' and 'f' label the two
// edges out of a negative node, 'p' labels the edge out of a positive node.
//
// Requirements are assigned top-down from a priority list: each node takes
// the strongest requirement not yet assigned on its path, except that a node
// with no 'i' in its name has no expansionary ancestor to lean on and must
// take a negative requirement.

#include <algorithm>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "boxsim/ints.hpp"

namespace boxsim {

enum class ReqKind { negative, positive };

struct Requirement {
    ReqKind kind;
    std::uint64_t e = 0;  // functional index
    std::uint64_t c = 0;  // trace index (negative requirements only)

    bool operator==(const Requirement& o) const = default;
};

// Textual forms "N:e,c" and "P:e".
inline Requirement parse_requirement(const std::string& s) {
    auto bad = [&] { return std::invalid_argument("bad requirement: " + s); };
    if (s.size() < 3 || s[1] != ':') throw bad();
    if (s[0] == 'P') {
        for (std::size_t i = 2; i < s.size(); ++i)
            if (!isdigit(static_cast<unsigned char>(s[i]))) throw bad();
        return Requirement{ReqKind::positive, std::stoull(s.substr(2)), 0};
    }
    if (s[0] != 'N') throw bad();
    auto comma = s.find(',', 2);
    if (comma == std::string::npos || comma == 2 || comma + 1 == s.size()) throw bad();
    for (std::size_t i = 2; i < s.size(); ++i)
        if (i != comma && !isdigit(static_cast<unsigned char>(s[i]))) throw bad();
    return Requirement{ReqKind::negative, std::stoull(s.substr(2, comma - 2)),
                       std::stoull(s.substr(comma + 1))};
}

inline std::string requirement_str(const Requirement& r) {
    if (r.kind == ReqKind::positive) return "P:" + std::to_string(r.e);
    return "N:" + std::to_string(r.e) + "," + std::to_string(r.c);
}

// A list long enough that every path of the given depth can be filled:
// N:0,c  P:0  N:1,c  P:1  ...
inline std::vector<Requirement> default_requirements(std::uint64_t depth, std::uint64_t c) {
    std::vector<Requirement> out;
    for (std::uint64_t e = 0; e <= depth; ++e) {
        out.push_back(Requirement{ReqKind::negative, e, c});
        out.push_back(Requirement{ReqKind::positive, e, 0});
    }
    return out;
}

struct TreeNode {
    std::string name;
    int parent = -1;
    int req = -1;       // index into the requirement list
    ReqKind kind = ReqKind::negative;
    std::uint64_t e = 0;
    std::uint64_t c = 0;
    int child_inf = -1;   // negative nodes
    int child_fin = -1;   // negative nodes
    int child_only = -1;  // positive nodes

    std::uint64_t length() const { return name.size(); }
};

class StrategyTree {
public:
    StrategyTree(std::uint64_t depth, std::vector<Requirement> reqs)
        : depth_(depth), reqs_(std::move(reqs)) {
        if (reqs_.empty()) throw std::invalid_argument("empty requirement list");
        for (std::size_t i = 0; i < reqs_.size(); ++i)
            for (std::size_t j = i + 1; j < reqs_.size(); ++j)
                if (reqs_[i] == reqs_[j])
                    throw std::invalid_argument("duplicate requirement in list");
        build("", -1, {});
        // Build is breadth-last recursive; renumber into BFS order so that
        // node index order is also priority-friendly top-down order.
        reorder_bfs();
    }

    static StrategyTree with_defaults(std::uint64_t depth, std::uint64_t c) {
        return StrategyTree(depth, default_requirements(depth, c));
    }

    std::uint64_t depth() const { return depth_; }
    const std::vector<Requirement>& requirements() const { return reqs_; }
    int root() const { return 0; }
    std::size_t size() const { return nodes_.size(); }
    const TreeNode& node(int i) const { return nodes_.at(i); }
    bool is_leaf(int i) const { return nodes_.at(i).length() == depth_; }

    int find(const std::string& name) const {
        auto it = by_name_.find(name);
        if (it == by_name_.end())
            throw std::invalid_argument("no node named '" + name + "'");
        return it->second;
    }

    // Both outcomes of a negative node, or the single child of a positive
    // node. Returns -1 at leaves.
    int child(int i, char edge) const {
        const TreeNode& n = nodes_.at(i);
        switch (edge) {
            case 'i': return n.child_inf;
            case 'f': return n.child_fin;
            case 'p': return n.child_only;
            default: throw std::invalid_argument("bad edge label");
        }
    }

    // Name geometry. All relations are on path words of the same tree.
    static bool is_prefix(const std::string& a, const std::string& b) {
        return a.size() <= b.size() && std::equal(a.begin(), a.end(), b.begin());
    }
    // a lies strictly right of b: they diverge at a negative node where b
    // takes the 'i' edge and a takes the 'f' edge.
    static bool right_of(const std::string& a, const std::string& b) {
        std::size_t n = std::min(a.size(), b.size());
        for (std::size_t p = 0; p < n; ++p)
            if (a[p] != b[p]) return a[p] == 'f' && b[p] == 'i';
        return false;
    }
    // a is strictly weaker than b: below b or right of b.
    static bool weaker_node(const std::string& a, const std::string& b) {
        return (is_prefix(b, a) && a != b) || right_of(a, b);
    }

    // Chain of negative ancestors whose 'i' edge lies on sigma's path. These
    // are exactly the nodes a follower appointed at sigma answers to.
    std::vector<int> inf_chain(int sigma) const {
        const std::string& nm = nodes_.at(sigma).name;
        std::vector<int> out;
        for (std::size_t p = 0; p < nm.size(); ++p)
            if (nm[p] == 'i') out.push_back(find(nm.substr(0, p)));
        return out;
    }

    // Positive nodes of length k whose longest expansionary ancestor is rho.
    std::vector<int> theta(int rho, std::uint64_t k) const {
        const std::string& rn = nodes_.at(rho).name;
        std::vector<int> out;
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            const TreeNode& n = nodes_[i];
            if (n.kind != ReqKind::positive || n.length() != k) continue;
            auto last_i = n.name.rfind('i');
            if (last_i == std::string::npos) continue;
            if (n.name.compare(0, last_i, rn) == 0 && rn.size() == last_i)
                out.push_back(static_cast<int>(i));
        }
        std::sort(out.begin(), out.end(), [&](int x, int y) {
            return nodes_[x].name < nodes_[y].name;
        });
        return out;
    }

    // Rank of sigma within theta(rho, |sigma|), used for private slots.
    std::uint64_t theta_rank(int rho, int sigma) const {
        auto th = theta(rho, nodes_.at(sigma).length());
        auto it = std::find(th.begin(), th.end(), sigma);
        if (it == th.end())
            throw std::invalid_argument("node is not anchored at that ancestor");
        return static_cast<std::uint64_t>(it - th.begin());
    }

    // Negative nodes in index (BFS) order, optionally restricted to one e.
    std::vector<int> negative_nodes() const {
        std::vector<int> out;
        for (std::size_t i = 0; i < nodes_.size(); ++i)
            if (nodes_[i].kind == ReqKind::negative) out.push_back(static_cast<int>(i));
        return out;
    }
    std::vector<int> negative_nodes_for(std::uint64_t e) const {
        std::vector<int> out;
        for (int i : negative_nodes())
            if (nodes_[i].e == e) out.push_back(i);
        return out;
    }

private:
    void build(const std::string& name, int parent, std::vector<int> used) {
        bool forced_negative = name.find('i') == std::string::npos;
        int pick = -1;
        for (std::size_t r = 0; r < reqs_.size(); ++r) {
            if (std::find(used.begin(), used.end(), static_cast<int>(r)) != used.end())
                continue;
            if (forced_negative && reqs_[r].kind != ReqKind::negative) continue;
            pick = static_cast<int>(r);
            break;
        }
        if (pick < 0)
            throw std::invalid_argument("requirement list too short for depth " +
                                        std::to_string(depth_));
        TreeNode n;
        n.name = name;
        n.parent = parent;
        n.req = pick;
        n.kind = reqs_[pick].kind;
        n.e = reqs_[pick].e;
        n.c = reqs_[pick].c;
        int idx = static_cast<int>(nodes_.size());
        nodes_.push_back(n);
        if (name.size() == depth_) return;  // leaf
        used.push_back(pick);
        if (n.kind == ReqKind::negative) {
            nodes_[idx].child_inf = static_cast<int>(nodes_.size());
            build(name + 'i', idx, used);
            nodes_[idx].child_fin = static_cast<int>(nodes_.size());
            build(name + 'f', idx, used);
        } else {
            nodes_[idx].child_only = static_cast<int>(nodes_.size());
            build(name + 'p', idx, used);
        }
    }

    void reorder_bfs() {
        std::vector<int> order;  // old indices in BFS order
        order.push_back(0);
        for (std::size_t q = 0; q < order.size(); ++q) {
            const TreeNode& n = nodes_[order[q]];
            for (int ch : {n.child_inf, n.child_fin, n.child_only})
                if (ch >= 0) order.push_back(ch);
        }
        std::vector<int> newpos(nodes_.size());
        for (std::size_t i = 0; i < order.size(); ++i) newpos[order[i]] = static_cast<int>(i);
        std::vector<TreeNode> next(nodes_.size());
        for (std::size_t i = 0; i < order.size(); ++i) {
            TreeNode n = nodes_[order[i]];
            if (n.parent >= 0) n.parent = newpos[n.parent];
            if (n.child_inf >= 0) n.child_inf = newpos[n.child_inf];
            if (n.child_fin >= 0) n.child_fin = newpos[n.child_fin];
            if (n.child_only >= 0) n.child_only = newpos[n.child_only];
            next[i] = std::move(n);
        }
        nodes_ = std::move(next);
        by_name_.clear();
        for (std::size_t i = 0; i < nodes_.size(); ++i)
            by_name_[nodes_[i].name] = static_cast<int>(i);
    }

    std::uint64_t depth_;
    std::vector<Requirement> reqs_;
    std::vector<TreeNode> nodes_;
    std::map<std::string, int> by_name_;
};

}  // namespace boxsim
