#pragma once

// Approximation substrate shared by both engines:
//   OracleSet  - a monotone enumerated set with stamped elements.
//   TraceState - an axiom log approximating a trace of a partial function.
//                An axiom (region, value, use) says "value is traced on every
//                z in region while the governing oracle is unchanged below
//                use". Admission enforces the per-point slot bound h(z): an
//                axiom that would push some point past its bound waits in a
//                FIFO delay queue and is retried after every oracle change
//                and at every tick boundary.
//   PsiState   - the marker function, an interval map with default 0.
//   PcfState   - declared halting values, one per (functional, argument).
//
// All region operations are symbolic on half-open intervals; nothing here is
// proportional to the width of a region.

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "boxsim/ints.hpp"

namespace boxsim {

// Global tick plus an intra-tick sequence number. Every state change in a
// run is stamped with the sequence, which makes "before/after" questions
// exact even within one tick.
struct Clock {
    Tick tick = 0;
    std::uint64_t seq = 0;
    std::uint64_t next_seq() { return ++seq; }
};

struct OracleElement {
    std::uint64_t elem;
    Tick tick;
    std::uint64_t seq;
};

class OracleSet {
public:
    bool contains(std::uint64_t elem) const { return members_.count(elem) != 0; }

    // Returns false if the element was already present.
    bool add(std::uint64_t elem, Clock& clk) {
        if (contains(elem)) return false;
        members_.insert(elem);
        log_.push_back(OracleElement{elem, clk.tick, clk.next_seq()});
        return true;
    }

    // Did any element below `use` enter in a tick within (after, upto]?
    bool changed_below(std::uint64_t use, Tick after, Tick upto) const {
        for (const auto& el : log_)
            if (el.elem < use && el.tick > after && el.tick <= upto) return true;
        return false;
    }

    // Restriction equality below `use` between the end of two ticks.
    bool same_below(std::uint64_t use, Tick a, Tick b) const {
        Tick lo = std::min(a, b), hi = std::max(a, b);
        return !changed_below(use, lo, hi);
    }

    std::uint64_t least_absent() const {
        std::uint64_t v = 0;
        while (members_.count(v)) ++v;
        return v;
    }

    const std::vector<OracleElement>& log() const { return log_; }
    std::size_t size() const { return members_.size(); }

private:
    std::set<std::uint64_t> members_;
    std::vector<OracleElement> log_;
};

struct Axiom {
    std::uint64_t id = 0;
    Interval region;
    std::uint64_t value = 0;
    std::uint64_t use = 0;
    Tick posted = 0;
    bool accepted = false;
    Tick accept_tick = 0;
    std::uint64_t accept_seq = 0;
    bool dead = false;
    Tick dead_tick = 0;

    bool alive() const { return accepted && !dead; }
};

class TraceState {
public:
    // h_table: the laid-out domain as (interval, bound) rows in ascending
    // order. Rows may leave gaps (a tree column skips the stretches owned by
    // sibling columns); addresses in a gap are simply outside the domain.
    TraceState(std::string name, std::vector<std::pair<Interval, std::uint64_t>> h_table,
               AllocCounters* ctr)
        : name_(std::move(name)), h_(std::move(h_table)), ctr_(ctr) {
        for (std::size_t i = 1; i < h_.size(); ++i)
            if (h_[i].first.lo < h_[i - 1].first.hi)
                throw std::invalid_argument("slot table rows must ascend");
    }

    const std::string& name() const { return name_; }

    Interval domain() const {
        if (h_.empty()) return Interval{};
        return Interval{h_.front().first.lo, h_.back().first.hi};
    }

    std::uint64_t h_value(const Big& z) const {
        for (const auto& [iv, h] : h_)
            if (iv.contains(z)) return h;
        throw std::invalid_argument("address outside trace domain: " + big_str(z));
    }

    // Post an axiom. Returns the axiom id; `accepted_out` reports whether it
    // entered the trace immediately or joined the delay queue.
    std::uint64_t post(Interval region, std::uint64_t value, std::uint64_t use,
                       Clock& clk, bool& accepted_out) {
        if (region.empty()) throw std::invalid_argument("empty axiom region");
        Big covered = region.lo;
        for (const auto& [iv, h] : h_) {
            if (iv.hi <= covered) continue;
            if (iv.lo > covered) break;
            covered = iv.hi;
            if (covered >= region.hi) break;
        }
        if (covered < region.hi)
            throw std::invalid_argument("axiom region outside trace domain");
        Axiom ax;
        ax.id = axioms_.size();
        ax.region = region;
        ax.value = value;
        ax.use = use;
        ax.posted = clk.tick;
        axioms_.push_back(ax);
        if (ctr_) {
            ctr_->region_records += 1;
            if (region.size() == 1) ctr_->explicit_z_entries += 1;
        }
        if (fits(axioms_.back())) {
            admit(axioms_.back(), clk);
            accepted_out = true;
        } else {
            pending_.push_back(ax.id);
            accepted_out = false;
        }
        return ax.id;
    }

    // Kill accepted axioms whose use reaches below a new oracle element, then
    // let the freed slots admit delayed axioms (FIFO, single pass).
    // Returns ids admitted by the retry.
    std::vector<std::uint64_t> on_oracle_element(std::uint64_t elem, Clock& clk) {
        for (auto& ax : axioms_)
            if (ax.alive() && ax.use > elem) {
                ax.dead = true;
                ax.dead_tick = clk.tick;
            }
        return retry_pending(clk);
    }

    std::vector<std::uint64_t> retry_pending(Clock& clk) {
        std::vector<std::uint64_t> admitted;
        std::deque<std::uint64_t> keep;
        for (std::uint64_t id : pending_) {
            if (fits(axioms_[id])) {
                admit(axioms_[id], clk);
                admitted.push_back(id);
            } else {
                keep.push_back(id);
            }
        }
        pending_ = std::move(keep);
        return admitted;
    }

    // Is `value` traced on every point of `region` right now?
    bool covers_value(const Interval& region, std::uint64_t value) const {
        IntervalSet got;
        for (const auto& ax : axioms_)
            if (ax.alive() && ax.value == value) got.add(ax.region.intersect(region));
        return got.covers(region);
    }

    bool member(const Big& z, std::uint64_t value) const {
        for (const auto& ax : axioms_)
            if (ax.alive() && ax.value == value && ax.region.contains(z)) return true;
        return false;
    }

    std::set<std::uint64_t> values_at(const Big& z) const {
        std::set<std::uint64_t> out;
        for (const auto& ax : axioms_)
            if (ax.alive() && ax.region.contains(z)) out.insert(ax.value);
        return out;
    }

    // Use of the trace computation: per point the least use among covering
    // axioms of that value, then the maximum over the region. Empty when the
    // value is not traced somewhere in the region.
    std::optional<std::uint64_t> v_use(const Interval& region, std::uint64_t value) const {
        if (region.empty()) return 0;
        std::vector<const Axiom*> mine;
        for (const auto& ax : axioms_)
            if (ax.alive() && ax.value == value && ax.region.overlaps(region))
                mine.push_back(&ax);
        std::vector<Big> cuts = cut_points(region, [&](std::vector<Big>& c) {
            for (const Axiom* ax : mine) {
                c.push_back(ax->region.lo);
                c.push_back(ax->region.hi);
            }
        });
        std::uint64_t worst = 0;
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            Interval cell{cuts[i], cuts[i + 1]};
            if (cell.empty()) continue;
            std::uint64_t best = UINT64_MAX;
            for (const Axiom* ax : mine)
                if (ax->region.contains(cell))
                    best = std::min(best, ax->use);
            if (best == UINT64_MAX) return std::nullopt;  // a gap
            worst = std::max(worst, best);
        }
        return worst;
    }

    const std::vector<Axiom>& axioms() const { return axioms_; }
    const std::deque<std::uint64_t>& pending() const { return pending_; }

    // For policies: the least use among live axioms that block this pending
    // axiom, or empty if it is no longer blocked.
    std::optional<std::uint64_t> min_blocking_use(std::uint64_t pending_id) const {
        const Axiom& ax = axioms_.at(pending_id);
        std::uint64_t best = UINT64_MAX;
        for_each_cell(ax.region, [&](const Interval& cell, std::uint64_t h) {
            std::set<std::uint64_t> vals;
            std::uint64_t cell_min = UINT64_MAX;
            for (const auto& other : axioms_)
                if (other.alive() && other.region.contains(cell)) {
                    vals.insert(other.value);
                    cell_min = std::min(cell_min, other.use);
                }
            if (!vals.count(ax.value) && vals.size() >= h)
                best = std::min(best, cell_min);
        });
        if (best == UINT64_MAX) return std::nullopt;
        return best;
    }

private:
    template <typename Extra>
    std::vector<Big> cut_points(const Interval& region, Extra&& extra) const {
        std::vector<Big> cuts{region.lo, region.hi};
        for (const auto& [iv, h] : h_) {
            cuts.push_back(iv.lo);
            cuts.push_back(iv.hi);
        }
        extra(cuts);
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        std::vector<Big> out;
        for (auto& c : cuts)
            if (region.lo <= c && c <= region.hi) out.push_back(c);
        return out;
    }

    // Visit maximal cells of `region` on which the live-axiom cover and the
    // slot bound are both constant.
    template <typename F>
    void for_each_cell(const Interval& region, F&& f) const {
        std::vector<Big> cuts = cut_points(region, [&](std::vector<Big>& c) {
            for (const auto& ax : axioms_)
                if (ax.alive() && ax.region.overlaps(region)) {
                    c.push_back(ax.region.lo);
                    c.push_back(ax.region.hi);
                }
        });
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            Interval cell{cuts[i], cuts[i + 1]};
            if (!cell.empty()) f(cell, h_value(cell.lo));
        }
    }

    bool fits(const Axiom& cand) const {
        bool ok = true;
        for_each_cell(cand.region, [&](const Interval& cell, std::uint64_t h) {
            if (!ok) return;
            std::set<std::uint64_t> vals;
            for (const auto& other : axioms_)
                if (other.alive() && other.region.contains(cell)) vals.insert(other.value);
            vals.insert(cand.value);
            if (vals.size() > h) ok = false;
        });
        return ok;
    }

    void admit(Axiom& ax, Clock& clk) {
        ax.accepted = true;
        ax.accept_tick = clk.tick;
        ax.accept_seq = clk.next_seq();
    }

    std::string name_;
    std::vector<std::pair<Interval, std::uint64_t>> h_;
    AllocCounters* ctr_;
    std::vector<Axiom> axioms_;
    std::deque<std::uint64_t> pending_;
};

struct PsiPiece {
    Big hi;
    std::uint64_t value;
    Tick written;
};

// Marker assignment: piecewise constant with default 0, whole-region writes.
class PsiState {
public:
    explicit PsiState(AllocCounters* ctr = nullptr) : ctr_(ctr) {}

    void write(const Interval& region, std::uint64_t value, Tick now) {
        if (region.empty()) throw std::invalid_argument("empty marker write");
        // Split any piece straddling the left or right edge.
        split_at(region.lo);
        split_at(region.hi);
        auto it = pieces_.lower_bound(region.lo);
        while (it != pieces_.end() && it->first < region.hi) it = pieces_.erase(it);
        pieces_[region.lo] = PsiPiece{region.hi, value, now};
        if (ctr_) {
            ctr_->region_records += 1;
            if (region.size() == 1) ctr_->explicit_z_entries += 1;
        }
    }

    std::uint64_t value_at(const Big& z) const {
        auto it = pieces_.upper_bound(z);
        if (it == pieces_.begin()) return 0;
        --it;
        return it->second.hi > z ? it->second.value : 0;
    }

    // All written pieces clipped to `region`.
    std::vector<std::pair<Interval, PsiPiece>> pieces_in(const Interval& region) const {
        std::vector<std::pair<Interval, PsiPiece>> out;
        for (const auto& [lo, p] : pieces_) {
            Interval iv{lo, p.hi};
            Interval clip = iv.intersect(region);
            if (!clip.empty()) out.push_back({clip, PsiPiece{clip.hi, p.value, p.written}});
        }
        return out;
    }

    std::vector<std::pair<Interval, PsiPiece>> all_pieces() const {
        std::vector<std::pair<Interval, PsiPiece>> out;
        for (const auto& [lo, p] : pieces_)
            out.push_back({Interval{lo, p.hi}, p});
        return out;
    }

    bool anything_written() const { return !pieces_.empty(); }

private:
    void split_at(const Big& x) {
        auto it = pieces_.upper_bound(x);
        if (it == pieces_.begin()) return;
        --it;
        if (it->first < x && x < it->second.hi) {
            PsiPiece right = it->second;
            it->second.hi = x;
            pieces_[x] = right;  // keeps value and original write tick
        }
    }

    std::map<Big, PsiPiece> pieces_;
    AllocCounters* ctr_;
};

// Declared halting values: at most one per (functional, argument), never
// retracted.
class PcfState {
public:
    bool declare(std::uint64_t e, std::uint64_t x, std::uint64_t v, Tick now) {
        auto key = std::make_pair(e, x);
        if (decls_.count(key)) return false;
        decls_[key] = {v, now};
        return true;
    }

    std::optional<std::uint64_t> value(std::uint64_t e, std::uint64_t x) const {
        auto it = decls_.find({e, x});
        if (it == decls_.end()) return std::nullopt;
        return it->second.first;
    }

    bool declared(std::uint64_t e, std::uint64_t x) const {
        return decls_.count({e, x}) != 0;
    }

    const std::map<std::pair<std::uint64_t, std::uint64_t>,
                   std::pair<std::uint64_t, Tick>>& all() const {
        return decls_;
    }

private:
    std::map<std::pair<std::uint64_t, std::uint64_t>, std::pair<std::uint64_t, Tick>> decls_;
};

// One unmet marker obligation: a written piece whose value is not currently
// traced over its whole region.
struct UnmetObligation {
    Interval region;
    std::uint64_t value;
    Tick written;
    Big witness;  // a point where the cover fails
};

// The stage test: every written marker piece within `scope` must have its
// value traced across the piece.
inline bool obligations_met(const PsiState& psi, const TraceState& trace,
                            const Interval& scope,
                            std::vector<UnmetObligation>* unmet = nullptr) {
    bool ok = true;
    for (const auto& [iv, p] : psi.pieces_in(scope)) {
        if (!trace.covers_value(iv, p.value)) {
            ok = false;
            if (!unmet) return false;
            IntervalSet got;
            for (const auto& ax : trace.axioms())
                if (ax.alive() && ax.value == p.value) got.add(ax.region.intersect(iv));
            Big w = iv.lo;
            got.first_gap(iv, w);
            unmet->push_back(UnmetObligation{iv, p.value, p.written, w});
        }
    }
    return ok;
}

}  // namespace boxsim
