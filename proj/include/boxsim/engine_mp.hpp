#pragma once

// Two-sided engine. Followers for the diagonalization requirements carry a
// marker block on each side they still answer to; a stage is a tick at which
// every written marker value is traced; at a stage the strongest requirement
// needing attention acts once (promotion of its strongest permitted realised
// follower, else appointment of a fresh follower when all are realised).
//
// Promotion cases, with i the top side before the action:
//   1. only side 0 remains: the follower enters E and its requirement is
//      satisfied; all of the requirement's followers are cancelled.
//   2. i = 1 and the side-1 level already sits at the floor: side 1 is
//      dropped wholesale; side 0 is untouched; the permission stays open.
//   3. otherwise: side i descends one level into a fresh box chosen by the
//      bookkeeping rule, its marker is rewritten, and the top flips.
//
// The bookkeeping rule at (side i, level k): the stem beta is the box address
// of the weakest surviving follower parked on side i at level k in a
// non-private box (empty stem if none); the digit m is the least one such
// that beta^m differs from every level-k non-private side-i address still in
// use. A capacity override narrows the digit search and is the only way the
// digit can run out; running out is reported as a violation and stops the
// run.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "boxsim/carve.hpp"
#include "boxsim/cea.hpp"
#include "boxsim/events.hpp"
#include "boxsim/follower.hpp"
#include "boxsim/ints.hpp"
#include "boxsim/stage_log.hpp"

namespace boxsim {

struct EngineError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MpConfig {
    std::uint64_t c = 1;
    std::uint64_t e_max = 1;
    std::vector<std::uint64_t> active;  // empty: all of [c, e_max]
    std::uint64_t capacity_override = 0;  // 0: canonical capacities
};

class MpCore {
public:
    explicit MpCore(const MpConfig& cfg)
        : cfg_(cfg), layout_(cfg.c, cfg.e_max) {
        if (cfg.e_max < cfg.c) throw EngineError("e_max below the recursion constant");
        active_ = cfg.active;
        if (active_.empty())
            for (std::uint64_t e = cfg.c; e <= cfg.e_max; ++e) active_.push_back(e);
        std::sort(active_.begin(), active_.end());
        for (std::uint64_t e : active_)
            if (e < cfg.c || e > cfg.e_max)
                throw EngineError("active requirement outside [c, e_max]");
        std::vector<std::pair<Interval, std::uint64_t>> table;
        for (std::uint64_t k = cfg.c; k <= cfg.e_max; ++k)
            table.push_back({layout_.interval_of(k), k});
        for (int i = 0; i < 2; ++i) {
            trace_.emplace_back("T" + std::to_string(i), table, &ctr_);
            psi_.emplace_back(&ctr_);
        }
    }

    const LayoutMP& layout() const { return layout_; }
    const MpConfig& config() const { return cfg_; }
    const Clock& clock() const { return clk_; }
    Tick last_stage() const { return last_stage_; }
    const OracleSet& oracle(int i) const { return oracle_[i]; }
    const TraceState& trace(int i) const { return trace_[i]; }
    const PsiState& psi(int i) const { return psi_[i]; }
    const PcfState& pcf() const { return pcf_; }
    const std::vector<FollowerMP>& followers() const { return followers_; }
    const std::set<std::uint64_t>& enumerated() const { return E_; }
    const std::set<std::uint64_t>& satisfied() const { return satisfied_; }
    const std::vector<std::uint64_t>& active() const { return active_; }
    const AllocCounters& counters() const { return ctr_; }
    bool violated() const { return violated_; }

    const FollowerMP* find_follower(std::uint64_t id) const {
        for (const auto& f : followers_)
            if (f.id == id) return &f;
        return nullptr;
    }

    Interval region_of(const SideState& s) const {
        if (s.box.priv) return singleton(layout_.private_slot(s.box.k));
        return layout_.carve(s.box.k, s.box.alpha);
    }

    bool realised(const FollowerMP& f) const {
        auto v = pcf_.value(f.e, f.id);
        return v.has_value() && *v == 0;
    }

    // Permission at the current tick, judged against the side's computation
    // recorded at the previous stage.
    bool permitted(const FollowerMP& f) const {
        int i = f.top;
        const SideState& s = f.side[i];
        if (!s.v_last.has_value()) return true;
        return oracle_[i].changed_below(*s.v_last, s.v_stage, clk_.tick);
    }

    // One tick. Events are applied first, then the stage logic runs.
    TickRecord step(const std::vector<AdvEvent>& events) {
        if (violated_) throw EngineError("run already stopped by a violation");
        clk_.tick += 1;
        TickRecord rec;
        rec.tick = clk_.tick;
        rec.events = events;

        for (int i = 0; i < 2; ++i)
            for (std::uint64_t id : trace_[i].retry_pending(clk_))
                rec.admitted.push_back(AdmitRec{static_cast<std::uint64_t>(i), 0, id});
        for (const auto& ev : events) apply_event(ev, rec);

        rec.is_stage = stage_test();
        if (rec.is_stage) {
            refresh_satisfied();
            run_stage(rec);
            for (std::uint64_t e : satisfied_) rec.satisfied.push_back(e);
            if (!violated_) {
                update_computations();
                last_stage_ = clk_.tick;
            }
        }
        rec.sizes = set_sizes();
        return rec;
    }

    bool stage_test() const {
        for (int i = 0; i < 2; ++i) {
            Interval dom{0, layout_.domain_end()};
            if (!obligations_met(psi_[i], trace_[i], dom)) return false;
        }
        return true;
    }

    std::vector<UnmetObligation> unmet_obligations(int i) const {
        std::vector<UnmetObligation> out;
        Interval dom{0, layout_.domain_end()};
        obligations_met(psi_[i], trace_[i], dom, &out);
        return out;
    }

    // The attention decision, pure in the current state.
    struct Decision {
        enum class What { none, appoint, promote } what = What::none;
        std::uint64_t e = 0;
        std::uint64_t x = 0;  // promote only
    };

    Decision attention_decision() const {
        for (std::uint64_t e : active_) {
            if (satisfied_.count(e)) continue;
            std::vector<const FollowerMP*> mine;
            for (const auto& f : followers_)
                if (f.alive() && f.e == e) mine.push_back(&f);
            const FollowerMP* strongest_permitted = nullptr;
            bool all_realised = true;
            for (const auto* f : mine) {
                if (!realised(*f)) {
                    all_realised = false;
                    continue;
                }
                if (permitted(*f) && !strongest_permitted) strongest_permitted = f;
            }
            if (strongest_permitted)
                return Decision{Decision::What::promote, e, strongest_permitted->id};
            if (all_realised) return Decision{Decision::What::appoint, e, 0};
        }
        return Decision{};
    }

    // Bookkeeping stem: address of the weakest surviving follower parked on
    // side i at level k in a non-private box, the actor excluded.
    Address compute_beta(int i, std::uint64_t k, const FollowerMP* actor) const {
        const FollowerMP* best = nullptr;
        for (const auto& f : followers_) {
            if (!f.alive() || &f == actor || !f.has_side(i)) continue;
            if (f.top != i) continue;
            if (f.side[i].k != k || f.side[i].box.priv) continue;
            if (!best || f.id > best->id) best = &f;
        }
        return best ? best->side[i].box.alpha : Address{};
    }

    // Digits already spoken for under the stem: exact addresses beta^d held
    // at (i, k) by any surviving follower.
    std::vector<std::uint64_t> blocked_digits(int i, std::uint64_t k, const Address& beta,
                                              const FollowerMP* actor) const {
        std::vector<std::uint64_t> out;
        for (const auto& f : followers_) {
            if (!f.alive() || &f == actor || !f.has_side(i)) continue;
            if (f.side[i].k != k || f.side[i].box.priv) continue;
            const Address& al = f.side[i].box.alpha;
            if (al.size() != beta.size() + 1) continue;
            if (!std::equal(beta.begin(), beta.end(), al.begin())) continue;
            out.push_back(al.back());
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    std::uint64_t digit_bound(std::uint64_t k) const {
        std::uint64_t a = cap_mp(k).convert_to<std::uint64_t>();
        if (cfg_.capacity_override) return std::min<std::uint64_t>(cfg_.capacity_override, a);
        return a;
    }

    std::optional<std::uint64_t> select_m(int i, std::uint64_t k, const Address& beta,
                                          const FollowerMP* actor) const {
        if (beta.size() > k) return std::nullopt;  // stem too long to extend
        auto blocked = blocked_digits(i, k, beta, actor);
        std::uint64_t bound = digit_bound(k);
        for (std::uint64_t m = 0; m < bound; ++m)
            if (!std::binary_search(blocked.begin(), blocked.end(), m)) return m;
        return std::nullopt;
    }

    // Per-(side, level) follower classes: K parked non-private on top, L
    // parked private on top, G answering to the side but with the other side
    // on top.
    std::vector<SetSizeRec> set_sizes() const {
        std::vector<SetSizeRec> out;
        for (int i = 0; i < 2; ++i)
            for (std::uint64_t k = cfg_.c; k <= cfg_.e_max; ++k) {
                SetSizeRec row;
                row.side = i;
                row.k = k;
                for (const auto& f : followers_) {
                    if (!f.alive() || !f.has_side(i) || f.side[i].k != k) continue;
                    if (f.top == i)
                        f.side[i].box.priv ? ++row.L : ++row.K;
                    else
                        ++row.G;
                }
                if (row.K || row.L || row.G) out.push_back(row);
            }
        return out;
    }

private:
    void apply_event(const AdvEvent& ev, TickRecord& rec) {
        switch (ev.kind) {
            case AdvEvent::Kind::enumerate_set: {
                if (ev.oracle > 1) throw EngineError("oracle side must be 0 or 1");
                int i = static_cast<int>(ev.oracle);
                if (oracle_[i].add(ev.elem, clk_))
                    for (std::uint64_t id : trace_[i].on_oracle_element(ev.elem, clk_))
                        rec.admitted.push_back(AdmitRec{ev.oracle, 0, id});
                break;
            }
            case AdvEvent::Kind::post_axiom: {
                if (ev.trace_e > 1 || ev.trace_c != 0)
                    throw EngineError("two-sided traces are [0,0] and [1,0]");
                bool ok = false;
                std::uint64_t id = trace_[ev.trace_e].post(ev.region, ev.value, ev.use,
                                                           clk_, ok);
                rec.axiom_results.push_back(AxiomResult{id, ok});
                break;
            }
            case AdvEvent::Kind::declare_halt: {
                if (!pcf_.declare(ev.e, ev.x, ev.v, clk_.tick))
                    throw EngineError("halting value redeclared for (" +
                                      std::to_string(ev.e) + "," + std::to_string(ev.x) + ")");
                break;
            }
        }
    }

    // A requirement counts as satisfied once any enumerated number is a
    // confirmed zero of its function, whoever appointed that number.
    void refresh_satisfied() {
        for (std::uint64_t e : active_) {
            if (satisfied_.count(e)) continue;
            for (std::uint64_t x : E_) {
                auto v = pcf_.value(e, x);
                if (v.has_value() && *v == 0) {
                    satisfied_.insert(e);
                    break;
                }
            }
        }
    }

    void cancel(FollowerMP& f) {
        f.status = FollowerStatus::cancelled;
        f.status_tick = clk_.tick;
    }

    void run_stage(TickRecord& rec) {
        Decision d = attention_decision();
        switch (d.what) {
            case Decision::What::none:
                rec.action.kind = "none";
                return;
            case Decision::What::appoint:
                do_appoint(d.e, rec);
                return;
            case Decision::What::promote:
                do_promote(d.e, d.x, rec);
                return;
        }
    }

    void record_violation(TickRecord& rec, std::uint64_t e, std::uint64_t x, int side,
                          std::uint64_t k, const Address& beta, const FollowerMP* actor) {
        violated_ = true;
        rec.action.kind = "violation";
        rec.action.e = e;
        rec.action.x = x;
        rec.action.side = side;
        rec.action.viol_k = k;
        rec.action.viol_beta = beta;
        rec.action.viol_blocked = blocked_digits(side, k, beta, actor);
        rec.action.viol_bound = digit_bound(k);
    }

    void do_appoint(std::uint64_t e, TickRecord& rec) {
        // A fresh follower outranks every follower of weaker requirements.
        for (auto& f : followers_)
            if (f.alive() && f.e > e) {
                cancel(f);
                rec.cancelled.push_back(f.id);
            }
        Address beta = compute_beta(0, e, nullptr);
        auto m = select_m(0, e, beta, nullptr);
        if (!m) {
            record_violation(rec, e, clk_.tick, 0, e, beta, nullptr);
            return;
        }
        FollowerMP f;
        f.id = clk_.tick;
        f.e = e;
        f.has_side1 = true;
        f.top = 1;
        Address alpha = beta;
        alpha.push_back(*m);
        f.side[0] = SideState{e, BoxRef{false, e, alpha}, clk_.tick, std::nullopt, 0};
        f.side[1] = SideState{e, BoxRef{true, e, {}}, clk_.tick, std::nullopt, 0};
        followers_.push_back(f);

        Interval b0 = layout_.carve(e, alpha);
        Interval b1 = singleton(layout_.private_slot(e));
        psi_[0].write(b0, clk_.tick, clk_.tick);
        psi_[1].write(b1, clk_.tick, clk_.tick);

        rec.action.kind = "appoint";
        rec.action.e = e;
        rec.action.x = f.id;
        rec.action.new_top = 1;
        rec.action.assigns.push_back(BoxAssignRec{0, -1, false, e, alpha, beta, *m, b0});
        rec.action.assigns.push_back(BoxAssignRec{1, -1, true, e, {}, {}, 0, b1});
    }

    void do_promote(std::uint64_t e, std::uint64_t x, TickRecord& rec) {
        FollowerMP* f = nullptr;
        for (auto& g : followers_)
            if (g.id == x) f = &g;
        if (!f || !f->alive()) throw EngineError("promoting a missing follower");
        // Attention cancels everything weaker than the follower itself.
        for (auto& g : followers_)
            if (g.alive() && g.id > x) {
                cancel(g);
                rec.cancelled.push_back(g.id);
            }
        rec.action.e = e;
        rec.action.x = x;
        int i = f->top;
        f->promotions += 1;
        if (!f->has_side1) {
            // Case 1: final permission on the surviving side.
            if (i != 0) throw EngineError("single-sided follower with top 1");
            E_.insert(x);
            f->status = FollowerStatus::enumerated;
            f->status_tick = clk_.tick;
            for (auto& g : followers_)
                if (g.alive() && g.e == e) {
                    cancel(g);
                    rec.cancelled.push_back(g.id);
                }
            satisfied_.insert(e);
            rec.action.kind = "promote1";
            rec.enumerated = x;
            return;
        }
        if (i == 1 && f->side[1].k == cfg_.c) {
            // Case 2: the side-1 level is at the floor; drop that side.
            f->has_side1 = false;
            f->top = 0;
            rec.action.kind = "promote2";
            rec.action.side = 1;
            rec.action.new_top = 0;
            return;
        }
        // Case 3: descend one level on the top side.
        std::uint64_t knew = f->side[i].k - 1;
        if (knew < cfg_.c) throw EngineError("descent below the recursion constant");
        Address beta = compute_beta(i, knew, f);
        auto m = select_m(i, knew, beta, f);
        if (!m) {
            record_violation(rec, e, x, i, knew, beta, f);
            return;
        }
        Address alpha = beta;
        alpha.push_back(*m);
        f->side[i] = SideState{knew, BoxRef{false, knew, alpha}, clk_.tick, std::nullopt, 0};
        f->top = 1 - i;
        Interval box = layout_.carve(knew, alpha);
        psi_[i].write(box, clk_.tick, clk_.tick);
        rec.action.kind = "promote3";
        rec.action.side = i;
        rec.action.new_top = f->top;
        rec.action.assigns.push_back(BoxAssignRec{i, -1, false, knew, alpha, beta, *m, box});
    }

    // Record every surviving follower's computation at the end of the stage.
    void update_computations() {
        for (auto& f : followers_) {
            if (!f.alive()) continue;
            for (int i = 0; i < 2; ++i) {
                if (!f.has_side(i)) continue;
                f.side[i].v_last = trace_[i].v_use(region_of(f.side[i]), f.side[i].t);
                f.side[i].v_stage = clk_.tick;
            }
        }
    }

    MpConfig cfg_;
    LayoutMP layout_;
    Clock clk_;
    AllocCounters ctr_;
    OracleSet oracle_[2];
    std::vector<TraceState> trace_;
    std::vector<PsiState> psi_;
    PcfState pcf_;
    std::vector<FollowerMP> followers_;
    std::set<std::uint64_t> E_;
    std::set<std::uint64_t> satisfied_;
    std::vector<std::uint64_t> active_;
    Tick last_stage_ = 0;
    bool violated_ = false;
};

}  // namespace boxsim
