#pragma once

// Log auditor. Replays a recorded run against an independent shadow of the
// construction state, re-deriving every decision from the log alone and
// checking the structural lemmas after every tick. Only the substrate is
// shared with the engines (intervals, layouts, traces, markers); attention,
// bookkeeping, classification, and the reduction procedures are recomputed
// here from first principles, so a log produced by a buggy or tampered
// engine cannot vouch for itself.
//
// The audit walks the log once. Per tick it mirrors the delay-queue
// admissions and adversary events, recomputes the stage test and the
// attention decision, and compares them field by field with what the log
// claims. The logged action is then applied to the shadow (so one divergence
// yields one finding, not a cascade), and the full invariant sweep runs over
// the post-tick state. Box choices are re-audited a second time through the
// stem-and-digit rule stated over "barred" classes: members of a class at
// both the current and the previous tick. That formulation never looks at
// the actor, so it is a genuinely independent check of the engine's
// bookkeeping.
//
// After the pass the auditor classifies the run (an adversary that left a
// marker obligation broken for longer than the compliance gap has defaulted),
// computes the horizon approximations of the limit objects (true path,
// omega-classes over the final window), replays the oracle reduction
// procedure for every follower, and checks diagonalization on the true path.
// Structural findings are always produced; reduction and diagonalization are
// skipped with a notice when the run is defaulted or stopped by a violation.

#include <algorithm>
#include <array>
#include <cstdint>
#include <iterator>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "boxsim/carve.hpp"
#include "boxsim/cea.hpp"
#include "boxsim/events.hpp"
#include "boxsim/ints.hpp"
#include "boxsim/layout_tree.hpp"
#include "boxsim/run.hpp"
#include "boxsim/scenario.hpp"
#include "boxsim/stage_log.hpp"
#include "boxsim/tree.hpp"

namespace boxsim {

struct AuditFinding {
    Tick tick = 0;
    std::string check;
    std::string detail;
};

// One follower's answer from the oracle reduction procedure. `key` is the
// side (two-sided runs) or the guarding node (tree runs). Exceeded-horizon
// answers are legal only for the small exception sets; `excepted` records
// whether this one is covered, with the reason in `note`.
struct ReduceAnswer {
    std::uint64_t x = 0;
    int key = 0;
    std::string verdict;  // "in-E", "not-in-E", "exceeded-horizon"
    Tick resolved_at = 0;
    bool matches_final = false;
    bool excepted = false;
    std::string note;
};

struct AuditReport {
    std::vector<AuditFinding> findings;  // failures, each with a witness
    std::vector<AuditFinding> notices;   // informational
    std::string classification = "compliant-at-horizon";
    bool violation = false;              // run ended in a capacity violation
    std::vector<ReduceAnswer> reduction;
    std::vector<int> true_path;          // tree runs: node ids, root first
    json stats;

    bool clean() const { return findings.empty(); }
};

inline json audit_finding_json(const AuditFinding& f) {
    return json{{"tick", f.tick}, {"check", f.check}, {"detail", f.detail}};
}

inline json audit_report_json(const AuditReport& r) {
    json j;
    j["classification"] = r.classification;
    j["violation"] = r.violation;
    json fs = json::array();
    for (const auto& f : r.findings) fs.push_back(audit_finding_json(f));
    j["findings"] = fs;
    json ns = json::array();
    for (const auto& n : r.notices) ns.push_back(audit_finding_json(n));
    j["notices"] = ns;
    json red = json::array();
    for (const auto& a : r.reduction)
        red.push_back(json{{"x", a.x},
                           {"key", a.key},
                           {"verdict", a.verdict},
                           {"resolved_at", a.resolved_at},
                           {"matches_final", a.matches_final},
                           {"excepted", a.excepted},
                           {"note", a.note}});
    j["reduction"] = red;
    j["true_path"] = r.true_path;
    j["stats"] = r.stats;
    return j;
}

inline AuditReport audit_report_from_json(const json& j) {
    AuditReport r;
    r.classification = j.at("classification").get<std::string>();
    r.violation = j.at("violation").get<bool>();
    for (const auto& f : j.at("findings"))
        r.findings.push_back(AuditFinding{f.at("tick").get<Tick>(),
                                          f.at("check").get<std::string>(),
                                          f.at("detail").get<std::string>()});
    for (const auto& n : j.at("notices"))
        r.notices.push_back(AuditFinding{n.at("tick").get<Tick>(),
                                         n.at("check").get<std::string>(),
                                         n.at("detail").get<std::string>()});
    for (const auto& a : j.at("reduction")) {
        ReduceAnswer ra;
        ra.x = a.at("x").get<std::uint64_t>();
        ra.key = a.at("key").get<int>();
        ra.verdict = a.at("verdict").get<std::string>();
        ra.resolved_at = a.at("resolved_at").get<Tick>();
        ra.matches_final = a.at("matches_final").get<bool>();
        ra.excepted = a.at("excepted").get<bool>();
        ra.note = a.at("note").get<std::string>();
        r.reduction.push_back(ra);
    }
    r.true_path = j.at("true_path").get<std::vector<int>>();
    r.stats = j.at("stats");
    return r;
}

namespace detail_audit {

// Shadow image of one follower. Keys into `per` are sides (0/1) for the
// two-sided shadow and node ids for the tree shadow.
struct SBox {
    bool priv = false;
    std::uint64_t k = 0;
    Address alpha;
    Interval region;
    Tick t = 0;
    std::optional<std::uint64_t> v_last;
    Tick v_stage = 0;
};

struct SFol {
    std::uint64_t id = 0;
    std::uint64_t e = 0;   // owning requirement's functional
    int sigma = -1;        // tree: appointing node
    std::vector<int> chain;
    int top = 0;
    std::map<int, SBox> per;
    bool alive = true;
    bool enumerated = false;
    std::uint64_t promotions = 0;
};

// Follower classes at one (key, level) cell: parked on top in a carved box,
// parked on top in the private slot, or answering with the top elsewhere.
struct ClassRow {
    std::set<std::uint64_t> K, L, G;

    bool operator==(const ClassRow&) const = default;
};
using ClassMap = std::map<std::pair<int, std::uint64_t>, ClassRow>;

inline std::set<std::uint64_t> set_meet(const std::set<std::uint64_t>& a,
                                        const std::set<std::uint64_t>& b) {
    std::set<std::uint64_t> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                          std::inserter(out, out.begin()));
    return out;
}

// True when the written marker pieces inside `region` are exactly the single
// value `value` with no gaps.
inline bool psi_constant_on(const PsiState& psi, const Interval& region,
                            std::uint64_t value) {
    Big at = region.lo;
    for (const auto& [iv, p] : psi.pieces_in(region)) {
        if (iv.lo != at || p.value != value) return false;
        at = iv.hi;
    }
    return at == region.hi;
}

inline std::string ivs(const Interval& iv) {
    return "[" + big_str(iv.lo) + "," + big_str(iv.hi) + ")";
}

// Oracle changes known in advance: the full list of fresh enumerations per
// oracle, in tick order, with a suffix minimum for "does anything below u
// appear after tick s" queries.
struct FutureAdds {
    std::vector<std::pair<Tick, std::uint64_t>> adds;
    std::vector<std::uint64_t> suffix_min;

    void finalize() {
        suffix_min.assign(adds.size() + 1, std::numeric_limits<std::uint64_t>::max());
        for (std::size_t i = adds.size(); i > 0; --i)
            suffix_min[i - 1] = std::min(suffix_min[i], adds[i - 1].second);
    }

    bool change_below_after(std::uint64_t use, Tick s) const {
        auto it = std::upper_bound(
            adds.begin(), adds.end(), std::make_pair(s, std::numeric_limits<std::uint64_t>::max()));
        return suffix_min[static_cast<std::size_t>(it - adds.begin())] < use;
    }
};

struct Resolution {
    std::string verdict;
    Tick at = 0;
    std::string note;
};

// State and bookkeeping shared by both auditors: findings, reduction
// resolutions, occupancy statistics, and the omega-window machinery.
class AuditorBase {
public:
    explicit AuditorBase(const RunLog& log) : log_(log), sc_(log.scenario) {
        horizon_ = log_.ticks.empty() ? 0 : log_.ticks.back().tick;
        Tick win = std::max<Tick>(1, horizon_ * sc_.limit_percent / 100);
        window_lo_ = horizon_ > win ? horizon_ - win + 1 : 1;
    }

protected:
    void finding(Tick t, const std::string& check, const std::string& detail) {
        ++findings_total_;
        if (rep_.findings.size() < 200)
            rep_.findings.push_back(AuditFinding{t, check, detail});
    }

    void notice(Tick t, const std::string& check, const std::string& detail) {
        rep_.notices.push_back(AuditFinding{t, check, detail});
    }

    void resolve_id(std::uint64_t x, const std::string& verdict, Tick at,
                    const std::string& note) {
        id_res_.emplace(x, Resolution{verdict, at, note});
    }

    void resolve_stable(std::uint64_t x, int key, Tick at) {
        c_res_.emplace(std::make_pair(x, key), at);
    }

    // The procedure's answer for follower x relative to `key`: the earliest
    // qualifying observation wins.
    ReduceAnswer answer_for(const SFol& f, int key, bool in_final_E) const {
        ReduceAnswer a;
        a.x = f.id;
        a.key = key;
        auto idr = id_res_.find(f.id);
        auto cr = c_res_.find(std::make_pair(f.id, key));
        bool has_id = idr != id_res_.end();
        bool has_c = cr != c_res_.end();
        if (has_id && (!has_c || idr->second.at <= cr->second)) {
            a.verdict = idr->second.verdict;
            a.resolved_at = idr->second.at;
            a.note = idr->second.note;
        } else if (has_c) {
            a.verdict = "not-in-E";
            a.resolved_at = cr->second;
            a.note = "use stabilized";
        } else {
            a.verdict = "exceeded-horizon";
        }
        if (a.verdict != "exceeded-horizon")
            a.matches_final = (a.verdict == "in-E") == in_final_E;
        return a;
    }

    void record_occupancy(const TickRecord& rec) {
        json rows = json::array();
        for (const auto& s : rec.sizes) {
            json row{{"k", s.k}, {"K", s.K}, {"L", s.L}, {"G", s.G}};
            if (s.side >= 0) row["side"] = s.side;
            if (s.node >= 0) row["node"] = s.node;
            rows.push_back(row);
            auto key = std::make_pair(s.side >= 0 ? s.side : s.node, s.k);
            auto& mx = max_sizes_[key];
            mx[0] = std::max(mx[0], s.K);
            mx[1] = std::max(mx[1], s.L);
            mx[2] = std::max(mx[2], s.G);
        }
        series_.push_back(json{{"tick", rec.tick}, {"rows", rows}});
        ++action_counts_[rec.action.kind];
    }

    json max_sizes_json(const char* key_name) const {
        json out = json::array();
        for (const auto& [key, mx] : max_sizes_)
            out.push_back(json{{key_name, key.first},
                               {"k", key.second},
                               {"K", mx[0]},
                               {"L", mx[1]},
                               {"G", mx[2]}});
        return out;
    }

    const RunLog& log_;
    Scenario sc_;
    AuditReport rep_;
    Tick horizon_ = 0;
    Tick window_lo_ = 1;
    std::uint64_t findings_total_ = 0;
    std::map<std::uint64_t, Resolution> id_res_;
    std::map<std::pair<std::uint64_t, int>, Tick> c_res_;
    std::map<std::pair<int, std::uint64_t>, std::array<std::uint64_t, 3>> max_sizes_;
    std::vector<json> series_;
    std::map<std::string, std::uint64_t> action_counts_;
    ClassMap omega_snapshot_;
    bool omega_constant_ = true;
    Tick omega_break_ = 0;
};

// ---------------------------------------------------------------------------
// Two-sided auditor.

class AuditorMP : public AuditorBase {
public:
    explicit AuditorMP(const RunLog& log)
        : AuditorBase(log), layout_(sc_.c, sc_.e_max) {
        active_ = sc_.active;
        if (active_.empty())
            for (std::uint64_t e = sc_.c; e <= sc_.e_max; ++e) active_.push_back(e);
        std::sort(active_.begin(), active_.end());
        std::vector<std::pair<Interval, std::uint64_t>> table;
        for (std::uint64_t k = sc_.c; k <= sc_.e_max; ++k)
            table.push_back({layout_.interval_of(k), k});
        for (int i = 0; i < 2; ++i) {
            trace_.emplace_back("audit-T" + std::to_string(i), table, &ctr_);
            psi_.emplace_back(&ctr_);
        }
        // Every fresh oracle element, collected up front so the reduction
        // procedure can ask about the future of the run.
        std::set<std::uint64_t> seen[2];
        for (const auto& rec : log_.ticks)
            for (const auto& ev : rec.events)
                if (ev.kind == AdvEvent::Kind::enumerate_set && ev.oracle < 2 &&
                    seen[ev.oracle].insert(ev.elem).second)
                    fut_[ev.oracle].adds.push_back({rec.tick, ev.elem});
        fut_[0].finalize();
        fut_[1].finalize();
    }

    AuditReport run() {
        for (const auto& rec : log_.ticks) {
            try {
                tick(rec);
            } catch (const std::exception& bad) {
                finding(rec.tick, "schema", std::string("malformed record: ") + bad.what());
            }
        }
        finish();
        return std::move(rep_);
    }

private:
    struct Expected {
        std::string kind = "none";
        std::uint64_t e = 0, x = 0;
        int side = -1, new_top = -1;
        std::vector<std::uint64_t> cancels;
    };

    bool realised(const SFol& f) const {
        auto v = pcf_.value(f.e, f.id);
        return v.has_value() && *v == 0;
    }

    bool permitted(const SFol& f) const {
        const SBox& b = f.per.at(f.top);
        if (!b.v_last.has_value()) return true;
        return oracle_[f.top].changed_below(*b.v_last, b.v_stage, clk_.tick);
    }

    Interval region_mp(const SBox& b) const {
        if (b.priv) return singleton(layout_.private_slot(b.k));
        return layout_.carve(b.k, b.alpha);
    }

    std::uint64_t digit_bound(std::uint64_t k) const {
        std::uint64_t a = cap_mp(k).convert_to<std::uint64_t>();
        if (sc_.capacity_override) return std::min(sc_.capacity_override, a);
        return a;
    }

    ClassMap classes() const {
        ClassMap out;
        for (const auto& [id, f] : fols_) {
            if (!f.alive) continue;
            for (const auto& [key, b] : f.per) {
                ClassRow& row = out[{key, b.k}];
                if (f.top == key)
                    (b.priv ? row.L : row.K).insert(id);
                else
                    row.G.insert(id);
            }
        }
        return out;
    }

    // The stem and digit re-derived from barred classes: followers present in
    // the class both now and at the previous tick. The actor of this tick's
    // action is never barred (its cell changed), so no exclusion is needed.
    std::pair<Address, std::optional<std::uint64_t>> lemma_pick(
        int key, std::uint64_t k, const ClassMap& now) const {
        auto cell = std::make_pair(key, k);
        ClassRow empty;
        const ClassRow& cn = now.count(cell) ? now.at(cell) : empty;
        const ClassRow& cp = prev_classes_.count(cell) ? prev_classes_.at(cell) : empty;
        std::set<std::uint64_t> kbar = set_meet(cn.K, cp.K);
        Address beta;
        if (!kbar.empty()) beta = fols_.at(*kbar.rbegin()).per.at(key).alpha;
        if (beta.size() > k) return {beta, std::nullopt};
        std::set<std::uint64_t> kg_now(cn.K), kg_prev(cp.K);
        kg_now.insert(cn.G.begin(), cn.G.end());
        kg_prev.insert(cp.G.begin(), cp.G.end());
        std::set<std::uint64_t> blocked;
        for (std::uint64_t y : set_meet(kg_now, kg_prev)) {
            const Address& al = fols_.at(y).per.at(key).alpha;
            if (al.size() != beta.size() + 1) continue;
            if (!std::equal(beta.begin(), beta.end(), al.begin())) continue;
            blocked.insert(al.back());
        }
        for (std::uint64_t m = 0; m < digit_bound(k); ++m)
            if (!blocked.count(m)) return {beta, m};
        return {beta, std::nullopt};
    }

    // Construction-order recomputation used by the attention decision: the
    // same rule evaluated before the action commits, with the predicted
    // cancellations and the actor masked out by hand.
    Address beta_at(int key, std::uint64_t k, const std::set<std::uint64_t>& gone,
                    std::uint64_t actor) const {
        const SFol* best = nullptr;
        for (const auto& [id, f] : fols_) {
            if (!f.alive || id == actor || gone.count(id)) continue;
            if (f.top != key || !f.per.count(key)) continue;
            const SBox& b = f.per.at(key);
            if (b.k != k || b.priv) continue;
            if (!best || id > best->id) best = &f;
        }
        return best ? best->per.at(key).alpha : Address{};
    }

    std::vector<std::uint64_t> blocked_at(int key, std::uint64_t k, const Address& beta,
                                          const std::set<std::uint64_t>& gone,
                                          std::uint64_t actor) const {
        std::set<std::uint64_t> out;
        for (const auto& [id, f] : fols_) {
            if (!f.alive || id == actor || gone.count(id) || !f.per.count(key)) continue;
            const SBox& b = f.per.at(key);
            if (b.k != k || b.priv) continue;
            if (b.alpha.size() != beta.size() + 1) continue;
            if (!std::equal(beta.begin(), beta.end(), b.alpha.begin())) continue;
            out.insert(b.alpha.back());
        }
        return {out.begin(), out.end()};
    }

    std::optional<std::uint64_t> pick_m(int key, std::uint64_t k, const Address& beta,
                                        const std::set<std::uint64_t>& gone,
                                        std::uint64_t actor) const {
        if (beta.size() > k) return std::nullopt;
        auto blocked = blocked_at(key, k, beta, gone, actor);
        for (std::uint64_t m = 0; m < digit_bound(k); ++m)
            if (!std::binary_search(blocked.begin(), blocked.end(), m)) return m;
        return std::nullopt;
    }

    Expected decide() const {
        Expected ex;
        for (std::uint64_t e : active_) {
            if (satisfied_.count(e)) continue;
            const SFol* pick = nullptr;
            bool all_realised = true;
            for (const auto& [id, f] : fols_) {
                if (!f.alive || f.e != e) continue;
                if (!realised(f)) {
                    all_realised = false;
                    continue;
                }
                if (!pick && permitted(f)) pick = &f;
            }
            if (pick) return expect_promote(e, *pick);
            if (all_realised) return expect_appoint(e);
        }
        return ex;
    }

    Expected expect_appoint(std::uint64_t e) const {
        Expected ex;
        ex.e = e;
        ex.x = clk_.tick;
        std::set<std::uint64_t> gone;
        for (const auto& [id, f] : fols_)
            if (f.alive && f.e > e) {
                ex.cancels.push_back(id);
                gone.insert(id);
            }
        auto m = pick_m(0, e, beta_at(0, e, gone, 0), gone, 0);
        if (!m) {
            ex.kind = "violation";
            ex.side = 0;
        } else {
            ex.kind = "appoint";
            ex.new_top = 1;
        }
        return ex;
    }

    Expected expect_promote(std::uint64_t e, const SFol& f) const {
        Expected ex;
        ex.e = e;
        ex.x = f.id;
        std::set<std::uint64_t> gone;
        for (const auto& [id, g] : fols_)
            if (g.alive && id > f.id) {
                ex.cancels.push_back(id);
                gone.insert(id);
            }
        if (!f.per.count(1)) {
            ex.kind = "promote1";
            for (const auto& [id, g] : fols_)
                if (g.alive && g.e == e && id != f.id && !gone.count(id))
                    ex.cancels.push_back(id);
            return ex;
        }
        if (f.top == 1 && f.per.at(1).k == sc_.c) {
            ex.kind = "promote2";
            ex.side = 1;
            ex.new_top = 0;
            return ex;
        }
        int i = f.top;
        std::uint64_t knew = f.per.at(i).k - 1;
        auto m = pick_m(i, knew, beta_at(i, knew, gone, f.id), gone, f.id);
        ex.side = i;
        if (!m) {
            ex.kind = "violation";
        } else {
            ex.kind = "promote3";
            ex.new_top = 1 - i;
        }
        return ex;
    }

    void compare_action(const TickRecord& rec, const Expected& ex) {
        const ActionRec& a = rec.action;
        if (ex.kind != a.kind || (ex.kind != "none" && (ex.e != a.e || ex.x != a.x)) ||
            ex.side != (a.side) || (ex.new_top >= 0 && ex.new_top != a.new_top))
            finding(rec.tick, "action-choice",
                    "expected " + ex.kind + " e=" + std::to_string(ex.e) +
                        " x=" + std::to_string(ex.x) + ", log has " + a.kind +
                        " e=" + std::to_string(a.e) + " x=" + std::to_string(a.x));
        if (ex.cancels != rec.cancelled)
            finding(rec.tick, "cancellation",
                    "expected " + std::to_string(ex.cancels.size()) +
                        " cancellations, log lists " + std::to_string(rec.cancelled.size()));
    }

    void apply_event(const AdvEvent& ev, std::vector<AdmitRec>& adm,
                     std::vector<AxiomResult>& axr) {
        switch (ev.kind) {
            case AdvEvent::Kind::enumerate_set: {
                if (ev.oracle > 1) {
                    finding(clk_.tick, "event", "oracle side out of range");
                    return;
                }
                int i = static_cast<int>(ev.oracle);
                if (oracle_[i].add(ev.elem, clk_))
                    for (std::uint64_t id : trace_[i].on_oracle_element(ev.elem, clk_))
                        adm.push_back(AdmitRec{ev.oracle, 0, id});
                return;
            }
            case AdvEvent::Kind::post_axiom: {
                if (ev.trace_e > 1 || ev.trace_c != 0) {
                    finding(clk_.tick, "event", "axiom names a trace that does not exist");
                    return;
                }
                bool ok = false;
                try {
                    std::uint64_t id =
                        trace_[ev.trace_e].post(ev.region, ev.value, ev.use, clk_, ok);
                    axr.push_back(AxiomResult{id, ok});
                } catch (const std::invalid_argument& bad) {
                    finding(clk_.tick, "event", bad.what());
                }
                return;
            }
            case AdvEvent::Kind::declare_halt:
                if (!pcf_.declare(ev.e, ev.x, ev.v, clk_.tick))
                    finding(clk_.tick, "event", "halting value redeclared");
                return;
        }
    }

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

    void apply_action(const TickRecord& rec) {
        Tick t = rec.tick;
        for (std::uint64_t id : rec.cancelled) {
            auto it = fols_.find(id);
            if (it == fols_.end() || !it->second.alive) {
                finding(t, "cancellation", "cancelled id " + std::to_string(id) +
                                               " is not an alive follower");
                continue;
            }
            it->second.alive = false;
            resolve_id(id, "not-in-E", t, "cancelled");
        }
        const ActionRec& a = rec.action;
        if (a.kind == "none") return;
        if (a.kind == "violation") {
            violated_ = true;
            return;
        }
        if (a.kind == "appoint") {
            if (a.assigns.size() != 2) {
                finding(t, "bookkeeping", "appointment must assign both sides");
                return;
            }
            SFol f;
            f.id = a.x;
            f.e = a.e;
            f.chain = {0, 1};
            f.top = 1;
            for (const auto& as : a.assigns) {
                f.per[as.side] = SBox{as.priv, as.k, as.alpha, as.region, t, std::nullopt, 0};
                psi_[as.side].write(as.region, t, t);
            }
            fols_.emplace(f.id, std::move(f));
            return;
        }
        auto it = fols_.find(a.x);
        if (it == fols_.end() || !it->second.alive) {
            finding(t, "action-choice", "promoted id is not an alive follower");
            return;
        }
        SFol& f = it->second;
        std::uint64_t pot_before = 0;
        for (const auto& [key, b] : f.per) pot_before += b.k + 1;
        f.promotions += 1;
        if (f.promotions > 2 * f.e)
            finding(t, "attention-bound", "follower " + std::to_string(f.id) +
                                              " moved more than 2e times");
        if (a.kind == "promote1") {
            f.alive = false;
            f.enumerated = true;
            E_.insert(f.id);
            satisfied_.insert(a.e);
            if (!rec.enumerated || *rec.enumerated != f.id)
                finding(t, "enumerated", "promote1 without a matching enumeration record");
            resolve_id(f.id, "in-E", t, "enumerated");
            return;
        }
        if (rec.enumerated)
            finding(t, "enumerated", "enumeration recorded without a final promotion");
        int old_top = f.top;
        if (a.kind == "promote2") {
            f.per.erase(1);
            f.chain = {0};
            f.top = 0;
        } else {  // promote3
            if (a.assigns.size() != 1 || a.assigns[0].side != a.side) {
                finding(t, "bookkeeping", "regular promotion must assign the top side");
                return;
            }
            const BoxAssignRec& as = a.assigns[0];
            if (f.per.at(a.side).k != as.k + 1)
                finding(t, "monotone-level", "level must drop by exactly one");
            f.per[a.side] = SBox{false, as.k, as.alpha, as.region, t, std::nullopt, 0};
            f.top = 1 - a.side;
            psi_[a.side].write(as.region, t, t);
        }
        if (f.top == old_top)
            finding(t, "top-change", "top unchanged across a promotion");
        std::uint64_t pot_after = 0;
        for (const auto& [key, b] : f.per) pot_after += b.k + 1;
        if (pot_after >= pot_before)
            finding(t, "potential", "attention potential did not strictly decrease");
    }

    void check_bookkeeping(const TickRecord& rec, const ClassMap& now) {
        const ActionRec& a = rec.action;
        if (a.kind == "appoint" || a.kind == "promote3") {
            for (const auto& as : a.assigns) {
                if (as.priv) {
                    if (as.side != 1 || as.k != a.e ||
                        as.region != singleton(layout_.private_slot(a.e)))
                        finding(rec.tick, "bookkeeping", "private slot mismatch");
                    continue;
                }
                auto [beta, m] = lemma_pick(as.side, as.k, now);
                if (!m) {
                    finding(rec.tick, "bookkeeping",
                            "no free digit at side " + std::to_string(as.side) + " level " +
                                std::to_string(as.k) + " where the log assigned one");
                    continue;
                }
                Address alpha = beta;
                alpha.push_back(*m);
                if (beta != as.beta || *m != as.m || alpha != as.alpha)
                    finding(rec.tick, "bookkeeping",
                            "stem/digit mismatch at side " + std::to_string(as.side) +
                                " level " + std::to_string(as.k) + ": expected " +
                                address_str(alpha) + ", log has " + address_str(as.alpha));
                if (as.beta.size() > as.k)
                    finding(rec.tick, "bookkeeping", "stem longer than the level");
                if (layout_.carve(as.k, as.alpha) != as.region)
                    finding(rec.tick, "bookkeeping",
                            "region does not match the assigned address");
            }
        } else if (a.kind == "violation") {
            auto [beta, m] = lemma_pick(a.side, a.viol_k, now);
            std::uint64_t bound = digit_bound(a.viol_k);
            if (m.has_value() || beta != a.viol_beta || bound != a.viol_bound) {
                finding(rec.tick, "bookkeeping",
                        "logged violation is not genuine: a digit was available");
                return;
            }
            finding(rec.tick, "bookkeeping-violation",
                    "digits exhausted at side " + std::to_string(a.side) + " level " +
                        std::to_string(a.viol_k) + " under stem " + address_str(a.viol_beta) +
                        " with bound " + std::to_string(bound));
        }
    }

    void sweep(const TickRecord& rec) {
        Tick t = rec.tick;
        // Follower shape, one at a time.
        const SFol* prev = nullptr;
        for (const auto& [id, f] : fols_) {
            if (!f.alive) continue;
            bool two = f.per.count(1) != 0;
            std::uint64_t k0 = f.per.at(0).k;
            bool shape;
            if (!two)
                shape = f.top == 0 && k0 == sc_.c;
            else {
                std::uint64_t k1 = f.per.at(1).k;
                shape = (k0 == k1 && f.top == 1) || (k0 == k1 + 1 && f.top == 0);
            }
            if (!shape)
                finding(t, "level-shape", "follower " + std::to_string(id) +
                                              " violates the level/top shape");
            for (const auto& [key, b] : f.per) {
                if (b.k < sc_.c || b.k > f.e) {
                    finding(t, "level-shape", "level outside [c, e] for follower " +
                                                  std::to_string(id));
                    continue;
                }
                if (b.priv) {
                    if (key != 1 || f.top != 1 || f.promotions != 0 || b.t != id ||
                        b.k != f.e || b.region != singleton(layout_.private_slot(f.e)))
                        finding(t, "region-shape", "private slot rules broken for follower " +
                                                       std::to_string(id));
                } else if (layout_.carve(b.k, b.alpha) != b.region) {
                    finding(t, "region-shape", "box region detached from its address for " +
                                                   std::to_string(id));
                }
            }
            if (prev) {
                if (prev->e > f.e)
                    finding(t, "priority-order", "older follower owned by a weaker requirement");
                Tick pmax = 0, fmin = ~Tick{0};
                for (const auto& [key, b] : prev->per) pmax = std::max(pmax, b.t);
                for (const auto& [key, b] : f.per) fmin = std::min(fmin, b.t);
                if (pmax >= fmin)
                    finding(t, "t-ordering", "timestamps out of priority order between " +
                                                 std::to_string(prev->id) + " and " +
                                                 std::to_string(id));
            }
            prev = &f;
        }
        class_sweep(t);
        if (rec.is_stage && !violated_) traced_sweep(t);
    }

    void class_sweep(Tick t) {
        for (int i = 0; i < 2; ++i)
            for (std::uint64_t k = sc_.c; k <= sc_.e_max; ++k) {
                std::vector<const SFol*> ks, ls, gs;
                for (const auto& [id, f] : fols_) {
                    if (!f.alive || !f.per.count(i)) continue;
                    const SBox& b = f.per.at(i);
                    if (b.k != k) continue;
                    if (f.top == i)
                        (b.priv ? ls : ks).push_back(&f);
                    else
                        gs.push_back(&f);
                }
                if (ks.size() > k)
                    finding(t, "bound-K", "K exceeds k at side " + std::to_string(i) +
                                              " level " + std::to_string(k));
                if (ls.size() > k + 1)
                    finding(t, "bound-L", "L exceeds k+1 at side " + std::to_string(i) +
                                              " level " + std::to_string(k));
                if (Big(gs.size()) >= cap_mp(k))
                    finding(t, "bound-G", "G reaches the capacity at side " +
                                              std::to_string(i) + " level " + std::to_string(k));
                max_L_seen_ = std::max(max_L_seen_, ls.size());
                sharp_L_held_ = sharp_L_held_ && ls.size() <= k;
                // Non-private addresses: distinct, forest-shaped, K-chained.
                std::vector<const SFol*> occ(ks);
                occ.insert(occ.end(), gs.begin(), gs.end());
                for (std::size_t x = 0; x < occ.size(); ++x)
                    for (std::size_t y = x + 1; y < occ.size(); ++y)
                        if (occ[x]->per.at(i).alpha == occ[y]->per.at(i).alpha)
                            finding(t, "alpha-injectivity",
                                    "address " + address_str(occ[x]->per.at(i).alpha) +
                                        " held twice at side " + std::to_string(i));
                for (const SFol* f : occ) {
                    const Address& al = f->per.at(i).alpha;
                    for (std::size_t len = 1; len < al.size(); ++len) {
                        Address pre(al.begin(), al.begin() + static_cast<long>(len));
                        bool owned = false;
                        for (const SFol* g : ks)
                            if (g->id < f->id && g->per.at(i).alpha == pre) owned = true;
                        if (!owned)
                            finding(t, "box-forest",
                                    "prefix " + address_str(pre) + " of " + address_str(al) +
                                        " is not a stronger parked follower's box");
                    }
                }
                for (std::size_t x = 1; x < ks.size(); ++x) {
                    const Address& a0 = ks[x - 1]->per.at(i).alpha;
                    const Address& a1 = ks[x]->per.at(i).alpha;
                    bool pre = a0.size() < a1.size() &&
                               std::equal(a0.begin(), a0.end(), a1.begin());
                    if (!pre)
                        finding(t, "k-chain", "parked addresses not nested by priority at side " +
                                                  std::to_string(i));
                }
                // Marker stability for sleeping classes.
                for (const SFol* f : gs)
                    if (!psi_constant_on(psi_[i], f->per.at(i).region, f->per.at(i).t))
                        finding(t, "psi-stability", "marker rewritten under waiting follower " +
                                                        std::to_string(f->id));
                for (const SFol* f : ls)
                    if (!realised(*f) &&
                        !psi_constant_on(psi_[i], f->per.at(i).region, f->per.at(i).t))
                        finding(t, "psi-stability",
                                "marker rewritten under unrealised follower " +
                                    std::to_string(f->id));
            }
    }

    // At a stage, every follower whose box survived from the previous tick
    // must have its timestamp traced across the whole box.
    void traced_sweep(Tick t) {
        for (const auto& [id, f] : fols_) {
            if (!f.alive) continue;
            for (const auto& [key, b] : f.per)
                if (b.t < t && !trace_[key].v_use(region_mp(b), b.t).has_value())
                    finding(t, "traced-at-stages",
                            "follower " + std::to_string(id) + " untraced on side " +
                                std::to_string(key) + " at a stage");
        }
    }

    std::vector<SetSizeRec> shadow_sizes() const {
        std::vector<SetSizeRec> out;
        for (int i = 0; i < 2; ++i)
            for (std::uint64_t k = sc_.c; k <= sc_.e_max; ++k) {
                SetSizeRec row;
                row.side = i;
                row.k = k;
                for (const auto& [id, f] : fols_) {
                    if (!f.alive || !f.per.count(i)) continue;
                    const SBox& b = f.per.at(i);
                    if (b.k != k) continue;
                    if (f.top == i)
                        b.priv ? ++row.L : ++row.K;
                    else
                        ++row.G;
                }
                if (row.K || row.L || row.G) out.push_back(row);
            }
        return out;
    }

    void tick(const TickRecord& rec) {
        if (done_) {
            finding(rec.tick, "schema", "record after the run ended");
            return;
        }
        if (rec.tick != clk_.tick + 1)
            finding(rec.tick, "schema", "tick numbers must be consecutive");
        clk_.tick = rec.tick;
        if (!rec.walk.empty() || !rec.tau_stages.empty())
            finding(rec.tick, "schema", "two-sided record carries a tree walk");

        std::vector<AdmitRec> adm;
        std::vector<AxiomResult> axr;
        for (int i = 0; i < 2; ++i)
            for (std::uint64_t id : trace_[i].retry_pending(clk_))
                adm.push_back(AdmitRec{static_cast<std::uint64_t>(i), 0, id});
        for (const auto& ev : rec.events) apply_event(ev, adm, axr);
        if (adm != rec.admitted)
            finding(rec.tick, "admission", "delay-queue admissions diverge");
        if (axr.size() != rec.axiom_results.size())
            finding(rec.tick, "admission", "axiom result count diverges");
        else
            for (std::size_t i = 0; i < axr.size(); ++i)
                if (axr[i].id != rec.axiom_results[i].id ||
                    axr[i].accepted != rec.axiom_results[i].accepted)
                    finding(rec.tick, "admission", "axiom acceptance diverges");

        for (int i = 0; i < 2; ++i) {
            Interval dom{0, layout_.domain_end()};
            if (obligations_met(psi_[i], trace_[i], dom)) last_ok_[i] = rec.tick;
        }
        bool st = last_ok_[0] == rec.tick && last_ok_[1] == rec.tick;
        if (st != rec.is_stage)
            finding(rec.tick, "stage-flag", st ? "stage logged as a gap tick"
                                               : "gap tick logged as a stage");

        if (rec.is_stage) {
            refresh_satisfied();
            compare_action(rec, decide());
            apply_action(rec);
            std::vector<std::uint64_t> sat(satisfied_.begin(), satisfied_.end());
            if (sat != rec.satisfied)
                finding(rec.tick, "satisfied", "satisfied set diverges");
            if (!violated_) {
                for (auto& [id, f] : fols_) {
                    if (!f.alive) continue;
                    for (auto& [key, b] : f.per) {
                        b.v_last = trace_[key].v_use(region_mp(b), b.t);
                        b.v_stage = rec.tick;
                    }
                }
                last_stage_ = rec.tick;
                ++stage_count_;
                try_resolve(rec.tick);
            }
        } else {
            if (rec.action.kind != "none")
                finding(rec.tick, "action-choice", "action taken outside a stage");
            if (!rec.cancelled.empty())
                finding(rec.tick, "cancellation", "cancellation outside a stage");
            if (!rec.satisfied.empty() || rec.enumerated)
                finding(rec.tick, "satisfied", "stage-only fields filled on a gap tick");
        }

        if (shadow_sizes() != rec.sizes)
            finding(rec.tick, "set-sizes", "per-cell class sizes diverge");

        ClassMap now = classes();
        check_bookkeeping(rec, now);
        sweep(rec);
        if (rec.tick == window_lo_) omega_snapshot_ = now;
        if (rec.tick > window_lo_ && omega_constant_ && !(omega_snapshot_ == now)) {
            omega_constant_ = false;
            omega_break_ = rec.tick;
        }
        record_occupancy(rec);
        prev_classes_ = std::move(now);
        if (violated_) done_ = true;
    }

    void try_resolve(Tick t) {
        for (const auto& [id, f] : fols_) {
            if (!f.alive || t <= id) continue;
            for (const auto& [key, b] : f.per) {
                if (c_res_.count({id, key}) || id_res_.count(id)) continue;
                if (b.v_last && !fut_[key].change_below_after(*b.v_last, t))
                    resolve_stable(id, key, t);
            }
        }
    }

    void finish() {
        rep_.violation = violated_;
        if (violated_ != log_.violated)
            finding(horizon_, "summary", "violation flag diverges from the log summary");
        if (std::vector<std::uint64_t>(E_.begin(), E_.end()) != log_.enumerated)
            finding(horizon_, "summary", "enumeration list diverges from the log summary");
        if (std::vector<std::uint64_t>(satisfied_.begin(), satisfied_.end()) != log_.satisfied)
            finding(horizon_, "summary", "satisfied list diverges from the log summary");
        Tick gap = sc_.compliance_gap;
        bool defaulted = false;
        for (int i = 0; i < 2; ++i)
            if (psi_[i].anything_written() && last_ok_[i] + gap <= horizon_) {
                defaulted = true;
                auto unmet = std::vector<UnmetObligation>{};
                Interval dom{0, layout_.domain_end()};
                obligations_met(psi_[i], trace_[i], dom, &unmet);
                std::string w = unmet.empty() ? "" : " first witness z=" + big_str(unmet[0].witness);
                notice(horizon_, "classification",
                       "side " + std::to_string(i) + " obligations broken since tick " +
                           std::to_string(last_ok_[i]) + ";" + w);
            }
        rep_.classification = defaulted ? "defaulted" : "compliant-at-horizon";

        if (violated_)
            notice(horizon_, "reduction-skipped", "run was stopped by a capacity violation");
        else if (defaulted)
            notice(horizon_, "reduction-skipped", "run is classified defaulted");
        else
            emit_reduction();

        if (!omega_constant_)
            notice(omega_break_, "omega-window",
                   "limit classes changed inside the final window; horizon figures "
                   "are approximations");

        json st;
        st["engine"] = "mp";
        st["ticks"] = horizon_;
        st["stages"] = stage_count_;
        st["last_stage"] = last_stage_;
        st["final_E"] = std::vector<std::uint64_t>(E_.begin(), E_.end());
        st["satisfied"] = std::vector<std::uint64_t>(satisfied_.begin(), satisfied_.end());
        st["followers"] = fols_.size();
        st["findings_total"] = findings_total_;
        st["max_sizes"] = max_sizes_json("side");
        for (auto& row : st["max_sizes"]) {
            std::uint64_t k = row.at("k").get<std::uint64_t>();
            row["K_bound"] = k;
            row["L_bound"] = k + 1;
            row["G_bound"] = big_str(cap_mp(k) - 1);
        }
        st["final_sizes"] = json::array();
        for (const auto& s : shadow_sizes())
            st["final_sizes"].push_back(
                json{{"side", s.side}, {"k", s.k}, {"K", s.K}, {"L", s.L}, {"G", s.G}});
        st["sharper_L_bound_held"] = sharp_L_held_ ? 1 : 0;
        st["max_L_seen"] = max_L_seen_;
        st["omega_window_lo"] = window_lo_;
        st["omega_constant"] = omega_constant_ ? 1 : 0;
        st["explicit_entries_logged"] = log_.explicit_entries;
        st["explicit_entries_shadow"] = ctr_.explicit_z_entries;
        st["region_records_shadow"] = ctr_.region_records;
        json ac = json::object();
        for (const auto& [k, n] : action_counts_) ac[k] = n;
        st["actions"] = ac;
        st["series"] = series_;
        rep_.stats = std::move(st);
        if (findings_total_ > rep_.findings.size())
            notice(horizon_, "truncated",
                   std::to_string(findings_total_ - rep_.findings.size()) +
                       " further findings omitted from the list");
    }

    void emit_reduction() {
        std::uint64_t exceeded1 = 0;
        for (const auto& [id, f] : fols_) {
            for (int key = 0; key < 2; ++key) {
                ReduceAnswer a = answer_for(f, key, E_.count(id) != 0);
                if (a.verdict == "exceeded-horizon") {
                    bool open = f.alive && f.top == 0 && f.per.at(0).k == sc_.c &&
                                !f.per.at(0).priv;
                    if (key == 1 && open) {
                        a.excepted = true;
                        a.note = "open permission; parked at the floor";
                        ++exceeded1;
                    }
                } else if (!a.matches_final) {
                    finding(horizon_, "reduction",
                            "procedure answer for x=" + std::to_string(id) + " side " +
                                std::to_string(key) + " contradicts the final set");
                }
                rep_.reduction.push_back(std::move(a));
            }
        }
        if (exceeded1 > sc_.c)
            finding(horizon_, "reduction",
                    "open-permission budget exceeded: " + std::to_string(exceeded1) +
                        " followers stuck on side 1 with c=" + std::to_string(sc_.c));
    }

    LayoutMP layout_;
    Clock clk_;
    AllocCounters ctr_;
    OracleSet oracle_[2];
    std::vector<TraceState> trace_;
    std::vector<PsiState> psi_;
    PcfState pcf_;
    std::map<std::uint64_t, SFol> fols_;
    std::set<std::uint64_t> E_;
    std::set<std::uint64_t> satisfied_;
    std::vector<std::uint64_t> active_;
    FutureAdds fut_[2];
    ClassMap prev_classes_;
    Tick last_ok_[2] = {0, 0};
    Tick last_stage_ = 0;
    std::uint64_t stage_count_ = 0;
    std::size_t max_L_seen_ = 0;
    bool sharp_L_held_ = true;
    bool violated_ = false;
    bool done_ = false;
};

// ---------------------------------------------------------------------------
// Tree auditor.

class AuditorTree : public AuditorBase {
public:
    explicit AuditorTree(const RunLog& log)
        : AuditorBase(log),
          tree_(sc_.depth, sc_.requirements.empty()
                               ? default_requirements(sc_.depth, sc_.c)
                               : scenario_requirements(sc_)) {
        for (int tau : tree_.negative_nodes()) funcs_.insert(tree_.node(tau).e);
        for (std::size_t i = 0; i < tree_.size(); ++i)
            if (tree_.node(static_cast<int>(i)).kind == ReqKind::positive)
                pos_funcs_.insert(tree_.node(static_cast<int>(i)).e);
        for (std::uint64_t e : funcs_) {
            layout_.emplace(e, LayoutTree(&tree_, e));
            oracle_[e];
        }
        for (int tau : tree_.negative_nodes()) {
            const TreeNode& n = tree_.node(tau);
            const LayoutTree& lay = layout_.at(n.e);
            std::vector<std::pair<Interval, std::uint64_t>> table;
            for (std::uint64_t k = n.length(); k <= sc_.depth; ++k)
                table.push_back({lay.interval_of(tau, k), std::max<std::uint64_t>(k, 1)});
            trace_.emplace(tau, TraceState("audit-n" + std::to_string(tau), table, &ctr_));
            psi_.emplace(tau, PsiState(&ctr_));
        }
        std::map<std::uint64_t, std::set<std::uint64_t>> seen;
        for (const auto& rec : log_.ticks)
            for (const auto& ev : rec.events)
                if (ev.kind == AdvEvent::Kind::enumerate_set && funcs_.count(ev.oracle) &&
                    seen[ev.oracle].insert(ev.elem).second)
                    fut_[ev.oracle].adds.push_back({rec.tick, ev.elem});
        for (auto& [e, f] : fut_) f.finalize();
    }

    AuditReport run() {
        for (const auto& rec : log_.ticks) {
            try {
                tick(rec);
            } catch (const std::exception& bad) {
                finding(rec.tick, "schema", std::string("malformed record: ") + bad.what());
            }
        }
        finish();
        return std::move(rep_);
    }

private:
    struct Expected {
        std::string kind = "none";
        std::uint64_t e = 0, x = 0;
        int node = -1, new_top = -1;
        std::vector<int> walk, tau_stages;
        std::vector<std::uint64_t> cancels;
    };

    bool realised(const SFol& f) const {
        auto v = pcf_.value(f.e, f.id);
        return v.has_value() && *v == 0;
    }

    bool permitted(const SFol& f) const {
        const SBox& b = f.per.at(f.top);
        if (!b.v_last.has_value()) return true;
        std::uint64_t e = tree_.node(f.top).e;
        return oracle_.at(e).changed_below(*b.v_last, b.v_stage, clk_.tick);
    }

    std::uint64_t digit_bound(std::uint64_t k) const {
        std::uint64_t a = cap_tree(k).convert_to<std::uint64_t>();
        if (sc_.capacity_override) return std::min(sc_.capacity_override, a);
        return a;
    }

    Interval region_of(const SFol& f, int tau) const {
        const SBox& b = f.per.at(tau);
        const TreeNode& n = tree_.node(tau);
        if (b.priv) return singleton(layout_.at(n.e).private_slot(tau, b.k, f.sigma));
        return layout_.at(n.e).carve(tau, b.k, b.alpha);
    }

    bool tau_stage_test(int tau) const {
        const TreeNode& n = tree_.node(tau);
        for (const Interval& iv : layout_.at(n.e).column_of(tau))
            if (!obligations_met(psi_.at(tau), trace_.at(tau), iv)) return false;
        return true;
    }

    ClassMap classes() const {
        ClassMap out;
        for (const auto& [id, f] : fols_) {
            if (!f.alive) continue;
            for (const auto& [tau, b] : f.per) {
                ClassRow& row = out[{tau, b.k}];
                if (f.top == tau)
                    (b.priv ? row.L : row.K).insert(id);
                else
                    row.G.insert(id);
            }
        }
        return out;
    }

    std::pair<Address, std::optional<std::uint64_t>> lemma_pick(
        int tau, std::uint64_t k, const ClassMap& now) const {
        auto cell = std::make_pair(tau, k);
        ClassRow empty;
        const ClassRow& cn = now.count(cell) ? now.at(cell) : empty;
        const ClassRow& cp = prev_classes_.count(cell) ? prev_classes_.at(cell) : empty;
        std::set<std::uint64_t> kbar = set_meet(cn.K, cp.K);
        Address beta;
        if (!kbar.empty()) beta = fols_.at(*kbar.rbegin()).per.at(tau).alpha;
        if (beta.size() > k) return {beta, std::nullopt};
        std::set<std::uint64_t> kg_now(cn.K), kg_prev(cp.K);
        kg_now.insert(cn.G.begin(), cn.G.end());
        kg_prev.insert(cp.G.begin(), cp.G.end());
        std::set<std::uint64_t> blocked;
        for (std::uint64_t y : set_meet(kg_now, kg_prev)) {
            const Address& al = fols_.at(y).per.at(tau).alpha;
            if (al.size() != beta.size() + 1) continue;
            if (!std::equal(beta.begin(), beta.end(), al.begin())) continue;
            blocked.insert(al.back());
        }
        for (std::uint64_t m = 0; m < digit_bound(k); ++m)
            if (!blocked.count(m)) return {beta, m};
        return {beta, std::nullopt};
    }

    Address beta_at(int tau, std::uint64_t k, const std::set<std::uint64_t>& gone,
                    std::uint64_t actor) const {
        const SFol* best = nullptr;
        for (const auto& [id, f] : fols_) {
            if (!f.alive || id == actor || gone.count(id)) continue;
            if (f.top != tau) continue;
            const SBox& b = f.per.at(tau);
            if (b.k != k || b.priv) continue;
            if (!best || id > best->id) best = &f;
        }
        return best ? best->per.at(tau).alpha : Address{};
    }

    std::optional<std::uint64_t> pick_m(int tau, std::uint64_t k, const Address& beta,
                                        const std::set<std::uint64_t>& gone,
                                        std::uint64_t actor) const {
        if (beta.size() > k) return std::nullopt;
        std::set<std::uint64_t> blocked;
        for (const auto& [id, f] : fols_) {
            if (!f.alive || id == actor || gone.count(id) || !f.per.count(tau)) continue;
            const SBox& b = f.per.at(tau);
            if (b.k != k || b.priv) continue;
            if (b.alpha.size() != beta.size() + 1) continue;
            if (!std::equal(beta.begin(), beta.end(), b.alpha.begin())) continue;
            blocked.insert(b.alpha.back());
        }
        for (std::uint64_t m = 0; m < digit_bound(k); ++m)
            if (!blocked.count(m)) return m;
        return std::nullopt;
    }

    int top_select(const SFol& f) const {
        std::uint64_t maxk = 0;
        for (int tau : f.chain) maxk = std::max(maxk, f.per.at(tau).k);
        int best = -1;
        for (int tau : f.chain)
            if (f.per.at(tau).k == maxk) best = tau;
        return best;
    }

    Expected decide() {
        Expected ex;
        Tick s = clk_.tick;
        int cur = tree_.root();
        while (true) {
            ex.walk.push_back(cur);
            const TreeNode& n = tree_.node(cur);
            bool at_end = n.length() == s || tree_.is_leaf(cur);
            if (n.kind == ReqKind::negative) {
                if (tau_stage_test(cur)) {
                    ex.tau_stages.push_back(cur);
                    const SFol* pick = nullptr;
                    for (const auto& [id, f] : fols_) {
                        if (!f.alive || f.top != cur) continue;
                        if (realised(f) && permitted(f)) {
                            pick = &f;
                            break;
                        }
                    }
                    if (pick) return expect_promote(ex, *pick, cur);
                    if (at_end) return expect_end(ex, cur);
                    cur = n.child_inf;
                } else {
                    if (at_end) return expect_end(ex, cur);
                    cur = n.child_fin;
                }
            } else {
                bool unrealised = false;
                for (const auto& [id, f] : fols_)
                    if (f.alive && f.sigma == cur && !realised(f)) unrealised = true;
                if (satisfied_.count(n.e) || unrealised) {
                    if (at_end) return ex;
                    cur = n.child_only;
                } else {
                    return expect_appoint(ex, cur);
                }
            }
        }
    }

    Expected expect_end(Expected ex, int rho) {
        const std::string& rn = tree_.node(rho).name;
        for (const auto& [id, f] : fols_)
            if (f.alive && StrategyTree::right_of(tree_.node(f.sigma).name, rn))
                ex.cancels.push_back(id);
        return ex;
    }

    Expected expect_appoint(Expected ex, int sigma) {
        const TreeNode& sn = tree_.node(sigma);
        ex.e = sn.e;
        ex.x = clk_.tick;
        ex.node = sigma;
        std::set<std::uint64_t> gone;
        for (const auto& [id, f] : fols_)
            if (f.alive && StrategyTree::weaker_node(tree_.node(f.sigma).name, sn.name)) {
                ex.cancels.push_back(id);
                gone.insert(id);
            }
        std::vector<int> chain = tree_.inf_chain(sigma);
        std::uint64_t kk = sn.length();
        for (int tau : chain) {
            if (tau == chain.back()) continue;
            if (!pick_m(tau, kk, beta_at(tau, kk, gone, 0), gone, 0)) {
                ex.kind = "violation";
                ex.node = tau;
                return ex;
            }
        }
        ex.kind = "appoint";
        ex.new_top = chain.back();
        return ex;
    }

    Expected expect_promote(Expected ex, const SFol& f, int tau) {
        ex.e = f.e;
        ex.x = f.id;
        ex.node = tau;
        std::set<std::uint64_t> gone;
        for (const auto& [id, g] : fols_)
            if (g.alive && id > f.id) {
                ex.cancels.push_back(id);
                gone.insert(id);
            }
        if (f.chain.size() == 1) {
            ex.kind = "promote1";
            for (const auto& [id, g] : fols_)
                if (g.alive && g.sigma == f.sigma && id != f.id && !gone.count(id))
                    ex.cancels.push_back(id);
            return ex;
        }
        if (f.per.at(tau).k == tree_.node(tau).length()) {
            ex.kind = "promote2";
            SFol probe = f;
            probe.chain.erase(std::find(probe.chain.begin(), probe.chain.end(), tau));
            probe.per.erase(tau);
            ex.new_top = top_select(probe);
            return ex;
        }
        std::uint64_t knew = f.per.at(tau).k - 1;
        if (!pick_m(tau, knew, beta_at(tau, knew, gone, f.id), gone, f.id)) {
            ex.kind = "violation";
            return ex;
        }
        ex.kind = "promote3";
        SFol probe = f;
        probe.per[tau].k = knew;
        ex.new_top = top_select(probe);
        return ex;
    }

    void compare_action(const TickRecord& rec, const Expected& ex) {
        const ActionRec& a = rec.action;
        if (ex.walk != rec.walk)
            finding(rec.tick, "walk", "accessible path diverges");
        if (ex.tau_stages != rec.tau_stages)
            finding(rec.tick, "tau-stages", "expansionary set diverges");
        if (ex.kind != a.kind || (ex.kind != "none" && (ex.e != a.e || ex.x != a.x)) ||
            ex.node != a.node || (ex.new_top >= 0 && ex.new_top != a.new_top))
            finding(rec.tick, "action-choice",
                    "expected " + ex.kind + " x=" + std::to_string(ex.x) + " at node " +
                        std::to_string(ex.node) + ", log has " + a.kind + " x=" +
                        std::to_string(a.x) + " at node " + std::to_string(a.node));
        if (ex.cancels != rec.cancelled)
            finding(rec.tick, "cancellation",
                    "expected " + std::to_string(ex.cancels.size()) +
                        " cancellations, log lists " + std::to_string(rec.cancelled.size()));
    }

    void apply_event(const AdvEvent& ev, std::vector<AdmitRec>& adm,
                     std::vector<AxiomResult>& axr) {
        switch (ev.kind) {
            case AdvEvent::Kind::enumerate_set: {
                if (!funcs_.count(ev.oracle)) {
                    finding(clk_.tick, "event", "no guarded functional with that index");
                    return;
                }
                if (oracle_[ev.oracle].add(ev.elem, clk_))
                    for (int tau : tree_.negative_nodes_for(ev.oracle))
                        for (std::uint64_t id : trace_.at(tau).on_oracle_element(ev.elem, clk_))
                            adm.push_back(
                                AdmitRec{ev.oracle, static_cast<std::uint64_t>(tau), id});
                return;
            }
            case AdvEvent::Kind::post_axiom: {
                if (!funcs_.count(ev.trace_e)) {
                    finding(clk_.tick, "event", "no guarded functional with that index");
                    return;
                }
                try {
                    int tau = layout_.at(ev.trace_e).node_of(ev.region.lo);
                    if (tree_.node(tau).c != ev.trace_c) {
                        finding(clk_.tick, "event", "trace index does not own the column");
                        return;
                    }
                    bool ok = false;
                    std::uint64_t id =
                        trace_.at(tau).post(ev.region, ev.value, ev.use, clk_, ok);
                    axr.push_back(AxiomResult{id, ok});
                } catch (const std::invalid_argument& bad) {
                    finding(clk_.tick, "event", bad.what());
                }
                return;
            }
            case AdvEvent::Kind::declare_halt:
                if (!pcf_.declare(ev.e, ev.x, ev.v, clk_.tick))
                    finding(clk_.tick, "event", "halting value redeclared");
                return;
        }
    }

    void refresh_satisfied() {
        for (std::uint64_t e : pos_funcs_) {
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

    void apply_action(const TickRecord& rec) {
        Tick t = rec.tick;
        for (std::uint64_t id : rec.cancelled) {
            auto it = fols_.find(id);
            if (it == fols_.end() || !it->second.alive) {
                finding(t, "cancellation", "cancelled id " + std::to_string(id) +
                                               " is not an alive follower");
                continue;
            }
            it->second.alive = false;
            resolve_id(id, "not-in-E", t, "cancelled");
        }
        const ActionRec& a = rec.action;
        if (a.kind == "none") return;
        if (a.kind == "violation") {
            violated_ = true;
            return;
        }
        if (a.kind == "appoint") {
            if (a.node < 0 || a.node >= static_cast<int>(tree_.size()) ||
                tree_.node(a.node).kind != ReqKind::positive) {
                finding(t, "action-choice", "appointment at a node that cannot diagonalize");
                return;
            }
            std::vector<int> chain = tree_.inf_chain(a.node);
            if (a.assigns.size() != chain.size()) {
                finding(t, "bookkeeping", "appointment must assign every guarded ancestor");
                return;
            }
            for (std::size_t i = 0; i < chain.size(); ++i)
                if (a.assigns[i].node != chain[i])
                    finding(t, "bookkeeping",
                            "assignment order does not follow the guarded ancestors");
            SFol f;
            f.id = a.x;
            f.e = tree_.node(a.node).e;
            f.sigma = a.node;
            f.chain = chain;
            f.top = chain.empty() ? -1 : chain.back();
            for (const auto& as : a.assigns) {
                f.per[as.node] = SBox{as.priv, as.k, as.alpha, as.region, t, std::nullopt, 0};
                psi_.at(as.node).write(as.region, t, t);
            }
            if (a.new_top != f.top)
                finding(t, "action-choice", "appointed top is not the longest guarded node");
            fols_.emplace(f.id, std::move(f));
            return;
        }
        auto it = fols_.find(a.x);
        if (it == fols_.end() || !it->second.alive) {
            finding(t, "action-choice", "promoted id is not an alive follower");
            return;
        }
        SFol& f = it->second;
        std::uint64_t pot_before = 0;
        for (const auto& [tau, b] : f.per) pot_before += b.k + 1;
        f.promotions += 1;
        if (a.kind == "promote1") {
            f.alive = false;
            f.enumerated = true;
            E_.insert(f.id);
            satisfied_.insert(a.e);
            if (!rec.enumerated || *rec.enumerated != f.id)
                finding(t, "enumerated", "promote1 without a matching enumeration record");
            resolve_id(f.id, "in-E", t, "enumerated");
            return;
        }
        if (rec.enumerated)
            finding(t, "enumerated", "enumeration recorded without a final promotion");
        int old_top = f.top;
        if (!f.per.count(a.node)) {
            finding(t, "action-choice", "promotion at a node the follower does not answer to");
            return;
        }
        if (a.kind == "promote2") {
            if (f.per.at(a.node).k != tree_.node(a.node).length())
                finding(t, "action-choice", "node dropped above its floor level");
            if (a.node != f.chain.back())
                finding(t, "level-shape", "node dropped while not the longest guard");
            f.chain.erase(std::find(f.chain.begin(), f.chain.end(), a.node));
            f.per.erase(a.node);
            f.top = top_select(f);
        } else {  // promote3
            if (a.assigns.size() != 1 || a.assigns[0].node != a.node) {
                finding(t, "bookkeeping", "regular promotion must assign the acting column");
                return;
            }
            const BoxAssignRec& as = a.assigns[0];
            if (f.per.at(a.node).k != as.k + 1)
                finding(t, "monotone-level", "level must drop by exactly one");
            if (as.k < tree_.node(a.node).length())
                finding(t, "monotone-level", "level dropped below the node's floor");
            f.per[a.node] = SBox{false, as.k, as.alpha, as.region, t, std::nullopt, 0};
            f.top = top_select(f);
            psi_.at(a.node).write(as.region, t, t);
        }
        if (a.new_top != f.top)
            finding(t, "action-choice", "logged top does not match the reselection rule");
        if (f.top == old_top)
            finding(t, "top-change", "top unchanged across a promotion");
        std::uint64_t pot_after = 0;
        for (const auto& [tau, b] : f.per) pot_after += b.k + 1;
        if (pot_after >= pot_before)
            finding(t, "potential", "attention potential did not strictly decrease");
    }

    void check_bookkeeping(const TickRecord& rec, const ClassMap& now) {
        const ActionRec& a = rec.action;
        if (a.kind == "appoint" || a.kind == "promote3") {
            for (const auto& as : a.assigns) {
                const TreeNode& n = tree_.node(as.node);
                if (as.priv) {
                    Big z = layout_.at(n.e).private_slot(as.node, as.k, a.node);
                    if (as.region != singleton(z))
                        finding(rec.tick, "bookkeeping", "private slot mismatch at node " +
                                                             std::to_string(as.node));
                    continue;
                }
                auto [beta, m] = lemma_pick(as.node, as.k, now);
                if (!m) {
                    finding(rec.tick, "bookkeeping",
                            "no free digit at node " + std::to_string(as.node) + " level " +
                                std::to_string(as.k) + " where the log assigned one");
                    continue;
                }
                Address alpha = beta;
                alpha.push_back(*m);
                if (beta != as.beta || *m != as.m || alpha != as.alpha)
                    finding(rec.tick, "bookkeeping",
                            "stem/digit mismatch at node " + std::to_string(as.node) +
                                " level " + std::to_string(as.k) + ": expected " +
                                address_str(alpha) + ", log has " + address_str(as.alpha));
                if (as.beta.size() > as.k)
                    finding(rec.tick, "bookkeeping", "stem longer than the level");
                if (layout_.at(n.e).carve(as.node, as.k, as.alpha) != as.region)
                    finding(rec.tick, "bookkeeping",
                            "region does not match the assigned address");
            }
        } else if (a.kind == "violation") {
            auto [beta, m] = lemma_pick(a.node, a.viol_k, now);
            std::uint64_t bound = digit_bound(a.viol_k);
            if (m.has_value() || beta != a.viol_beta || bound != a.viol_bound) {
                finding(rec.tick, "bookkeeping",
                        "logged violation is not genuine: a digit was available");
                return;
            }
            finding(rec.tick, "bookkeeping-violation",
                    "digits exhausted at node " + std::to_string(a.node) + " level " +
                        std::to_string(a.viol_k) + " under stem " + address_str(a.viol_beta) +
                        " with bound " + std::to_string(bound));
        }
    }

    void sweep(const TickRecord& rec) {
        Tick t = rec.tick;
        const SFol* prev = nullptr;
        for (const auto& [id, f] : fols_) {
            if (!f.alive) continue;
            // Level shape around the top: ancestors of the top hold the top's
            // level, strict descendants sit one below.
            std::uint64_t ktop = f.per.at(f.top).k;
            const std::string& topname = tree_.node(f.top).name;
            for (int tau : f.chain) {
                const std::string& nm = tree_.node(tau).name;
                const SBox& b = f.per.at(tau);
                std::uint64_t want =
                    StrategyTree::is_prefix(nm, topname) ? ktop : ktop - 1;
                if (b.k != want)
                    finding(t, "level-shape", "levels out of shape for follower " +
                                                  std::to_string(id));
                if (b.k < tree_.node(tau).length() || b.k > sc_.depth)
                    finding(t, "level-shape", "level outside the column for follower " +
                                                  std::to_string(id));
                if (b.priv && (tau != f.top || f.promotions != 0 || b.t != id))
                    finding(t, "region-shape", "private slot rules broken for follower " +
                                                   std::to_string(id));
                if (region_of(f, tau) != b.region)
                    finding(t, "region-shape", "box region detached from its address for " +
                                                   std::to_string(id));
            }
            if (prev) {
                if (StrategyTree::weaker_node(tree_.node(prev->sigma).name,
                                              tree_.node(f.sigma).name))
                    finding(t, "priority-order", "older follower owned by a weaker node");
                Tick pmax = 0, fmin = ~Tick{0};
                for (const auto& [tau, b] : prev->per) pmax = std::max(pmax, b.t);
                for (const auto& [tau, b] : f.per) fmin = std::min(fmin, b.t);
                if (pmax >= fmin)
                    finding(t, "t-ordering", "timestamps out of priority order between " +
                                                 std::to_string(prev->id) + " and " +
                                                 std::to_string(id));
            }
            prev = &f;
        }
        class_sweep(t);
        if (!violated_) traced_sweep(rec);
    }

    void class_sweep(Tick t) {
        for (int tau : tree_.negative_nodes()) {
            std::uint64_t floor = tree_.node(tau).length();
            for (std::uint64_t k = floor; k <= sc_.depth; ++k) {
                std::vector<const SFol*> ks, ls, gs;
                for (const auto& [id, f] : fols_) {
                    if (!f.alive || !f.per.count(tau)) continue;
                    const SBox& b = f.per.at(tau);
                    if (b.k != k) continue;
                    if (f.top == tau)
                        (b.priv ? ls : ks).push_back(&f);
                    else
                        gs.push_back(&f);
                }
                if (ks.size() > k)
                    finding(t, "bound-K", "K exceeds k at node " + std::to_string(tau) +
                                              " level " + std::to_string(k));
                if (Big(ks.size() + ls.size()) > cap_b(k))
                    finding(t, "bound-KL", "K and L together exceed b(k) at node " +
                                               std::to_string(tau));
                if (Big(gs.size()) >= cap_tree(k))
                    finding(t, "bound-G", "G reaches the capacity at node " +
                                              std::to_string(tau) + " level " +
                                              std::to_string(k));
                for (int sigma : tree_.theta(tau, k)) {
                    std::size_t at_sigma = 0;
                    for (const SFol* f : ls)
                        if (f->sigma == sigma) ++at_sigma;
                    if (at_sigma > k + 1)
                        finding(t, "bound-L", "private followers of one node exceed k+1 at " +
                                                  std::to_string(tau));
                }
                std::vector<const SFol*> occ(ks);
                occ.insert(occ.end(), gs.begin(), gs.end());
                for (std::size_t x = 0; x < occ.size(); ++x)
                    for (std::size_t y = x + 1; y < occ.size(); ++y)
                        if (occ[x]->per.at(tau).alpha == occ[y]->per.at(tau).alpha)
                            finding(t, "alpha-injectivity",
                                    "address " + address_str(occ[x]->per.at(tau).alpha) +
                                        " held twice at node " + std::to_string(tau));
                for (const SFol* f : occ) {
                    const Address& al = f->per.at(tau).alpha;
                    for (std::size_t len = 1; len < al.size(); ++len) {
                        Address pre(al.begin(), al.begin() + static_cast<long>(len));
                        bool owned = false;
                        for (const SFol* g : ks)
                            if (g->id < f->id && g->per.at(tau).alpha == pre) owned = true;
                        if (!owned)
                            finding(t, "box-forest",
                                    "prefix " + address_str(pre) + " of " + address_str(al) +
                                        " is not a stronger parked follower's box");
                    }
                }
                for (std::size_t x = 1; x < ks.size(); ++x) {
                    const Address& a0 = ks[x - 1]->per.at(tau).alpha;
                    const Address& a1 = ks[x]->per.at(tau).alpha;
                    bool pre = a0.size() < a1.size() &&
                               std::equal(a0.begin(), a0.end(), a1.begin());
                    if (!pre)
                        finding(t, "k-chain", "parked addresses not nested by priority at node " +
                                                  std::to_string(tau));
                }
                for (const SFol* f : gs)
                    if (!psi_constant_on(psi_.at(tau), f->per.at(tau).region, f->per.at(tau).t))
                        finding(t, "psi-stability", "marker rewritten under waiting follower " +
                                                        std::to_string(f->id));
                for (const SFol* f : ls)
                    if (!realised(*f) &&
                        !psi_constant_on(psi_.at(tau), f->per.at(tau).region, f->per.at(tau).t))
                        finding(t, "psi-stability",
                                "marker rewritten under unrealised follower " +
                                    std::to_string(f->id));
            }
        }
    }

    void traced_sweep(const TickRecord& rec) {
        for (int tau : rec.tau_stages)
            for (const auto& [id, f] : fols_) {
                if (!f.alive || !f.per.count(tau)) continue;
                const SBox& b = f.per.at(tau);
                if (b.t < rec.tick && !trace_.at(tau).v_use(region_of(f, tau), b.t).has_value())
                    finding(rec.tick, "traced-at-stages",
                            "follower " + std::to_string(id) + " untraced at node " +
                                std::to_string(tau) + " on an expansionary tick");
            }
    }

    std::vector<SetSizeRec> shadow_sizes() const {
        std::vector<SetSizeRec> out;
        for (int tau : tree_.negative_nodes())
            for (std::uint64_t k = tree_.node(tau).length(); k <= sc_.depth; ++k) {
                SetSizeRec row;
                row.node = tau;
                row.k = k;
                for (const auto& [id, f] : fols_) {
                    if (!f.alive || !f.per.count(tau)) continue;
                    const SBox& b = f.per.at(tau);
                    if (b.k != k) continue;
                    if (f.top == tau)
                        b.priv ? ++row.L : ++row.K;
                    else
                        ++row.G;
                }
                if (row.K || row.L || row.G) out.push_back(row);
            }
        return out;
    }

    void tick(const TickRecord& rec) {
        if (done_) {
            finding(rec.tick, "schema", "record after the run ended");
            return;
        }
        if (rec.tick != clk_.tick + 1)
            finding(rec.tick, "schema", "tick numbers must be consecutive");
        clk_.tick = rec.tick;
        if (!rec.is_stage)
            finding(rec.tick, "schema", "tree records always walk, so every tick is flagged");

        std::vector<AdmitRec> adm;
        std::vector<AxiomResult> axr;
        for (int tau : tree_.negative_nodes())
            for (std::uint64_t id : trace_.at(tau).retry_pending(clk_))
                adm.push_back(AdmitRec{tree_.node(tau).e, static_cast<std::uint64_t>(tau), id});
        for (const auto& ev : rec.events) apply_event(ev, adm, axr);
        if (adm != rec.admitted)
            finding(rec.tick, "admission", "delay-queue admissions diverge");
        if (axr.size() != rec.axiom_results.size())
            finding(rec.tick, "admission", "axiom result count diverges");
        else
            for (std::size_t i = 0; i < axr.size(); ++i)
                if (axr[i].id != rec.axiom_results[i].id ||
                    axr[i].accepted != rec.axiom_results[i].accepted)
                    finding(rec.tick, "admission", "axiom acceptance diverges");

        for (int tau : tree_.negative_nodes())
            if (tau_stage_test(tau)) last_ok_[tau] = rec.tick;

        refresh_satisfied();
        compare_action(rec, decide());
        apply_action(rec);
        std::vector<std::uint64_t> sat(satisfied_.begin(), satisfied_.end());
        if (sat != rec.satisfied)
            finding(rec.tick, "satisfied", "satisfied set diverges");
        if (!violated_) {
            for (int tau : rec.tau_stages) {
                last_ts_[tau] = rec.tick;
                ++ts_count_[tau];
                for (auto& [id, f] : fols_) {
                    if (!f.alive || !f.per.count(tau)) continue;
                    SBox& b = f.per.at(tau);
                    b.v_last = trace_.at(tau).v_use(region_of(f, tau), b.t);
                    b.v_stage = rec.tick;
                }
            }
            try_resolve(rec);
        }

        if (shadow_sizes() != rec.sizes)
            finding(rec.tick, "set-sizes", "per-cell class sizes diverge");

        ClassMap now = classes();
        check_bookkeeping(rec, now);
        sweep(rec);
        if (rec.tick >= window_lo_)
            for (int nidx : rec.walk) window_nodes_.insert(nidx);
        if (rec.tick == window_lo_) omega_snapshot_ = now;
        if (rec.tick > window_lo_ && omega_constant_ && !(omega_snapshot_ == now)) {
            omega_constant_ = false;
            omega_break_ = rec.tick;
        }
        record_occupancy(rec);
        prev_classes_ = std::move(now);
        if (violated_) done_ = true;
    }

    void try_resolve(const TickRecord& rec) {
        for (int tau : rec.tau_stages) {
            std::uint64_t e = tree_.node(tau).e;
            if (!fut_.count(e)) continue;
            for (const auto& [id, f] : fols_) {
                if (!f.alive || rec.tick <= id || !f.per.count(tau)) continue;
                if (c_res_.count({id, tau}) || id_res_.count(id)) continue;
                const SBox& b = f.per.at(tau);
                if (b.v_last && !fut_.at(e).change_below_after(*b.v_last, rec.tick))
                    resolve_stable(id, tau, rec.tick);
            }
        }
    }

    std::vector<int> compute_true_path() const {
        std::vector<int> path;
        int cur = tree_.root();
        if (!window_nodes_.count(cur)) return path;
        path.push_back(cur);
        while (true) {
            const TreeNode& n = tree_.node(cur);
            int next = -1;
            if (n.kind == ReqKind::negative) {
                if (n.child_inf >= 0 && window_nodes_.count(n.child_inf))
                    next = n.child_inf;
                else if (n.child_fin >= 0 && window_nodes_.count(n.child_fin))
                    next = n.child_fin;
            } else if (n.child_only >= 0 && window_nodes_.count(n.child_only)) {
                next = n.child_only;
            }
            if (next < 0) return path;
            path.push_back(next);
            cur = next;
        }
    }

    void finish() {
        rep_.violation = violated_;
        if (violated_ != log_.violated)
            finding(horizon_, "summary", "violation flag diverges from the log summary");
        if (std::vector<std::uint64_t>(E_.begin(), E_.end()) != log_.enumerated)
            finding(horizon_, "summary", "enumeration list diverges from the log summary");
        if (std::vector<std::uint64_t>(satisfied_.begin(), satisfied_.end()) != log_.satisfied)
            finding(horizon_, "summary", "satisfied list diverges from the log summary");
        Tick gap = sc_.compliance_gap;
        bool defaulted = false;
        for (int tau : tree_.negative_nodes())
            if (psi_.at(tau).anything_written() && last_ok_[tau] + gap <= horizon_) {
                defaulted = true;
                notice(horizon_, "classification",
                       "column of node " + std::to_string(tau) +
                           " obligations broken since tick " + std::to_string(last_ok_[tau]));
            }
        rep_.classification = defaulted ? "defaulted" : "compliant-at-horizon";
        rep_.true_path = compute_true_path();
        notice(horizon_, "true-path",
               "true path approximated from walks over ticks " + std::to_string(window_lo_) +
                   ".." + std::to_string(horizon_) + "; late stabilizers may be misread");

        if (violated_)
            notice(horizon_, "reduction-skipped", "run was stopped by a capacity violation");
        else if (defaulted)
            notice(horizon_, "reduction-skipped", "run is classified defaulted");
        else {
            emit_reduction();
            check_diagonalization();
        }

        if (!omega_constant_)
            notice(omega_break_, "omega-window",
                   "limit classes changed inside the final window; horizon figures "
                   "are approximations");

        json st;
        st["engine"] = "tree";
        st["ticks"] = horizon_;
        st["final_E"] = std::vector<std::uint64_t>(E_.begin(), E_.end());
        st["satisfied"] = std::vector<std::uint64_t>(satisfied_.begin(), satisfied_.end());
        st["followers"] = fols_.size();
        st["findings_total"] = findings_total_;
        st["max_sizes"] = max_sizes_json("node");
        for (auto& row : st["max_sizes"]) {
            std::uint64_t k = row.at("k").get<std::uint64_t>();
            row["K_bound"] = k;
            row["L_bound"] = k + 1;
            row["G_bound"] = big_str(cap_tree(k) - 1);
        }
        st["final_sizes"] = json::array();
        for (const auto& s : shadow_sizes())
            st["final_sizes"].push_back(
                json{{"node", s.node}, {"k", s.k}, {"K", s.K}, {"L", s.L}, {"G", s.G}});
        json tsc = json::object();
        for (const auto& [tau, n] : ts_count_) tsc[std::to_string(tau)] = n;
        st["tau_stage_counts"] = tsc;
        st["true_path_names"] = json::array();
        for (int nidx : rep_.true_path) {
            const std::string& nm = tree_.node(nidx).name;
            st["true_path_names"].push_back(nm.empty() ? "<>" : nm);
        }
        st["omega_window_lo"] = window_lo_;
        st["omega_constant"] = omega_constant_ ? 1 : 0;
        st["explicit_entries_logged"] = log_.explicit_entries;
        st["explicit_entries_shadow"] = ctr_.explicit_z_entries;
        st["region_records_shadow"] = ctr_.region_records;
        json ac = json::object();
        for (const auto& [k, n] : action_counts_) ac[k] = n;
        st["actions"] = ac;
        st["series"] = series_;
        rep_.stats = std::move(st);
        if (findings_total_ > rep_.findings.size())
            notice(horizon_, "truncated",
                   std::to_string(findings_total_ - rep_.findings.size()) +
                       " further findings omitted from the list");
    }

    // One designated node per guarded functional on the true path: those
    // whose expansionary child the path takes.
    std::vector<int> designated() const {
        std::vector<int> out;
        for (std::size_t i = 0; i + 1 < rep_.true_path.size(); ++i) {
            int tau = rep_.true_path[i];
            const TreeNode& n = tree_.node(tau);
            if (n.kind == ReqKind::negative && rep_.true_path[i + 1] == n.child_inf)
                out.push_back(tau);
        }
        return out;
    }

    void emit_reduction() {
        for (int tau : designated()) {
            std::string ti = tree_.node(tau).name + "i";
            for (const auto& [id, f] : fols_) {
                ReduceAnswer a = answer_for(f, tau, E_.count(id) != 0);
                if (a.verdict == "exceeded-horizon") {
                    const std::string& sn = tree_.node(f.sigma).name;
                    if ((StrategyTree::is_prefix(sn, ti) && sn != ti) ||
                        StrategyTree::right_of(ti, sn)) {
                        a.excepted = true;
                        a.note = "appointed by a stronger node";
                    } else if (StrategyTree::right_of(sn, ti)) {
                        a.excepted = true;
                        a.note = "appointed right of the designated branch";
                    } else if (f.alive && f.top != tau &&
                               StrategyTree::is_prefix(tree_.node(f.top).name,
                                                       tree_.node(tau).name) &&
                               tree_.node(f.top).name != tree_.node(tau).name &&
                               f.per.at(f.top).k <= tree_.node(tau).length()) {
                        a.excepted = true;
                        a.note = "open permission at a shorter guard";
                    }
                } else if (!a.matches_final) {
                    finding(horizon_, "reduction",
                            "procedure answer for x=" + std::to_string(id) + " at node " +
                                std::to_string(tau) + " contradicts the final set");
                }
                rep_.reduction.push_back(std::move(a));
            }
        }
    }

    void check_diagonalization() {
        for (int nidx : rep_.true_path) {
            const TreeNode& n = tree_.node(nidx);
            if (n.kind != ReqKind::positive) continue;
            if (satisfied_.count(n.e)) continue;
            bool unrealised_waiting = false;
            for (const auto& [id, f] : fols_)
                if (f.alive && f.sigma == nidx && !realised(f)) unrealised_waiting = true;
            if (unrealised_waiting)
                notice(horizon_, "satisfied-by-unrealised",
                       "node " + std::to_string(nidx) +
                           " waits on a follower that never converged; the requirement "
                           "holds vacuously");
            else
                finding(horizon_, "diagonalization",
                        "node " + std::to_string(nidx) +
                            " lies on the true path with no witness and no waiting follower");
        }
    }

    StrategyTree tree_;
    Clock clk_;
    AllocCounters ctr_;
    std::set<std::uint64_t> funcs_, pos_funcs_;
    std::map<std::uint64_t, LayoutTree> layout_;
    std::map<std::uint64_t, OracleSet> oracle_;
    std::map<int, TraceState> trace_;
    std::map<int, PsiState> psi_;
    PcfState pcf_;
    std::map<std::uint64_t, SFol> fols_;
    std::set<std::uint64_t> E_;
    std::set<std::uint64_t> satisfied_;
    std::map<std::uint64_t, FutureAdds> fut_;
    ClassMap prev_classes_;
    std::map<int, Tick> last_ok_;
    std::map<int, Tick> last_ts_;
    std::map<int, std::uint64_t> ts_count_;
    std::set<int> window_nodes_;
    bool violated_ = false;
    bool done_ = false;
};

}  // namespace detail_audit

inline AuditReport audit_run(const RunLog& log) {
    validate_scenario(log.scenario);
    if (log.scenario.engine == "mp") return detail_audit::AuditorMP(log).run();
    return detail_audit::AuditorTree(log).run();
}

}  // namespace boxsim
