#pragma once

// Tree engine. Strategies live on a finite tree: negative nodes guard one
// trace each and branch on whether their trace keeps up, positive nodes
// appoint followers. Every tick walks the accessible path from the root.
//
// At a negative node tau the walk asks whether the tick is a tau-stage:
// every marker value written in tau's column must currently be traced
// there. On a tau-stage the strongest realised follower whose top is tau
// and whose recorded computation is gone (or was never recorded) is
// promoted, which ends the walk; otherwise the walk follows the
// expansionary edge. Off a tau-stage it follows the other edge. A positive
// node appoints a fresh follower once all of its own are realised and its
// requirement is still open; the new follower answers to every negative
// ancestor on whose expansionary edge the node sits, holding the private
// slot at the longest of them and bookkeeping-chosen boxes at the rest.
//
// Promotion cases, with tau the follower's top node:
//   1. tau is the only node left: the follower enters E and the appointing
//      node's other followers are cancelled.
//   2. the level at tau already equals |tau|: tau is dropped from the
//      follower's node set and the permission stays open.
//   3. otherwise: the level at tau drops by one, a fresh box is chosen by
//      the bookkeeping rule in tau's column, and the marker is rewritten.
// After cases 2 and 3 the top moves to the longest node whose level is
// maximal. A walk that runs out of nodes (depth reached or leaf) ends the
// tick; ending at a negative node cancels followers of nodes to its right.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "boxsim/carve.hpp"
#include "boxsim/cea.hpp"
#include "boxsim/engine_mp.hpp"
#include "boxsim/events.hpp"
#include "boxsim/follower.hpp"
#include "boxsim/ints.hpp"
#include "boxsim/layout_tree.hpp"
#include "boxsim/stage_log.hpp"
#include "boxsim/tree.hpp"

namespace boxsim {

struct TreeConfig {
    std::uint64_t depth = 2;
    std::uint64_t c = 1;  // trace index used by the default requirement list
    std::vector<Requirement> requirements;  // empty: alternating default list
    std::uint64_t capacity_override = 0;    // 0: canonical capacities
};

class TreeCore {
public:
    explicit TreeCore(const TreeConfig& cfg)
        : cfg_(cfg),
          tree_(cfg.depth, cfg.requirements.empty()
                               ? default_requirements(cfg.depth, cfg.c)
                               : cfg.requirements) {
        for (int tau : tree_.negative_nodes()) funcs_.insert(tree_.node(tau).e);
        for (std::size_t i = 0; i < tree_.size(); ++i)
            if (tree_.node(static_cast<int>(i)).kind == ReqKind::positive)
                pos_funcs_.insert(tree_.node(static_cast<int>(i)).e);
        for (std::uint64_t e : funcs_) {
            layout_.emplace(e, LayoutTree(&tree_, e));
            oracle_[e];  // every guarded functional has a set from the start
        }
        for (int tau : tree_.negative_nodes()) {
            const TreeNode& n = tree_.node(tau);
            const LayoutTree& lay = layout_.at(n.e);
            std::vector<std::pair<Interval, std::uint64_t>> table;
            for (std::uint64_t k = n.length(); k <= cfg_.depth; ++k)
                table.push_back({lay.interval_of(tau, k), std::max<std::uint64_t>(k, 1)});
            std::string label = "T" + std::to_string(n.e) + "," + std::to_string(n.c) +
                                "@" + (n.name.empty() ? "<>" : n.name);
            trace_.emplace(tau, TraceState(label, table, &ctr_));
            psi_.emplace(tau, PsiState(&ctr_));
        }
    }

    // The layouts hold pointers into tree_, so the engine is pinned in place.
    TreeCore(const TreeCore&) = delete;
    TreeCore& operator=(const TreeCore&) = delete;

    const TreeConfig& config() const { return cfg_; }
    const StrategyTree& tree() const { return tree_; }
    const Clock& clock() const { return clk_; }
    const std::set<std::uint64_t>& functionals() const { return funcs_; }
    const LayoutTree& layout(std::uint64_t e) const { return layout_.at(e); }
    const OracleSet& oracle(std::uint64_t e) const { return oracle_.at(e); }
    const TraceState& trace(int tau) const { return trace_.at(tau); }
    const PsiState& psi(int tau) const { return psi_.at(tau); }
    const PcfState& pcf() const { return pcf_; }
    const std::vector<FollowerTree>& followers() const { return followers_; }
    const std::set<std::uint64_t>& enumerated() const { return E_; }
    const std::set<std::uint64_t>& satisfied() const { return satisfied_; }
    const AllocCounters& counters() const { return ctr_; }
    bool violated() const { return violated_; }

    Tick last_tau_stage(int tau) const {
        auto it = last_ts_.find(tau);
        return it == last_ts_.end() ? 0 : it->second;
    }

    const FollowerTree* find_follower(std::uint64_t id) const {
        for (const auto& f : followers_)
            if (f.id == id) return &f;
        return nullptr;
    }

    Interval region_of(const FollowerTree& f, int tau) const {
        const SideState& s = f.per.at(tau);
        const TreeNode& n = tree_.node(tau);
        if (s.box.priv)
            return singleton(layout_.at(n.e).private_slot(tau, s.box.k, f.sigma));
        return layout_.at(n.e).carve(tau, s.box.k, s.box.alpha);
    }

    bool realised(const FollowerTree& f) const {
        auto v = pcf_.value(tree_.node(f.sigma).e, f.id);
        return v.has_value() && *v == 0;
    }

    // The oracle half of permission, judged against the computation recorded
    // at the top node's previous expansionary tick. The walk only consults
    // this on a tau-stage of the top node, completing the definition.
    bool permitted(const FollowerTree& f) const {
        const SideState& s = f.per.at(f.top);
        if (!s.v_last.has_value()) return true;
        std::uint64_t e = tree_.node(f.top).e;
        return oracle_.at(e).changed_below(*s.v_last, s.v_stage, clk_.tick);
    }

    bool tau_stage_test(int tau) const {
        const TreeNode& n = tree_.node(tau);
        for (const Interval& iv : layout_.at(n.e).column_of(tau))
            if (!obligations_met(psi_.at(tau), trace_.at(tau), iv)) return false;
        return true;
    }

    std::vector<UnmetObligation> unmet_obligations(int tau) const {
        std::vector<UnmetObligation> out;
        const TreeNode& n = tree_.node(tau);
        for (const Interval& iv : layout_.at(n.e).column_of(tau))
            obligations_met(psi_.at(tau), trace_.at(tau), iv, &out);
        return out;
    }

    // One tick. Events first, then the walk from the root.
    TickRecord step(const std::vector<AdvEvent>& events) {
        if (violated_) throw EngineError("run already stopped by a violation");
        clk_.tick += 1;
        TickRecord rec;
        rec.tick = clk_.tick;
        rec.events = events;

        for (int tau : tree_.negative_nodes())
            for (std::uint64_t id : trace_.at(tau).retry_pending(clk_))
                rec.admitted.push_back(
                    AdmitRec{tree_.node(tau).e, static_cast<std::uint64_t>(tau), id});
        for (const auto& ev : events) apply_event(ev, rec);

        rec.is_stage = true;
        refresh_satisfied();
        run_walk(rec);
        for (std::uint64_t e : satisfied_) rec.satisfied.push_back(e);
        if (!violated_) update_computations(rec.tau_stages);
        rec.sizes = set_sizes();
        return rec;
    }

    // Bookkeeping stem in tau's column at level k: box address of the
    // weakest surviving follower parked there on top, the actor excluded.
    Address compute_beta(int tau, std::uint64_t k, const FollowerTree* actor) const {
        const FollowerTree* best = nullptr;
        for (const auto& f : followers_) {
            if (!f.alive() || &f == actor || f.top != tau) continue;
            const SideState& s = f.per.at(tau);
            if (s.k != k || s.box.priv) continue;
            if (!best || f.id > best->id) best = &f;
        }
        return best ? best->per.at(tau).box.alpha : Address{};
    }

    std::vector<std::uint64_t> blocked_digits(int tau, std::uint64_t k, const Address& beta,
                                              const FollowerTree* actor) const {
        std::vector<std::uint64_t> out;
        for (const auto& f : followers_) {
            if (!f.alive() || &f == actor || !f.answers_to(tau)) continue;
            const SideState& s = f.per.at(tau);
            if (s.k != k || s.box.priv) continue;
            const Address& al = s.box.alpha;
            if (al.size() != beta.size() + 1) continue;
            if (!std::equal(beta.begin(), beta.end(), al.begin())) continue;
            out.push_back(al.back());
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    std::uint64_t digit_bound(std::uint64_t k) const {
        std::uint64_t a = cap_tree(k).convert_to<std::uint64_t>();
        if (cfg_.capacity_override) return std::min<std::uint64_t>(cfg_.capacity_override, a);
        return a;
    }

    std::optional<std::uint64_t> select_m(int tau, std::uint64_t k, const Address& beta,
                                          const FollowerTree* actor) const {
        if (beta.size() > k) return std::nullopt;
        auto blocked = blocked_digits(tau, k, beta, actor);
        std::uint64_t bound = digit_bound(k);
        for (std::uint64_t m = 0; m < bound; ++m)
            if (!std::binary_search(blocked.begin(), blocked.end(), m)) return m;
        return std::nullopt;
    }

    // Per-(node, level) follower classes, as in the two-sided engine: K on
    // top in a carved box, L on top in the private slot, G answering to the
    // node with the top elsewhere.
    std::vector<SetSizeRec> set_sizes() const {
        std::vector<SetSizeRec> out;
        for (int tau : tree_.negative_nodes())
            for (std::uint64_t k = tree_.node(tau).length(); k <= cfg_.depth; ++k) {
                SetSizeRec row;
                row.node = tau;
                row.k = k;
                for (const auto& f : followers_) {
                    if (!f.alive() || !f.answers_to(tau)) continue;
                    const SideState& s = f.per.at(tau);
                    if (s.k != k) continue;
                    if (f.top == tau)
                        s.box.priv ? ++row.L : ++row.K;
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
                if (!funcs_.count(ev.oracle))
                    throw EngineError("no negative node guards functional " +
                                      std::to_string(ev.oracle));
                if (oracle_[ev.oracle].add(ev.elem, clk_))
                    for (int tau : tree_.negative_nodes_for(ev.oracle))
                        for (std::uint64_t id : trace_.at(tau).on_oracle_element(ev.elem, clk_))
                            rec.admitted.push_back(
                                AdmitRec{ev.oracle, static_cast<std::uint64_t>(tau), id});
                break;
            }
            case AdvEvent::Kind::post_axiom: {
                if (!funcs_.count(ev.trace_e))
                    throw EngineError("no negative node guards functional " +
                                      std::to_string(ev.trace_e));
                int tau = layout_.at(ev.trace_e).node_of(ev.region.lo);
                if (tree_.node(tau).c != ev.trace_c)
                    throw EngineError("trace index does not own the axiom's column");
                bool ok = false;
                std::uint64_t id = trace_.at(tau).post(ev.region, ev.value, ev.use, clk_, ok);
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

    void cancel(FollowerTree& f) {
        f.status = FollowerStatus::cancelled;
        f.status_tick = clk_.tick;
    }

    FollowerTree* strongest_permitted_at(int tau) {
        FollowerTree* best = nullptr;
        for (auto& f : followers_) {
            if (!f.alive() || f.top != tau) continue;
            if (!realised(f) || !permitted(f)) continue;
            if (!best || f.id < best->id) best = &f;
        }
        return best;
    }

    void run_walk(TickRecord& rec) {
        Tick s = clk_.tick;
        int cur = tree_.root();
        while (true) {
            rec.walk.push_back(cur);
            const TreeNode& n = tree_.node(cur);
            bool at_end = n.length() == s || tree_.is_leaf(cur);
            if (n.kind == ReqKind::negative) {
                if (tau_stage_test(cur)) {
                    rec.tau_stages.push_back(cur);
                    last_ts_[cur] = s;
                    if (FollowerTree* x = strongest_permitted_at(cur)) {
                        do_promote(*x, cur, rec);
                        return;
                    }
                    if (at_end) {
                        cancel_right_of(cur, rec);
                        return;
                    }
                    cur = n.child_inf;
                } else {
                    if (at_end) {
                        cancel_right_of(cur, rec);
                        return;
                    }
                    cur = n.child_fin;
                }
            } else {
                bool unrealised = false;
                for (const auto& f : followers_)
                    if (f.alive() && f.sigma == cur && !realised(f)) unrealised = true;
                if (satisfied_.count(n.e) || unrealised) {
                    if (at_end) return;  // no action; the walk just ends here
                    cur = n.child_only;
                } else {
                    do_appoint(cur, rec);
                    return;
                }
            }
        }
    }

    void cancel_right_of(int rho, TickRecord& rec) {
        const std::string& rn = tree_.node(rho).name;
        for (auto& f : followers_)
            if (f.alive() && StrategyTree::right_of(tree_.node(f.sigma).name, rn)) {
                cancel(f);
                rec.cancelled.push_back(f.id);
            }
    }

    // Longest node whose level is maximal; levels fall along the chain, so
    // the last node attaining the maximum wins.
    int top_select(const FollowerTree& f) const {
        std::uint64_t maxk = 0;
        for (int t : f.chain) maxk = std::max(maxk, f.per.at(t).k);
        int best = -1;
        for (int t : f.chain)
            if (f.per.at(t).k == maxk) best = t;
        return best;
    }

    void record_violation(TickRecord& rec, std::uint64_t e, std::uint64_t x, int tau,
                          std::uint64_t k, const Address& beta, const FollowerTree* actor) {
        violated_ = true;
        rec.action.kind = "violation";
        rec.action.e = e;
        rec.action.x = x;
        rec.action.node = tau;
        rec.action.viol_k = k;
        rec.action.viol_beta = beta;
        rec.action.viol_blocked = blocked_digits(tau, k, beta, actor);
        rec.action.viol_bound = digit_bound(k);
    }

    void do_appoint(int sigma, TickRecord& rec) {
        const TreeNode& sn = tree_.node(sigma);
        for (auto& g : followers_)
            if (g.alive() && StrategyTree::weaker_node(tree_.node(g.sigma).name, sn.name)) {
                cancel(g);
                rec.cancelled.push_back(g.id);
            }
        std::vector<int> chain = tree_.inf_chain(sigma);
        int top = chain.back();
        std::uint64_t kk = sn.length();

        // Choose every box before committing anything, so a bookkeeping
        // violation leaves no partial follower behind.
        struct Pick {
            int tau;
            bool priv;
            Address alpha, beta;
            std::uint64_t m = 0;
            Interval region;
        };
        std::vector<Pick> picks;
        for (int tau : chain) {
            const TreeNode& tn = tree_.node(tau);
            if (tau == top) {
                Big z = layout_.at(tn.e).private_slot(tau, kk, sigma);
                picks.push_back(Pick{tau, true, {}, {}, 0, singleton(z)});
                continue;
            }
            Address beta = compute_beta(tau, kk, nullptr);
            auto m = select_m(tau, kk, beta, nullptr);
            if (!m) {
                record_violation(rec, sn.e, clk_.tick, tau, kk, beta, nullptr);
                return;
            }
            Address alpha = beta;
            alpha.push_back(*m);
            picks.push_back(
                Pick{tau, false, alpha, beta, *m, layout_.at(tn.e).carve(tau, kk, alpha)});
        }

        FollowerTree f;
        f.id = clk_.tick;
        f.sigma = sigma;
        f.chain = chain;
        f.top = top;
        rec.action.kind = "appoint";
        rec.action.e = sn.e;
        rec.action.x = f.id;
        rec.action.node = sigma;
        rec.action.new_top = top;
        for (const auto& p : picks) {
            f.per[p.tau] =
                SideState{kk, BoxRef{p.priv, kk, p.alpha}, clk_.tick, std::nullopt, 0};
            psi_.at(p.tau).write(p.region, clk_.tick, clk_.tick);
            rec.action.assigns.push_back(
                BoxAssignRec{-1, p.tau, p.priv, kk, p.alpha, p.beta, p.m, p.region});
        }
        followers_.push_back(std::move(f));
    }

    void do_promote(FollowerTree& f, int tau, TickRecord& rec) {
        for (auto& g : followers_)
            if (g.alive() && g.id > f.id) {
                cancel(g);
                rec.cancelled.push_back(g.id);
            }
        std::uint64_t e_pos = tree_.node(f.sigma).e;
        rec.action.e = e_pos;
        rec.action.x = f.id;
        rec.action.node = tau;
        f.promotions += 1;

        if (f.chain.size() == 1) {
            // Case 1: the last node has cleared the follower.
            E_.insert(f.id);
            f.status = FollowerStatus::enumerated;
            f.status_tick = clk_.tick;
            for (auto& g : followers_)
                if (g.alive() && g.sigma == f.sigma) {
                    cancel(g);
                    rec.cancelled.push_back(g.id);
                }
            satisfied_.insert(e_pos);
            rec.action.kind = "promote1";
            rec.enumerated = f.id;
            return;
        }
        if (f.per.at(tau).k == tree_.node(tau).length()) {
            // Case 2: the level at tau sits at its floor; drop the node.
            f.chain.erase(std::find(f.chain.begin(), f.chain.end(), tau));
            f.per.erase(tau);
            f.top = top_select(f);
            rec.action.kind = "promote2";
            rec.action.new_top = f.top;
            return;
        }
        // Case 3: descend one level in tau's column.
        std::uint64_t knew = f.per.at(tau).k - 1;
        Address beta = compute_beta(tau, knew, &f);
        auto m = select_m(tau, knew, beta, &f);
        if (!m) {
            record_violation(rec, e_pos, f.id, tau, knew, beta, &f);
            return;
        }
        Address alpha = beta;
        alpha.push_back(*m);
        f.per[tau] = SideState{knew, BoxRef{false, knew, alpha}, clk_.tick, std::nullopt, 0};
        f.top = top_select(f);
        Interval box = layout_.at(tree_.node(tau).e).carve(tau, knew, alpha);
        psi_.at(tau).write(box, clk_.tick, clk_.tick);
        rec.action.kind = "promote3";
        rec.action.new_top = f.top;
        rec.action.assigns.push_back(
            BoxAssignRec{-1, tau, false, knew, alpha, beta, *m, box});
    }

    // Computations refresh per column, at that column's expansionary ticks.
    void update_computations(const std::vector<int>& tau_stages) {
        for (int tau : tau_stages)
            for (auto& f : followers_) {
                if (!f.alive() || !f.answers_to(tau)) continue;
                SideState& s = f.per.at(tau);
                s.v_last = trace_.at(tau).v_use(region_of(f, tau), s.t);
                s.v_stage = clk_.tick;
            }
    }

    TreeConfig cfg_;
    StrategyTree tree_;
    Clock clk_;
    AllocCounters ctr_;
    std::set<std::uint64_t> funcs_;      // guarded functionals (negative nodes)
    std::set<std::uint64_t> pos_funcs_;  // diagonalized functionals (positive nodes)
    std::map<std::uint64_t, LayoutTree> layout_;
    std::map<std::uint64_t, OracleSet> oracle_;
    std::map<int, TraceState> trace_;
    std::map<int, PsiState> psi_;
    PcfState pcf_;
    std::vector<FollowerTree> followers_;
    std::set<std::uint64_t> E_;
    std::set<std::uint64_t> satisfied_;
    std::map<int, Tick> last_ts_;
    bool violated_ = false;
};

}  // namespace boxsim
