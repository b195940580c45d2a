#pragma once

#include <algorithm>
#include <chrono>
#include <map>
#include <stdexcept>
#include <vector>

#include "pamdp/lump.hpp"
#include "pamdp/mdp.hpp"
#include "pamdp/numeric.hpp"
#include "pamdp/partition.hpp"

namespace pamdp {

/// Union of the per-action enabled sets: the states from which the model can
/// act at all. Non-blocking models (and every pruned planning model) are
/// closed under enabled successors inside this set.
template <Domain D>
PseudoAntichain<D> mdp_carrier(const MonotonicMdp<D>& mdp) {
    PseudoAntichain<D> u = pa_empty<D>();
    for (int s = 0; s < mdp.num_sigma(); ++s) u = pa_union(mdp.dom, u, mdp.states_enabling(s));
    return u;
}

/// States from which some strategy reaches the goal with probability one:
/// nu Y . mu X . (APre(Y, X) or G), all on pseudo-antichains. APre(Y, X)
/// holds when some action keeps every supported successor in Y and sends at
/// least one into X.
template <Domain D>
PseudoAntichain<D> proper_states(const MonotonicMdp<D>& mdp, const PseudoAntichain<D>& goal) {
    const D& dom = mdp.dom;
    auto apre = [&](const PseudoAntichain<D>& y, const PseudoAntichain<D>& x) {
        PseudoAntichain<D> out = pa_empty<D>();
        for (int s = 0; s < mdp.num_sigma(); ++s) {
            for (const auto& [dpa, row] : mdp.dist[size_t(s)].blocks) {
                PseudoAntichain<D> all = pa_intersect(dom, dpa, mdp.states_enabling(s));
                PseudoAntichain<D> some = pa_empty<D>();
                for (int t = 0; t < mdp.num_tau(); ++t) {
                    if (row[size_t(t)] == 0) continue;
                    if (pa_is_empty(all)) break;
                    all = pa_intersect(dom, all, mdp.pre_star(y, s, t));
                    some = pa_union(dom, some, mdp.pre_star(x, s, t));
                }
                out = pa_union(dom, out, pa_intersect(dom, all, some));
            }
        }
        return out;
    };
    PseudoAntichain<D> y = pa_full(dom);
    while (true) {
        PseudoAntichain<D> x = goal;
        while (true) {
            PseudoAntichain<D> x2 = pa_union(dom, goal, apre(y, x));
            if (pa_equal(dom, x2, x)) break;
            x = std::move(x2);
        }
        if (pa_equal(dom, x, y)) return y;
        y = std::move(x);
    }
}

/// Layered proper initial strategy. Goal states take the first enabled
/// action; layer i takes the first action whose supported successors all stay
/// proper and at least one enters an earlier layer. Layers are swept in
/// action order, so within one layer earlier actions claim states first.
template <Domain D>
Strategy<D> initial_strategy_ssp(const MonotonicMdp<D>& mdp, const PseudoAntichain<D>& goal,
                                 const PseudoAntichain<D>& proper) {
    const D& dom = mdp.dom;
    std::vector<std::pair<PseudoAntichain<D>, int>> blocks;
    PseudoAntichain<D> rem = pa_intersect(dom, goal, proper);
    for (int s = 0; s < mdp.num_sigma() && !pa_is_empty(rem); ++s) {
        PseudoAntichain<D> piece = pa_intersect(dom, rem, mdp.states_enabling(s));
        if (pa_is_empty(piece)) continue;
        rem = pa_difference(dom, rem, piece);
        blocks.emplace_back(std::move(piece), s);
    }
    PseudoAntichain<D> layer = pa_intersect(dom, goal, proper);
    while (true) {
        PseudoAntichain<D> fresh = pa_empty<D>();
        for (int s = 0; s < mdp.num_sigma(); ++s) {
            for (const auto& [dpa, row] : mdp.dist[size_t(s)].blocks) {
                PseudoAntichain<D> all = pa_intersect(dom, dpa, mdp.states_enabling(s));
                PseudoAntichain<D> some = pa_empty<D>();
                for (int t = 0; t < mdp.num_tau(); ++t) {
                    if (row[size_t(t)] == 0) continue;
                    if (pa_is_empty(all)) break;
                    all = pa_intersect(dom, all, mdp.pre_star(proper, s, t));
                    some = pa_union(dom, some, mdp.pre_star(layer, s, t));
                }
                PseudoAntichain<D> cand = pa_intersect(dom, all, some);
                cand = pa_difference(dom, cand, layer);
                cand = pa_difference(dom, cand, fresh);
                if (pa_is_empty(cand)) continue;
                fresh = pa_union(dom, fresh, cand);
                blocks.emplace_back(std::move(cand), s);
            }
        }
        if (pa_is_empty(fresh)) break;
        layer = pa_union(dom, layer, fresh);
    }
    return make_partition(dom, std::move(blocks));
}

/// Initial strategy from the carrier representation: each pseudo-element
/// claims the states not claimed earlier, taking the first action enabled at
/// its top (enabled sets are downward closed, so the action is enabled on the
/// whole block).
template <Domain D>
Strategy<D> initial_strategy_emp(const MonotonicMdp<D>& mdp, const PseudoAntichain<D>& carrier) {
    const D& dom = mdp.dom;
    std::vector<std::pair<PseudoAntichain<D>, int>> blocks;
    PseudoAntichain<D> claimed = pa_empty<D>();
    for (const auto& pe : carrier.elems) {
        PseudoAntichain<D> block{{pe}};
        block = pa_difference(dom, block, claimed);
        claimed = pa_union(dom, claimed, PseudoAntichain<D>{{pe}});
        if (pa_is_empty(block)) continue;
        int act = -1;
        for (int s = 0; s < mdp.num_sigma(); ++s) {
            if (mdp.enabled(pe.x, s)) {
                act = s;
                break;
            }
        }
        if (act < 0) throw std::invalid_argument("initial_strategy_emp: blocking state in carrier");
        blocks.emplace_back(std::move(block), act);
    }
    return coarsen(dom, make_partition(dom, std::move(blocks)));
}

/// Quotient chain of the lumped partition. One witness (the top of the first
/// pseudo-element) per block; lumped blocks are stable, so the witness's row
/// and cost represent the whole block. Goal blocks become absorbing at cost 0.
template <Domain D>
QuotientMc explicitize(const MonotonicMdp<D>& mdp, const Strategy<D>& lam,
                       const std::vector<QBlock<D>>& blocks) {
    const D& dom = mdp.dom;
    QuotientMc q;
    q.rows.resize(blocks.size());
    q.cost.assign(blocks.size(), Rat(0));
    q.goal.assign(blocks.size(), false);
    auto block_of = [&](const typename D::Elem& e) -> size_t {
        for (size_t j = 0; j < blocks.size(); ++j)
            if (pa_member(dom, e, blocks[j].pa)) return j;
        throw std::logic_error("explicitize: successor outside the quotient");
    };
    for (size_t i = 0; i < blocks.size(); ++i) {
        if (blocks[i].goal) {
            q.rows[i] = {{i, Rat(1)}};
            q.goal[i] = true;
            continue;
        }
        const auto& witness = blocks[i].pa.elems.front().x;
        auto act = partition_lookup(dom, lam, witness);
        if (!act) throw std::logic_error("explicitize: block outside the strategy carrier");
        int a = lam.blocks[*act].second;
        q.cost[i] = mdp.cost_of(witness, a);
        const ProbRow& row = mdp.prob_row(witness, a);
        std::map<size_t, Rat> agg;
        for (int t = 0; t < mdp.num_tau(); ++t) {
            if (row[size_t(t)] == 0) continue;
            agg[block_of(mdp.succ(witness, a, t))] += row[size_t(t)];
        }
        q.rows[i].assign(agg.begin(), agg.end());
    }
    q.validate();
    return q;
}

namespace detail {

/// Pieces of one action's one-step payload: on each returned pseudo-antichain
/// every state has the same vector sum_tau p_tau * target[block(succ)], with
/// the action cost added to the last component. Restricted to states whose
/// supported successors all stay inside the quotient.
template <Domain D>
std::vector<std::pair<std::vector<Rat>, PseudoAntichain<D>>> action_levels(
    const MonotonicMdp<D>& mdp, int s, const std::vector<QBlock<D>>& blocks,
    const std::vector<std::vector<Rat>>& target) {
    const D& dom = mdp.dom;
    size_t k = target.empty() ? 1 : target.front().size();
    PseudoAntichain<D> u = pa_empty<D>();
    for (const auto& b : blocks) u = pa_union(dom, u, b.pa);
    std::vector<std::pair<std::vector<Rat>, PseudoAntichain<D>>> out;
    for (const auto& [dpa, row] : mdp.dist[size_t(s)].blocks) {
        std::vector<int> supp;
        for (int t = 0; t < mdp.num_tau(); ++t)
            if (row[size_t(t)] > 0) supp.push_back(t);
        PseudoAntichain<D> base = pa_intersect(dom, dpa, mdp.states_enabling(s));
        for (int t : supp) {
            if (pa_is_empty(base)) break;
            base = pa_intersect(dom, base, mdp.pre_star(u, s, t));
        }
        if (pa_is_empty(base)) continue;
        std::map<std::vector<Rat>, PseudoAntichain<D>> cur;
        cur.emplace(std::vector<Rat>(k, Rat(0)), std::move(base));
        for (int t : supp) {
            std::vector<PseudoAntichain<D>> pres;
            pres.reserve(blocks.size());
            for (const auto& b : blocks) pres.push_back(mdp.pre_star(b.pa, s, t));
            std::map<std::vector<Rat>, PseudoAntichain<D>> next;
            for (const auto& [acc, blk] : cur) {
                for (size_t j = 0; j < blocks.size(); ++j) {
                    PseudoAntichain<D> part = pa_intersect(dom, blk, pres[j]);
                    if (pa_is_empty(part)) continue;
                    std::vector<Rat> acc2 = acc;
                    for (size_t c = 0; c < k; ++c) acc2[c] += row[size_t(t)] * target[j][c];
                    auto it = next.find(acc2);
                    if (it == next.end())
                        next.emplace(std::move(acc2), std::move(part));
                    else
                        it->second = pa_union(dom, it->second, part);
                }
            }
            cur = std::move(next);
        }
        for (const auto& [cpa, cval] : mdp.cost[size_t(s)].blocks) {
            for (const auto& [acc, blk] : cur) {
                PseudoAntichain<D> part = pa_intersect(dom, blk, cpa);
                if (pa_is_empty(part)) continue;
                std::vector<Rat> acc2 = acc;
                acc2[k - 1] += cval;
                out.emplace_back(std::move(acc2), std::move(part));
            }
        }
    }
    return out;
}

template <Domain D>
struct Candidate {
    Rat key;
    int sigma;
    PseudoAntichain<D> pa;
};

/// Applies improving pieces by overwriting the strategy, sorted so that for
/// every state the final writer realizes the smallest level, ties going to
/// the smallest action index. The current action never appears (its level
/// equals the evaluated value, and only strict improvements are listed), so
/// any candidate changes the strategy.
template <Domain D>
bool apply_candidates(const D& dom, Strategy<D>& lam, std::vector<Candidate<D>> cands) {
    if (cands.empty()) return false;
    std::stable_sort(cands.begin(), cands.end(), [](const Candidate<D>& a, const Candidate<D>& b) {
        if (a.key != b.key) return a.key > b.key;
        return a.sigma > b.sigma;
    });
    for (const auto& c : cands)
        lam = refine_block(dom, lam, c.pa, [&](int) { return c.sigma; });
    lam = coarsen(dom, lam);
    return true;
}

}  // namespace detail

struct IterStat {
    size_t quotient = 0;
    size_t splitters = 0;
    bool bias_phase = false;
    double lump_ms = 0;
    double solve_ms = 0;
    double improve_ms = 0;
};

template <Domain D>
struct SolveReport {
    Strategy<D> strategy;
    std::vector<QBlock<D>> blocks;  // final quotient
    QuotientMc quotient;            // final induced chain on the quotient
    std::vector<Rat> value;         // per block: v for SSP, gain for EMP
    std::vector<Rat> bias;          // per block, EMP only
    PseudoAntichain<D> proper;      // SSP only
    size_t iterations = 0;          // strategies considered, initial included
    size_t max_quotient = 0;
    std::vector<IterStat> iters;
    std::vector<Strategy<D>> strategy_history;  // initial first, final last
};

/// Value of the solved objective at a state, read off the final quotient.
template <Domain D>
Rat report_value_at(const D& dom, const SolveReport<D>& rep, const typename D::Elem& s) {
    for (size_t j = 0; j < rep.blocks.size(); ++j)
        if (pa_member(dom, s, rep.blocks[j].pa)) return rep.value[j];
    throw std::domain_error("report_value_at: state outside the solved carrier");
}

namespace detail {

inline double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

/// Strategy iteration for the expected cost to the goal, entirely on
/// pseudo-antichains except for the explicitized quotient systems.
template <Domain D>
SolveReport<D> solve_ssp_symblicit(const MonotonicMdp<D>& mdp, const PseudoAntichain<D>& goal,
                                   size_t max_iterations = 1000000) {
    const D& dom = mdp.dom;
    SolveReport<D> rep;
    rep.proper = proper_states(mdp, goal);
    if (pa_is_empty(rep.proper)) throw NonProperError("no state reaches the goal almost surely");
    Strategy<D> lam = initial_strategy_ssp(mdp, goal, rep.proper);
    rep.strategy_history.push_back(lam);
    rep.iterations = 1;
    while (true) {
        if (rep.iterations > max_iterations) throw std::runtime_error("ssp: iteration cap exceeded");
        IterStat stat;
        auto t0 = std::chrono::steady_clock::now();
        auto lumped = lump(mdp, lam, initial_lump_blocks(mdp, lam, &goal));
        stat.lump_ms = detail::ms_since(t0);
        stat.quotient = lumped.blocks.size();
        stat.splitters = lumped.splitters_processed;
        rep.max_quotient = std::max(rep.max_quotient, lumped.blocks.size());
        t0 = std::chrono::steady_clock::now();
        QuotientMc q = explicitize(mdp, lam, lumped.blocks);
        std::vector<Rat> v = solve_ssp(q);
        if (!check_ssp_residual(q, v)) throw std::logic_error("ssp: non-zero residual");
        stat.solve_ms = detail::ms_since(t0);

        t0 = std::chrono::steady_clock::now();
        std::vector<std::vector<Rat>> target(v.size());
        for (size_t j = 0; j < v.size(); ++j) target[j] = {v[j]};
        std::vector<detail::Candidate<D>> cands;
        for (int s = 0; s < mdp.num_sigma(); ++s) {
            for (auto& [acc, pa] : detail::action_levels(mdp, s, lumped.blocks, target)) {
                for (size_t j = 0; j < lumped.blocks.size(); ++j) {
                    if (lumped.blocks[j].goal || acc.front() >= v[j]) continue;
                    PseudoAntichain<D> part = pa_intersect(dom, pa, lumped.blocks[j].pa);
                    if (!pa_is_empty(part))
                        cands.push_back({acc.front(), s, std::move(part)});
                }
            }
        }
        bool changed = detail::apply_candidates(dom, lam, std::move(cands));
        stat.improve_ms = detail::ms_since(t0);
        rep.iters.push_back(stat);
        ++rep.iterations;
        rep.strategy_history.push_back(lam);
        if (!changed) {
            rep.blocks = std::move(lumped.blocks);
            rep.quotient = std::move(q);
            rep.value = std::move(v);
            break;
        }
    }
    rep.strategy = lam;
    return rep;
}

/// Strategy iteration for the expected mean cost per step. Gain improvements
/// take priority; bias improvements (restricted to gain-optimal actions) are
/// attempted only in rounds where no gain improvement exists anywhere. The
/// model must be non-blocking on its carrier.
template <Domain D>
SolveReport<D> solve_emp_symblicit(const MonotonicMdp<D>& mdp, size_t max_iterations = 1000000) {
    const D& dom = mdp.dom;
    SolveReport<D> rep;
    PseudoAntichain<D> carrier = mdp_carrier(mdp);
    if (pa_is_empty(carrier)) throw std::invalid_argument("emp: no enabled action anywhere");
    Strategy<D> lam = initial_strategy_emp(mdp, carrier);
    rep.strategy_history.push_back(lam);
    rep.iterations = 1;
    while (true) {
        if (rep.iterations > max_iterations) throw std::runtime_error("emp: iteration cap exceeded");
        IterStat stat;
        auto t0 = std::chrono::steady_clock::now();
        auto lumped =
            lump(mdp, lam, initial_lump_blocks(mdp, lam, static_cast<const PseudoAntichain<D>*>(nullptr)));
        stat.lump_ms = detail::ms_since(t0);
        stat.quotient = lumped.blocks.size();
        stat.splitters = lumped.splitters_processed;
        rep.max_quotient = std::max(rep.max_quotient, lumped.blocks.size());
        t0 = std::chrono::steady_clock::now();
        QuotientMc q = explicitize(mdp, lam, lumped.blocks);
        GainBias gb = solve_gain_bias(q);
        if (!check_gain_bias_residual(q, gb)) throw std::logic_error("emp: non-zero residual");
        stat.solve_ms = detail::ms_since(t0);

        t0 = std::chrono::steady_clock::now();
        std::vector<std::vector<Rat>> target(q.rows.size());
        for (size_t j = 0; j < q.rows.size(); ++j) target[j] = {gb.gain[j], gb.bias[j]};
        std::vector<std::vector<std::pair<std::vector<Rat>, PseudoAntichain<D>>>> levels;
        levels.reserve(size_t(mdp.num_sigma()));
        for (int s = 0; s < mdp.num_sigma(); ++s)
            levels.push_back(detail::action_levels(mdp, s, lumped.blocks, target));
        std::vector<detail::Candidate<D>> cands;
        for (int s = 0; s < mdp.num_sigma(); ++s) {
            for (const auto& [acc, pa] : levels[size_t(s)]) {
                for (size_t j = 0; j < lumped.blocks.size(); ++j) {
                    if (acc[0] >= gb.gain[j]) continue;
                    PseudoAntichain<D> part = pa_intersect(dom, pa, lumped.blocks[j].pa);
                    if (!pa_is_empty(part)) cands.push_back({acc[0], s, std::move(part)});
                }
            }
        }
        if (cands.empty()) {
            stat.bias_phase = true;
            for (int s = 0; s < mdp.num_sigma(); ++s) {
                for (const auto& [acc, pa] : levels[size_t(s)]) {
                    for (size_t j = 0; j < lumped.blocks.size(); ++j) {
                        if (acc[0] != gb.gain[j] || acc[1] >= gb.gain[j] + gb.bias[j]) continue;
                        PseudoAntichain<D> part = pa_intersect(dom, pa, lumped.blocks[j].pa);
                        if (!pa_is_empty(part)) cands.push_back({acc[1], s, std::move(part)});
                    }
                }
            }
        }
        bool changed = detail::apply_candidates(dom, lam, std::move(cands));
        stat.improve_ms = detail::ms_since(t0);
        rep.iters.push_back(stat);
        ++rep.iterations;
        rep.strategy_history.push_back(lam);
        if (!changed) {
            rep.blocks = std::move(lumped.blocks);
            rep.quotient = std::move(q);
            rep.value = std::move(gb.gain);
            rep.bias = std::move(gb.bias);
            break;
        }
    }
    rep.strategy = lam;
    return rep;
}

}  // namespace pamdp
