#pragma once

#include <deque>
#include <map>
#include <utility>
#include <vector>

#include "pamdp/mdp.hpp"
#include "pamdp/partition.hpp"

namespace pamdp {

/// Block of a lumped quotient. Goal blocks are frozen: they are valid
/// splitters but are never split themselves and are made absorbing when the
/// quotient is explicitized (states inside a goal block are all bisimilar in
/// the evaluated chain, which treats the goal as absorbing with cost 0).
template <Domain D>
struct QBlock {
    PseudoAntichain<D> pa;
    Rat cost;
    bool goal = false;
};

template <Domain D>
struct LumpResult {
    std::vector<QBlock<D>> blocks;
    size_t splitters_processed = 0;
    size_t max_blocks = 0;
};

/// Distribution relation of the induced MC: partition of the strategy's
/// carrier with one probability row per block, coarsened so equal rows merge.
template <Domain D>
SymbolicPartition<D, ProbRow> dist_lambda(const MonotonicMdp<D>& mdp, const Strategy<D>& lam) {
    SymbolicPartition<D, ProbRow> result;
    result.carrier = lam.carrier;
    for (const auto& [b, act] : lam.blocks) {
        for (const auto& [dpa, row] : mdp.dist[size_t(act)].blocks) {
            PseudoAntichain<D> inter = pa_intersect(mdp.dom, b, dpa);
            if (pa_is_empty(inter)) continue;
            bool merged = false;
            for (auto& [pa, existing] : result.blocks) {
                if (existing == row) {
                    pa = pa_union(mdp.dom, pa, inter);
                    merged = true;
                    break;
                }
            }
            if (!merged) result.blocks.emplace_back(std::move(inter), row);
        }
    }
    return result;
}

/// Cost relation of the induced MC.
template <Domain D>
SymbolicPartition<D, Rat> cost_lambda(const MonotonicMdp<D>& mdp, const Strategy<D>& lam) {
    SymbolicPartition<D, Rat> result;
    result.carrier = lam.carrier;
    for (const auto& [b, act] : lam.blocks) {
        for (const auto& [cpa, c] : mdp.cost[size_t(act)].blocks) {
            PseudoAntichain<D> inter = pa_intersect(mdp.dom, b, cpa);
            if (pa_is_empty(inter)) continue;
            bool merged = false;
            for (auto& [pa, existing] : result.blocks) {
                if (existing == c) {
                    pa = pa_union(mdp.dom, pa, inter);
                    merged = true;
                    break;
                }
            }
            if (!merged) result.blocks.emplace_back(std::move(inter), c);
        }
    }
    return result;
}

/// States whose chosen action maps them into C by tau.
template <Domain D>
PseudoAntichain<D> pre_lambda(const MonotonicMdp<D>& mdp, const PseudoAntichain<D>& c, int t,
                              const Strategy<D>& lam) {
    PseudoAntichain<D> result = pa_empty<D>();
    for (const auto& [b, act] : lam.blocks)
        result = pa_union(mdp.dom, result, pa_intersect(mdp.dom, mdp.pre_star(c, act, t), b));
    return result;
}

/// Splits B by the probability of stepping into C under the strategy.
/// Returned sub-blocks partition B; probabilities are pairwise distinct.
/// Exact-rational map keys gather equal-probability sub-blocks eagerly.
template <Domain D>
std::vector<std::pair<Rat, PseudoAntichain<D>>> split(const MonotonicMdp<D>& mdp,
                                                      const PseudoAntichain<D>& b,
                                                      const PseudoAntichain<D>& c,
                                                      const Strategy<D>& lam,
                                                      const SymbolicPartition<D, ProbRow>& dlam) {
    std::map<Rat, PseudoAntichain<D>> cur;
    cur.emplace(Rat(0), b);
    for (int t = 0; t < mdp.num_tau(); ++t) {
        PseudoAntichain<D> pre = pre_lambda(mdp, c, t, lam);
        if (pa_is_empty(pre)) continue;
        std::map<Rat, PseudoAntichain<D>> next;
        auto add = [&](const Rat& p, PseudoAntichain<D>&& part) {
            if (pa_is_empty(part)) return;
            auto it = next.find(p);
            if (it == next.end())
                next.emplace(p, std::move(part));
            else
                it->second = pa_union(mdp.dom, it->second, part);
        };
        for (auto& [p, block] : cur) {
            PseudoAntichain<D> in = pa_intersect(mdp.dom, block, pre);
            add(p, pa_difference(mdp.dom, block, pre));
            if (pa_is_empty(in)) continue;
            for (const auto& [dpa, row] : dlam.blocks)
                add(p + row[size_t(t)], pa_intersect(mdp.dom, in, dpa));
        }
        cur = std::move(next);
    }
    std::vector<std::pair<Rat, PseudoAntichain<D>>> out;
    out.reserve(cur.size());
    for (auto& [p, block] : cur) out.emplace_back(p, std::move(block));
    return out;
}

/// Coarsest-bisimulation lumping of the MC induced by the strategy, starting
/// from the given cost partition (goal blocks frozen). Splitter list is FIFO;
/// after each split all sub-blocks but the largest (by pseudo-element count,
/// ties broken by order of appearance) are queued as new splitters.
template <Domain D>
LumpResult<D> lump(const MonotonicMdp<D>& mdp, const Strategy<D>& lam,
                   std::vector<QBlock<D>> initial) {
    SymbolicPartition<D, ProbRow> dlam = dist_lambda(mdp, lam);
    LumpResult<D> res;
    res.blocks = std::move(initial);
    res.max_blocks = res.blocks.size();
    std::deque<PseudoAntichain<D>> queue;
    for (const auto& qb : res.blocks) queue.push_back(qb.pa);
    while (!queue.empty()) {
        PseudoAntichain<D> c = std::move(queue.front());
        queue.pop_front();
        ++res.splitters_processed;
        std::vector<QBlock<D>> refined;
        refined.reserve(res.blocks.size());
        for (auto& qb : res.blocks) {
            if (qb.goal) {
                refined.push_back(std::move(qb));
                continue;
            }
            auto parts = split(mdp, qb.pa, c, lam, dlam);
            if (parts.size() <= 1) {
                refined.push_back(std::move(qb));
                continue;
            }
            size_t largest = 0;
            for (size_t i = 1; i < parts.size(); ++i)
                if (parts[i].second.size() > parts[largest].second.size()) largest = i;
            for (size_t i = 0; i < parts.size(); ++i) {
                refined.push_back(QBlock<D>{parts[i].second, qb.cost, false});
                if (i != largest) queue.push_back(parts[i].second);
            }
        }
        res.blocks = std::move(refined);
        res.max_blocks = std::max(res.max_blocks, res.blocks.size());
    }
    return res;
}

/// Initial lump partition from the cost relation; the optional goal set
/// becomes one frozen block with cost 0, carved out of the cost blocks. The
/// goal block keeps goal states outside the strategy's carrier: the goal is
/// absorbing in the evaluated chain, so no action is needed there.
template <Domain D>
std::vector<QBlock<D>> initial_lump_blocks(const MonotonicMdp<D>& mdp, const Strategy<D>& lam,
                                           const PseudoAntichain<D>* goal) {
    SymbolicPartition<D, Rat> clam = cost_lambda(mdp, lam);
    std::vector<QBlock<D>> blocks;
    for (const auto& [pa, c] : clam.blocks) {
        PseudoAntichain<D> rest = goal ? pa_difference(mdp.dom, pa, *goal) : pa;
        if (!pa_is_empty(rest)) blocks.push_back(QBlock<D>{rest, c, false});
    }
    if (goal && !pa_is_empty(*goal)) blocks.push_back(QBlock<D>{*goal, Rat(0), true});
    return blocks;
}

}  // namespace pamdp
