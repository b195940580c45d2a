#include "pamdp/oracle.hpp"

#include <algorithm>
#include <map>
#include <tuple>

namespace pamdp {

namespace {

bool all_succ_in(const ExplicitMdp& e, size_t s, int a, const std::vector<bool>& set) {
    for (const auto& [j, p] : e.trans[s][size_t(a)])
        if (p > 0 && !set[j]) return false;
    return true;
}

bool some_succ_in(const ExplicitMdp& e, size_t s, int a, const std::vector<bool>& set) {
    for (const auto& [j, p] : e.trans[s][size_t(a)])
        if (p > 0 && set[j]) return true;
    return false;
}

}  // namespace

std::vector<bool> explicit_proper(const ExplicitMdp& e) {
    std::vector<bool> y(e.n, true);
    while (true) {
        // mu X . (APre(Y, X) or G)
        std::vector<bool> x = e.goal;
        bool grew = true;
        while (grew) {
            grew = false;
            for (size_t s = 0; s < e.n; ++s) {
                if (x[s]) continue;
                for (int a = 0; a < e.num_actions; ++a) {
                    if (!e.enabled[s][size_t(a)]) continue;
                    if (all_succ_in(e, s, a, y) && some_succ_in(e, s, a, x)) {
                        x[s] = true;
                        grew = true;
                        break;
                    }
                }
            }
        }
        if (x == y) return y;
        y = std::move(x);
    }
}

std::vector<int> explicit_initial_ssp(const ExplicitMdp& e, const std::vector<bool>& proper) {
    std::vector<int> strat(e.n, -1);
    std::vector<bool> layer = e.goal;
    for (size_t s = 0; s < e.n; ++s) {
        if (!e.goal[s]) continue;
        for (int a = 0; a < e.num_actions; ++a)
            if (e.enabled[s][size_t(a)]) {
                strat[s] = a;
                break;
            }
    }
    bool grew = true;
    while (grew) {
        grew = false;
        std::vector<bool> next = layer;
        for (size_t s = 0; s < e.n; ++s) {
            if (layer[s] || !proper[s]) continue;
            for (int a = 0; a < e.num_actions; ++a) {
                if (!e.enabled[s][size_t(a)]) continue;
                if (all_succ_in(e, s, a, proper) && some_succ_in(e, s, a, layer)) {
                    strat[s] = a;
                    next[s] = true;
                    grew = true;
                    break;
                }
            }
        }
        layer = std::move(next);
    }
    return strat;
}

namespace {

struct Chain {
    // Row and cost of every carried state under the strategy.
    std::vector<std::vector<std::pair<size_t, Rat>>> rows;
    std::vector<Rat> cost;
    std::vector<bool> absorbing_goal;
    std::vector<size_t> carried;  // state ids with strategy >= 0
    std::vector<size_t> pos;      // state id -> index in carried (or npos)
};

Chain induced_chain(const ExplicitMdp& e, const std::vector<int>& strategy, bool goal_absorbing) {
    Chain c;
    c.pos.assign(e.n, size_t(-1));
    for (size_t s = 0; s < e.n; ++s) {
        // The absorbing goal region is carried even where the strategy is
        // undefined (goal states may have no enabled action).
        if (strategy[s] < 0 && !(goal_absorbing && e.goal[s])) continue;
        c.pos[s] = c.carried.size();
        c.carried.push_back(s);
    }
    for (size_t i = 0; i < c.carried.size(); ++i) {
        size_t s = c.carried[i];
        if (goal_absorbing && e.goal[s]) {
            c.rows.push_back({{i, Rat(1)}});
            c.cost.push_back(Rat(0));
            c.absorbing_goal.push_back(true);
            continue;
        }
        std::vector<std::pair<size_t, Rat>> row;
        for (const auto& [j, p] : e.trans[s][size_t(strategy[s])]) {
            if (p == 0) continue;
            if (c.pos[j] == size_t(-1))
                throw std::logic_error("induced chain leaves the strategy's carrier");
            row.emplace_back(c.pos[j], p);
        }
        c.rows.push_back(std::move(row));
        c.cost.push_back(e.cost[s][size_t(strategy[s])]);
        c.absorbing_goal.push_back(false);
    }
    return c;
}

}  // namespace

ExplicitLump explicit_lump(const ExplicitMdp& e, const std::vector<int>& strategy,
                           bool goal_absorbing) {
    Chain c = induced_chain(e, strategy, goal_absorbing);
    size_t m = c.carried.size();
    // Initial partition: cost, with the absorbing goal region separate.
    std::vector<int> block(m);
    {
        std::map<std::pair<bool, Rat>, int> ids;
        for (size_t i = 0; i < m; ++i) {
            auto key = std::make_pair(c.absorbing_goal[i], c.cost[i]);
            auto [it, fresh] = ids.emplace(key, int(ids.size()));
            block[i] = it->second;
        }
    }
    size_t count = 0;
    while (true) {
        // Signature refinement: (old block, aggregated probability per block).
        std::map<std::pair<int, std::vector<std::pair<int, Rat>>>, int> ids;
        std::vector<int> next(m);
        for (size_t i = 0; i < m; ++i) {
            std::map<int, Rat> agg;
            for (const auto& [j, p] : c.rows[i]) agg[block[j]] += p;
            std::vector<std::pair<int, Rat>> sig(agg.begin(), agg.end());
            auto [it, fresh] = ids.emplace(std::make_pair(block[i], std::move(sig)), int(ids.size()));
            next[i] = it->second;
        }
        bool stable = ids.size() == count && next == block;
        count = ids.size();
        block = std::move(next);
        if (stable) break;
    }
    ExplicitLump out;
    out.count = count;
    out.block.assign(e.n, -1);
    for (size_t i = 0; i < m; ++i) out.block[c.carried[i]] = block[i];
    return out;
}

namespace {

QuotientMc quotient_of(const ExplicitMdp& e, const std::vector<int>& strategy, bool goal_absorbing,
                       const ExplicitLump& lump) {
    QuotientMc q;
    q.rows.resize(lump.count);
    q.cost.assign(lump.count, Rat(0));
    q.goal.assign(lump.count, false);
    std::vector<bool> seen(lump.count, false);
    Chain c = induced_chain(e, strategy, goal_absorbing);
    for (size_t i = 0; i < c.carried.size(); ++i) {
        size_t s = c.carried[i];
        size_t b = size_t(lump.block[s]);
        if (seen[b]) continue;
        seen[b] = true;
        q.cost[b] = c.cost[i];
        q.goal[b] = c.absorbing_goal[i];
        std::map<size_t, Rat> agg;
        for (const auto& [j, p] : c.rows[i]) agg[size_t(lump.block[c.carried[j]])] += p;
        q.rows[b].assign(agg.begin(), agg.end());
    }
    q.validate();
    return q;
}

std::vector<Rat> lift(const ExplicitLump& lump, const std::vector<Rat>& per_block, size_t n) {
    std::vector<Rat> out(n, Rat(0));
    for (size_t s = 0; s < n; ++s)
        if (lump.block[s] >= 0) out[s] = per_block[size_t(lump.block[s])];
    return out;
}

}  // namespace

std::vector<Rat> explicit_eval_ssp(const ExplicitMdp& e, const std::vector<int>& strategy) {
    auto lump = explicit_lump(e, strategy, true);
    auto q = quotient_of(e, strategy, true, lump);
    auto v = solve_ssp(q);
    if (!check_ssp_residual(q, v)) throw std::logic_error("ssp residual non-zero");
    return lift(lump, v, e.n);
}

EmpEval explicit_eval_emp(const ExplicitMdp& e, const std::vector<int>& strategy) {
    auto lump = explicit_lump(e, strategy, false);
    auto q = quotient_of(e, strategy, false, lump);
    auto gb = solve_gain_bias(q);
    if (!check_gain_bias_residual(q, gb)) throw std::logic_error("gain/bias residual non-zero");
    return {lift(lump, gb.gain, e.n), lift(lump, gb.bias, e.n)};
}

ExplicitSolve explicit_ssp(const ExplicitMdp& e) {
    ExplicitSolve out;
    out.proper = explicit_proper(e);
    out.strategy = explicit_initial_ssp(e, out.proper);
    // Safe actions keep all positive successors inside the proper set.
    std::vector<std::vector<bool>> safe(e.n, std::vector<bool>(size_t(e.num_actions), false));
    for (size_t s = 0; s < e.n; ++s)
        for (int a = 0; a < e.num_actions; ++a)
            safe[s][size_t(a)] = e.enabled[s][size_t(a)] && all_succ_in(e, s, a, out.proper);
    out.iterations = 1;  // counts strategies, the initial one included
    while (true) {
        auto lump = explicit_lump(e, out.strategy, true);
        out.max_quotient = std::max(out.max_quotient, lump.count);
        auto q = quotient_of(e, out.strategy, true, lump);
        auto v = solve_ssp(q);
        if (!check_ssp_residual(q, v)) throw std::logic_error("ssp residual non-zero");
        out.value = lift(lump, v, e.n);
        bool changed = false;
        for (size_t s = 0; s < e.n; ++s) {
            if (out.strategy[s] < 0 || e.goal[s]) continue;
            Rat best = out.value[s];
            int pick = out.strategy[s];
            for (int a = 0; a < e.num_actions; ++a) {
                if (!safe[s][size_t(a)]) continue;
                Rat l = e.cost[s][size_t(a)];
                for (const auto& [j, p] : e.trans[s][size_t(a)])
                    if (!e.goal[j]) l += p * out.value[j];
                if (l < best) {
                    best = l;
                    pick = a;
                }
            }
            if (pick != out.strategy[s]) {
                out.strategy[s] = pick;
                changed = true;
            }
        }
        ++out.iterations;
        if (!changed) break;
    }
    return out;
}

ExplicitSolve explicit_emp(const ExplicitMdp& e, std::vector<int> initial) {
    ExplicitSolve out;
    out.strategy = std::move(initial);
    out.iterations = 1;
    while (true) {
        auto lump = explicit_lump(e, out.strategy, false);
        out.max_quotient = std::max(out.max_quotient, lump.count);
        auto q = quotient_of(e, out.strategy, false, lump);
        auto gb = solve_gain_bias(q);
        if (!check_gain_bias_residual(q, gb)) throw std::logic_error("gain/bias residual non-zero");
        out.value = lift(lump, gb.gain, e.n);
        out.bias = lift(lump, gb.bias, e.n);
        // Gain phase; bias phase only when no gain improvement exists
        // anywhere.
        bool changed = false;
        std::vector<int> next = out.strategy;
        for (size_t s = 0; s < e.n; ++s) {
            if (out.strategy[s] < 0) continue;
            Rat best = out.value[s];
            int pick = out.strategy[s];
            for (int a = 0; a < e.num_actions; ++a) {
                if (!e.enabled[s][size_t(a)] || a == out.strategy[s]) continue;
                Rat lg = 0;
                for (const auto& [j, p] : e.trans[s][size_t(a)]) lg += p * out.value[j];
                if (lg < best) {
                    best = lg;
                    pick = a;
                }
            }
            if (pick != out.strategy[s]) {
                next[s] = pick;
                changed = true;
            }
        }
        if (!changed) {
            for (size_t s = 0; s < e.n; ++s) {
                if (out.strategy[s] < 0) continue;
                Rat best = out.value[s] + out.bias[s];
                int pick = out.strategy[s];
                for (int a = 0; a < e.num_actions; ++a) {
                    if (!e.enabled[s][size_t(a)] || a == out.strategy[s]) continue;
                    // Restricted to gain-optimal actions.
                    Rat lg = 0;
                    for (const auto& [j, p] : e.trans[s][size_t(a)]) lg += p * out.value[j];
                    if (lg != out.value[s]) continue;
                    Rat lb = e.cost[s][size_t(a)];
                    for (const auto& [j, p] : e.trans[s][size_t(a)]) lb += p * out.bias[j];
                    if (lb < best) {
                        best = lb;
                        pick = a;
                    }
                }
                if (pick != out.strategy[s]) {
                    next[s] = pick;
                    changed = true;
                }
            }
        }
        out.strategy = std::move(next);
        ++out.iterations;
        if (!changed) break;
    }
    return out;
}

}  // namespace pamdp
