#pragma once

#include <map>
#include <stdexcept>
#include <vector>

#include "pamdp/mdp.hpp"
#include "pamdp/numeric.hpp"

namespace pamdp {

/// Fully enumerated MDP used as ground truth on small instances.
struct ExplicitMdp {
    size_t n = 0;
    int num_actions = 0;
    std::vector<std::vector<bool>> enabled;                          // [s][a]
    std::vector<std::vector<std::vector<std::pair<size_t, Rat>>>> trans;  // [s][a], merged rows
    std::vector<std::vector<Rat>> cost;                              // [s][a]
    std::vector<bool> goal;
};

/// States with at least one strategy reaching the goal almost surely,
/// computed by the nested nu/mu fixpoint over explicit sets.
std::vector<bool> explicit_proper(const ExplicitMdp& e);

/// Layered proper initial strategy: goal states take their first enabled
/// action, layer i states take the first action staying in the proper set
/// and entering the previous layer with positive probability. -1 outside the
/// proper set.
std::vector<int> explicit_initial_ssp(const ExplicitMdp& e, const std::vector<bool>& proper);

struct ExplicitLump {
    std::vector<int> block;  // -1 for states outside the strategy's carrier
    size_t count = 0;
};

/// Largest bisimulation of the MC induced by the strategy, by signature
/// refinement (deliberately a different algorithm shape than the symbolic
/// splitter queue). Goal states are treated as one absorbing cost-0 region
/// when goal_absorbing is set.
ExplicitLump explicit_lump(const ExplicitMdp& e, const std::vector<int>& strategy,
                           bool goal_absorbing);

struct ExplicitSolve {
    std::vector<Rat> value;  // v for SSP, gain for EMP
    std::vector<Rat> bias;   // EMP only
    std::vector<int> strategy;
    std::vector<bool> proper;  // SSP only; value is meaningless outside
    size_t iterations = 0;
    size_t max_quotient = 0;
};

/// Explicit strategy iteration; shares the exact linear solvers with the
/// symblicit engine and uses the same improvement tie rules (strict
/// improvement only, smallest action index on ties) so iteration counts are
/// comparable.
ExplicitSolve explicit_ssp(const ExplicitMdp& e);
ExplicitSolve explicit_emp(const ExplicitMdp& e, std::vector<int> initial);

/// Evaluates a fixed strategy exactly (by explicit lumping plus the shared
/// solvers); used by tests to audit strategies produced elsewhere.
std::vector<Rat> explicit_eval_ssp(const ExplicitMdp& e, const std::vector<int>& strategy);

struct EmpEval {
    std::vector<Rat> gain;
    std::vector<Rat> bias;
};
EmpEval explicit_eval_emp(const ExplicitMdp& e, const std::vector<int>& strategy);

template <Domain D>
struct Enumerated {
    std::vector<typename D::Elem> states;
    ExplicitMdp e;
    std::vector<int> init_emp;  // mirror of the symbolic EMP initial strategy
};

/// Enumerates the (optionally restricted) state space. The carrier pseudo-
/// antichain drives the EMP initial strategy exactly as in the symbolic
/// engine: first pseudo-element containing the state, first action enabled
/// at its top.
template <Domain D>
Enumerated<D> enumerate_mdp(const MonotonicMdp<D>& mdp, const PseudoAntichain<D>* goal,
                            const PseudoAntichain<D>* restrict_to, uint64_t cap = uint64_t(1) << 20) {
    Enumerated<D> out;
    const D& dom = mdp.dom;
    for (const auto& s : dom.enumerate()) {
        if (restrict_to && !pa_member(dom, s, *restrict_to)) continue;
        out.states.push_back(s);
        if (out.states.size() > cap) throw std::length_error("enumerate_mdp: state cap exceeded");
    }
    auto less = [&dom](const typename D::Elem& a, const typename D::Elem& b) { return dom.less(a, b); };
    std::map<typename D::Elem, size_t, decltype(less)> index(less);
    for (size_t i = 0; i < out.states.size(); ++i) index.emplace(out.states[i], i);

    ExplicitMdp& e = out.e;
    e.n = out.states.size();
    e.num_actions = mdp.num_sigma();
    e.enabled.assign(e.n, std::vector<bool>(size_t(e.num_actions), false));
    e.trans.assign(e.n, {});
    e.cost.assign(e.n, std::vector<Rat>(size_t(e.num_actions), Rat(0)));
    e.goal.assign(e.n, false);
    for (size_t i = 0; i < e.n; ++i) {
        const auto& s = out.states[i];
        if (goal) e.goal[i] = pa_member(dom, s, *goal);
        e.trans[i].resize(size_t(e.num_actions));
        for (int a = 0; a < e.num_actions; ++a) {
            if (!mdp.enabled(s, a)) continue;
            e.enabled[i][size_t(a)] = true;
            e.cost[i][size_t(a)] = mdp.cost_of(s, a);
            std::map<size_t, Rat> row;
            const ProbRow& probs = mdp.prob_row(s, a);
            for (int t = 0; t < mdp.num_tau(); ++t) {
                if (probs[size_t(t)] == 0) continue;
                auto succ = mdp.succ(s, a, t);
                auto it = index.find(succ);
                if (it == index.end())
                    throw std::logic_error("enumerate_mdp: successor escapes the restriction");
                row[it->second] += probs[size_t(t)];
            }
            e.trans[i][size_t(a)].assign(row.begin(), row.end());
        }
    }

    // EMP initial strategy from the carrier representation.
    PseudoAntichain<D> carrier = restrict_to ? *restrict_to : pa_full(dom);
    out.init_emp.assign(e.n, -1);
    for (size_t i = 0; i < e.n; ++i) {
        for (const auto& pe : carrier.elems) {
            if (!pe_member(dom, out.states[i], pe)) continue;
            for (int a = 0; a < e.num_actions; ++a) {
                if (mdp.enabled(pe.x, a)) {
                    out.init_emp[i] = a;
                    break;
                }
            }
            break;
        }
    }
    return out;
}

}  // namespace pamdp
