#pragma once

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "pamdp/lattice.hpp"
#include "pamdp/partition.hpp"
#include "pamdp/rational.hpp"

namespace pamdp {

/// Per-action stochastic data: probability of each tau index. Zero entries
/// mean the stochastic action is outside the support of this action's
/// distribution.
using ProbRow = std::vector<Rat>;

/// A monotonic MDP over an ordered domain. The successor function is
/// deterministic and total in tau for enabled sigma; the order must be
/// compatible with it (smaller states keep at least the same actions and
/// their successors stay smaller).
///
/// Probabilities and costs are exposed as symbolic partitions per sigma:
/// both frontends in this repository have state-independent distributions
/// and costs, so these are one-block partitions, but multi-block models
/// work the same way.
///
/// Instances are read-only after construction except for the internal memo
/// caches, which are confined to a single solver thread.
template <Domain D>
class MonotonicMdp {
public:
    using Elem = typename D::Elem;

    D dom;
    std::vector<std::string> sigma;
    std::vector<std::string> tau;
    std::function<Elem(const Elem&, int, int)> succ;
    /// Maximal elements of Pre_{sigma,tau}(down{x}).
    std::function<Antichain<D>(const Elem&, int, int)> pre_max;
    std::vector<SymbolicPartition<D, ProbRow>> dist;  // indexed by sigma
    std::vector<SymbolicPartition<D, Rat>> cost;      // indexed by sigma

    MonotonicMdp(D d, std::vector<std::string> sig, std::vector<std::string> ta)
        : dom(std::move(d)), sigma(std::move(sig)), tau(std::move(ta)) {}

    int num_sigma() const { return int(sigma.size()); }
    int num_tau() const { return int(tau.size()); }

    /// Restricts the enabled set of every action, used after non-blocking
    /// pruning. Clears the enabled-set cache.
    void set_enabled_override(std::vector<PseudoAntichain<D>> enabled) {
        enabled_override_ = std::move(enabled);
        enabled_cache_.assign(size_t(num_sigma()), std::nullopt);
    }

    /// S_sigma, memoized. Without an override this is the raw predecessor of
    /// the full space under an arbitrary tau.
    const PseudoAntichain<D>& states_enabling(int s) const {
        if (enabled_cache_.empty()) enabled_cache_.assign(size_t(num_sigma()), std::nullopt);
        auto& slot = enabled_cache_[size_t(s)];
        if (!slot) {
            if (!enabled_override_.empty())
                slot = enabled_override_[size_t(s)];
            else
                slot = raw_pre_star(pa_full(dom), s, 0);
        }
        return *slot;
    }

    /// Pre_{sigma,tau} lifted to pseudo-antichains without any enabled-set
    /// restriction beyond what pre_max itself encodes. Per pseudo-element
    /// (x, alpha): union over x' in ceil(Pre(down{x})) of (x', ceil(Pre(down alpha))).
    PseudoAntichain<D> raw_pre_star(const PseudoAntichain<D>& a, int s, int t) const {
        std::vector<PseudoElement<D>> out;
        for (const auto& p : a.elems) {
            Antichain<D> tops = pre_max_memo(p.x, s, t);
            Antichain<D> excl;
            for (const auto& b : p.alpha.elems)
                excl = ac_union(dom, excl, pre_max_memo(b, s, t));
            for (const auto& x2 : tops.elems) {
                auto pe = pe_make(dom, x2, excl);
                if (pe) out.push_back(std::move(*pe));
            }
        }
        return pa_simplify(dom, std::move(out));
    }

    /// Pre_{sigma,tau} respecting any pruning restriction of the enabled sets.
    PseudoAntichain<D> pre_star(const PseudoAntichain<D>& a, int s, int t) const {
        PseudoAntichain<D> raw = raw_pre_star(a, s, t);
        if (enabled_override_.empty()) return raw;
        return pa_intersect(dom, raw, enabled_override_[size_t(s)]);
    }

    bool enabled(const Elem& e, int s) const { return pa_member(dom, e, states_enabling(s)); }

    Elem succ_value(const Elem& e, int s, int t) const {
        require_enabled(e, s);
        return succ(e, s, t);
    }

    const ProbRow& prob_row(const Elem& e, int s) const {
        require_enabled(e, s);
        auto idx = partition_lookup(dom, dist[size_t(s)], e);
        if (!idx) throw std::logic_error("prob_row: state outside the distribution partition");
        return dist[size_t(s)].blocks[*idx].second;
    }

    Rat prob_of(const Elem& e, int s, int t) const { return prob_row(e, s)[size_t(t)]; }

    Rat cost_of(const Elem& e, int s) const {
        require_enabled(e, s);
        auto idx = partition_lookup(dom, cost[size_t(s)], e);
        if (!idx) throw std::logic_error("cost_of: state outside the cost partition");
        return cost[size_t(s)].blocks[*idx].second;
    }

    /// Tau indices with positive probability anywhere under sigma.
    std::vector<int> support(int s) const {
        std::vector<int> sup;
        for (int t = 0; t < num_tau(); ++t) {
            for (const auto& [pa, row] : dist[size_t(s)].blocks) {
                if (row[size_t(t)] > 0) {
                    sup.push_back(t);
                    break;
                }
            }
        }
        return sup;
    }

    /// Compatibility audit on a sampled state list: comparable pairs must
    /// keep enabledness downward and successors ordered. Throws on the first
    /// violation.
    void audit_monotonicity(const std::vector<Elem>& sample) const {
        for (const auto& lo : sample) {
            for (const auto& hi : sample) {
                if (!dom.leq(lo, hi)) continue;
                for (int s = 0; s < num_sigma(); ++s) {
                    if (!enabled(hi, s)) continue;
                    if (!enabled(lo, s))
                        throw std::logic_error("monotonicity violation: enabled set not closed for " +
                                               sigma[size_t(s)]);
                    for (int t = 0; t < num_tau(); ++t)
                        if (!dom.leq(succ(lo, s, t), succ(hi, s, t)))
                            throw std::logic_error("monotonicity violation: successors not ordered for " +
                                                   sigma[size_t(s)] + "/" + tau[size_t(t)]);
                }
            }
        }
    }

    void validate() const {
        if (dist.size() != sigma.size() || cost.size() != sigma.size())
            throw std::invalid_argument("mdp: need one distribution and one cost partition per action");
        for (int s = 0; s < num_sigma(); ++s) {
            for (const auto& [pa, row] : dist[size_t(s)].blocks) {
                if (row.size() != tau.size())
                    throw std::invalid_argument("mdp: probability row length mismatch");
                Rat sum = 0;
                for (const auto& p : row) {
                    if (p < 0) throw std::invalid_argument("mdp: negative probability");
                    sum += p;
                }
                if (sum != 1) throw std::invalid_argument("mdp: distribution does not sum to 1");
            }
        }
    }

private:
    struct MemoKey {
        Elem x;
        int s;
        int t;
    };
    struct MemoLess {
        const D* dom;
        bool operator()(const MemoKey& a, const MemoKey& b) const {
            if (a.s != b.s) return a.s < b.s;
            if (a.t != b.t) return a.t < b.t;
            return dom->less(a.x, b.x);
        }
    };

    const Antichain<D>& pre_max_memo(const Elem& x, int s, int t) const {
        if (!pre_cache_) pre_cache_.emplace(MemoLess{&dom});
        auto it = pre_cache_->find(MemoKey{x, s, t});
        if (it == pre_cache_->end())
            it = pre_cache_->emplace(MemoKey{x, s, t}, pre_max(x, s, t)).first;
        return it->second;
    }

    void require_enabled(const Elem& e, int s) const {
        if (!enabled(e, s))
            throw std::domain_error("action " + sigma[size_t(s)] + " queried on a state where it is disabled");
    }

    std::vector<PseudoAntichain<D>> enabled_override_;
    mutable std::vector<std::optional<PseudoAntichain<D>>> enabled_cache_;
    mutable std::optional<std::map<MemoKey, Antichain<D>, MemoLess>> pre_cache_;
};

/// Cost/objective configuration carried next to the model.
struct CostModel {
    bool positive_costs = true;
    bool maximize = false;
};

}  // namespace pamdp
