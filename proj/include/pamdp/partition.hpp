#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "pamdp/lattice.hpp"

namespace pamdp {

/// A finite list of pairwise-disjoint pseudo-antichain blocks with payloads,
/// covering exactly `carrier`. Blocks are never empty.
template <Domain D, typename Payload>
struct SymbolicPartition {
    std::vector<std::pair<PseudoAntichain<D>, Payload>> blocks;
    PseudoAntichain<D> carrier;

    size_t size() const { return blocks.size(); }
};

/// Strategy: one enabled action index per block.
template <Domain D>
using Strategy = SymbolicPartition<D, int>;

template <Domain D, typename Payload>
SymbolicPartition<D, Payload> make_partition(
    const D& dom, std::vector<std::pair<PseudoAntichain<D>, Payload>> blocks) {
    SymbolicPartition<D, Payload> part;
    part.carrier = pa_empty<D>();
    for (auto& [pa, payload] : blocks) {
        if (pa_is_empty(pa)) continue;
        part.carrier = pa_union(dom, part.carrier, pa);
        part.blocks.emplace_back(std::move(pa), std::move(payload));
    }
    return part;
}

/// Index of the unique block containing s, or nullopt when s is outside the
/// carrier.
template <Domain D, typename Payload>
std::optional<size_t> partition_lookup(const D& dom, const SymbolicPartition<D, Payload>& part,
                                       const typename D::Elem& s) {
    for (size_t i = 0; i < part.blocks.size(); ++i)
        if (pa_member(dom, s, part.blocks[i].first)) return i;
    return std::nullopt;
}

/// All non-empty pairwise intersections, payloads combined; blocks with equal
/// combined payload merged to keep the result coarse. Payload equality is
/// exact (operator==).
template <Domain D, typename P1, typename P2, typename Combine>
auto partition_product(const D& dom, const SymbolicPartition<D, P1>& p,
                       const SymbolicPartition<D, P2>& q, Combine combine)
    -> SymbolicPartition<D, std::decay_t<decltype(combine(std::declval<P1>(), std::declval<P2>()))>> {
    using Out = std::decay_t<decltype(combine(std::declval<P1>(), std::declval<P2>()))>;
    if (!pa_equal(dom, p.carrier, q.carrier))
        throw std::invalid_argument("partition_product: carrier mismatch");
    SymbolicPartition<D, Out> result;
    result.carrier = p.carrier;
    for (const auto& [bp, vp] : p.blocks) {
        for (const auto& [bq, vq] : q.blocks) {
            PseudoAntichain<D> inter = pa_intersect(dom, bp, bq);
            if (pa_is_empty(inter)) continue;
            Out payload = combine(vp, vq);
            bool merged = false;
            for (auto& [pa, existing] : result.blocks) {
                if (existing == payload) {
                    pa = pa_union(dom, pa, inter);
                    merged = true;
                    break;
                }
            }
            if (!merged) result.blocks.emplace_back(std::move(inter), std::move(payload));
        }
    }
    return result;
}

/// Splits every block B into the non-empty parts of {B n C, B \ C}. The
/// payload of B n C is rewritten through `rewrite(old)`; B \ C keeps its
/// payload.
template <Domain D, typename Payload, typename Rewrite>
SymbolicPartition<D, Payload> refine_block(const D& dom, const SymbolicPartition<D, Payload>& part,
                                           const PseudoAntichain<D>& c, Rewrite rewrite) {
    SymbolicPartition<D, Payload> result;
    result.carrier = part.carrier;
    for (const auto& [b, payload] : part.blocks) {
        PseudoAntichain<D> inter = pa_intersect(dom, b, c);
        if (pa_is_empty(inter)) {
            result.blocks.emplace_back(b, payload);
            continue;
        }
        PseudoAntichain<D> rest = pa_difference(dom, b, c);
        result.blocks.emplace_back(std::move(inter), rewrite(payload));
        if (!pa_is_empty(rest)) result.blocks.emplace_back(std::move(rest), payload);
    }
    return result;
}

template <Domain D, typename Payload>
SymbolicPartition<D, Payload> refine_block(const D& dom, const SymbolicPartition<D, Payload>& part,
                                           const PseudoAntichain<D>& c) {
    return refine_block(dom, part, c, [](const Payload& p) { return p; });
}

/// Merges blocks with equal payloads.
template <Domain D, typename Payload>
SymbolicPartition<D, Payload> coarsen(const D& dom, const SymbolicPartition<D, Payload>& part) {
    SymbolicPartition<D, Payload> result;
    result.carrier = part.carrier;
    for (const auto& [b, payload] : part.blocks) {
        bool merged = false;
        for (auto& [pa, existing] : result.blocks) {
            if (existing == payload) {
                pa = pa_union(dom, pa, b);
                merged = true;
                break;
            }
        }
        if (!merged) result.blocks.emplace_back(b, payload);
    }
    return result;
}

/// Disjointness + cover audit, for tests and internal sanity checks.
template <Domain D, typename Payload>
bool partition_valid(const D& dom, const SymbolicPartition<D, Payload>& part) {
    PseudoAntichain<D> covered = pa_empty<D>();
    for (size_t i = 0; i < part.blocks.size(); ++i) {
        if (pa_is_empty(part.blocks[i].first)) return false;
        for (size_t j = i + 1; j < part.blocks.size(); ++j)
            if (!pa_disjoint(dom, part.blocks[i].first, part.blocks[j].first)) return false;
        covered = pa_union(dom, covered, part.blocks[i].first);
    }
    return pa_equal(dom, covered, part.carrier);
}

}  // namespace pamdp
