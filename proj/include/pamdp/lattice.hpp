#pragma once

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace pamdp {

/// A Domain models a finite meet-semilattice (S, leq) together with a total
/// serialization order `less` used to keep all symbolic values in a canonical
/// element order. `top()` is the antichain of maximal elements of S.
template <typename D>
concept Domain = requires(const D d, const typename D::Elem a, const typename D::Elem b) {
    { d.leq(a, b) } -> std::convertible_to<bool>;
    { d.meet(a, b) } -> std::same_as<typename D::Elem>;
    { d.less(a, b) } -> std::convertible_to<bool>;
    { d.to_string(a) } -> std::convertible_to<std::string>;
    { d.top() } -> std::same_as<std::vector<typename D::Elem>>;
};

template <Domain D>
struct Antichain {
    std::vector<typename D::Elem> elems;  // pairwise incomparable, sorted by D::less

    bool empty() const { return elems.empty(); }
    size_t size() const { return elems.size(); }
};

namespace detail {

template <Domain D>
bool elem_eq(const D& dom, const typename D::Elem& a, const typename D::Elem& b) {
    return !dom.less(a, b) && !dom.less(b, a);
}

}  // namespace detail

/// Builds the antichain of maximal elements of an arbitrary element list.
template <Domain D>
Antichain<D> ac_of(const D& dom, std::vector<typename D::Elem> elems) {
    std::vector<typename D::Elem> maximal;
    for (const auto& e : elems) {
        bool dominated = false;
        for (const auto& m : maximal) {
            if (dom.leq(e, m)) {
                dominated = true;
                break;
            }
        }
        if (dominated) continue;
        std::erase_if(maximal, [&](const auto& m) { return dom.leq(m, e); });
        maximal.push_back(e);
    }
    std::sort(maximal.begin(), maximal.end(),
              [&](const auto& a, const auto& b) { return dom.less(a, b); });
    return Antichain<D>{std::move(maximal)};
}

/// s in the closure of alpha.
template <Domain D>
bool ac_member(const D& dom, const typename D::Elem& s, const Antichain<D>& alpha) {
    for (const auto& a : alpha.elems)
        if (dom.leq(s, a)) return true;
    return false;
}

template <Domain D>
Antichain<D> ac_union(const D& dom, const Antichain<D>& a, const Antichain<D>& b) {
    std::vector<typename D::Elem> all = a.elems;
    all.insert(all.end(), b.elems.begin(), b.elems.end());
    return ac_of(dom, std::move(all));
}

template <Domain D>
Antichain<D> ac_intersect(const D& dom, const Antichain<D>& a, const Antichain<D>& b) {
    std::vector<typename D::Elem> meets;
    meets.reserve(a.size() * b.size());
    for (const auto& x : a.elems)
        for (const auto& y : b.elems) meets.push_back(dom.meet(x, y));
    return ac_of(dom, std::move(meets));
}

/// Decides closure(a) subseteq closure(b).
template <Domain D>
bool ac_subset(const D& dom, const Antichain<D>& a, const Antichain<D>& b) {
    for (const auto& x : a.elems)
        if (!ac_member(dom, x, b)) return false;
    return true;
}

template <Domain D>
bool ac_equal(const D& dom, const Antichain<D>& a, const Antichain<D>& b) {
    return ac_subset(dom, a, b) && ac_subset(dom, b, a);
}

/// A pseudo-element (x, alpha) denotes closure{x} \ closure(alpha).
/// Invariant: x not in closure(alpha); canonical form: every a in alpha is
/// below x.
template <Domain D>
struct PseudoElement {
    typename D::Elem x;
    Antichain<D> alpha;
};

/// Canonical representation of the same pseudo-closure, or nullopt when
/// x lies inside the closure of alpha (empty denotation).
template <Domain D>
std::optional<PseudoElement<D>> pe_make(const D& dom, typename D::Elem x, const Antichain<D>& alpha) {
    if (ac_member(dom, x, alpha)) return std::nullopt;
    std::vector<typename D::Elem> meets;
    meets.reserve(alpha.size());
    for (const auto& a : alpha.elems) meets.push_back(dom.meet(x, a));
    return PseudoElement<D>{std::move(x), ac_of(dom, std::move(meets))};
}

template <Domain D>
PseudoElement<D> pe_canonicalize(const D& dom, const typename D::Elem& x, const Antichain<D>& alpha) {
    auto pe = pe_make(dom, x, alpha);
    if (!pe) throw std::invalid_argument("pe_canonicalize: x lies inside the excluded closure");
    return *pe;
}

/// Membership in the pseudo-closure of (x, alpha).
template <Domain D>
bool pe_member(const D& dom, const typename D::Elem& s, const PseudoElement<D>& p) {
    return dom.leq(s, p.x) && !ac_member(dom, s, p.alpha);
}

/// Inclusion test on pseudo-closures: x below y and every exclusion bound of
/// q, met with x, falls inside p's exclusions.
template <Domain D>
bool pe_subset(const D& dom, const PseudoElement<D>& p, const PseudoElement<D>& q) {
    if (!dom.leq(p.x, q.x)) return false;
    for (const auto& b : q.alpha.elems)
        if (!ac_member(dom, dom.meet(b, p.x), p.alpha)) return false;
    return true;
}

/// A pseudo-antichain denotes the union of the pseudo-closures of its
/// elements. Always kept in simplified form: canonical pseudo-elements,
/// pairwise distinct tops, no pseudo-closure contained in another, sorted by
/// the domain serialization order of the tops.
template <Domain D>
struct PseudoAntichain {
    std::vector<PseudoElement<D>> elems;

    bool empty() const { return elems.empty(); }
    size_t size() const { return elems.size(); }
};

template <Domain D>
PseudoAntichain<D> pa_simplify(const D& dom, std::vector<PseudoElement<D>> raw) {
    // Canonicalize, dropping empty denotations.
    std::vector<PseudoElement<D>> canon;
    canon.reserve(raw.size());
    for (auto& p : raw) {
        auto c = pe_make(dom, std::move(p.x), p.alpha);
        if (c) canon.push_back(std::move(*c));
    }
    // Merge equal tops: (x, a) and (x, b) denote together (x, a meet b).
    std::sort(canon.begin(), canon.end(),
              [&](const auto& a, const auto& b) { return dom.less(a.x, b.x); });
    std::vector<PseudoElement<D>> merged;
    for (auto& p : canon) {
        if (!merged.empty() && detail::elem_eq(dom, merged.back().x, p.x)) {
            merged.back().alpha = ac_intersect(dom, merged.back().alpha, p.alpha);
        } else {
            merged.push_back(std::move(p));
        }
    }
    // Drop pseudo-elements whose closure is contained in another's. Equal
    // closures are impossible here: canonical + equal closure would force
    // equal tops, already merged above.
    std::vector<bool> keep(merged.size(), true);
    for (size_t i = 0; i < merged.size(); ++i)
        for (size_t j = 0; j < merged.size(); ++j)
            if (i != j && keep[i] && pe_subset(dom, merged[i], merged[j])) keep[i] = false;
    std::vector<PseudoElement<D>> kept;
    for (size_t i = 0; i < merged.size(); ++i)
        if (keep[i]) kept.push_back(std::move(merged[i]));
    return PseudoAntichain<D>{std::move(kept)};
}

template <Domain D>
PseudoAntichain<D> pa_empty() {
    return PseudoAntichain<D>{};
}

template <Domain D>
PseudoAntichain<D> pa_from_antichain(const D& dom, const Antichain<D>& alpha) {
    std::vector<PseudoElement<D>> elems;
    elems.reserve(alpha.size());
    for (const auto& x : alpha.elems) elems.push_back(PseudoElement<D>{x, Antichain<D>{}});
    return pa_simplify(dom, std::move(elems));
}

/// The whole state space as a pseudo-antichain.
template <Domain D>
PseudoAntichain<D> pa_full(const D& dom) {
    return pa_from_antichain(dom, Antichain<D>{dom.top()});
}

template <Domain D>
bool pa_member(const D& dom, const typename D::Elem& s, const PseudoAntichain<D>& a) {
    for (const auto& p : a.elems)
        if (pe_member(dom, s, p)) return true;
    return false;
}

template <Domain D>
bool pa_is_empty(const PseudoAntichain<D>& a) {
    return a.elems.empty();
}

template <Domain D>
PseudoAntichain<D> pa_union(const D& dom, const PseudoAntichain<D>& a, const PseudoAntichain<D>& b) {
    std::vector<PseudoElement<D>> all = a.elems;
    all.insert(all.end(), b.elems.begin(), b.elems.end());
    return pa_simplify(dom, std::move(all));
}

namespace detail {

/// Intersection of two pseudo-closures as at most one candidate couple.
template <Domain D>
void pe_intersect_into(const D& dom, const PseudoElement<D>& p, const PseudoElement<D>& q,
                       std::vector<PseudoElement<D>>& out) {
    auto r = pe_make(dom, dom.meet(p.x, q.x), ac_union(dom, p.alpha, q.alpha));
    if (r) out.push_back(std::move(*r));
}

/// Difference of two pseudo-closures as candidate couples.
template <Domain D>
void pe_difference_into(const D& dom, const PseudoElement<D>& p, const PseudoElement<D>& q,
                        std::vector<PseudoElement<D>>& out) {
    auto keep = pe_make(dom, p.x, ac_union(dom, Antichain<D>{{q.x}}, p.alpha));
    if (keep) out.push_back(std::move(*keep));
    for (const auto& b : q.alpha.elems) {
        auto below = pe_make(dom, dom.meet(p.x, b), p.alpha);
        if (below) out.push_back(std::move(*below));
    }
}

}  // namespace detail

template <Domain D>
PseudoAntichain<D> pa_intersect(const D& dom, const PseudoAntichain<D>& a,
                                const PseudoAntichain<D>& b) {
    std::vector<PseudoElement<D>> out;
    for (const auto& p : a.elems)
        for (const auto& q : b.elems) detail::pe_intersect_into(dom, p, q, out);
    return pa_simplify(dom, std::move(out));
}

/// A \ B, via A \ (q1 u q2 u ...) = ((A \ q1) \ q2) ...
template <Domain D>
PseudoAntichain<D> pa_difference(const D& dom, const PseudoAntichain<D>& a,
                                 const PseudoAntichain<D>& b) {
    PseudoAntichain<D> result = a;
    for (const auto& q : b.elems) {
        std::vector<PseudoElement<D>> out;
        for (const auto& p : result.elems) detail::pe_difference_into(dom, p, q, out);
        result = pa_simplify(dom, std::move(out));
        if (result.empty()) break;
    }
    return result;
}

template <Domain D>
bool pa_subset(const D& dom, const PseudoAntichain<D>& a, const PseudoAntichain<D>& b) {
    return pa_is_empty(pa_difference(dom, a, b));
}

template <Domain D>
bool pa_equal(const D& dom, const PseudoAntichain<D>& a, const PseudoAntichain<D>& b) {
    return pa_subset(dom, a, b) && pa_subset(dom, b, a);
}

template <Domain D>
bool pa_disjoint(const D& dom, const PseudoAntichain<D>& a, const PseudoAntichain<D>& b) {
    return pa_is_empty(pa_intersect(dom, a, b));
}

/// Debug rendering: one {max, excluded: [...]} record per pseudo-element.
template <Domain D>
std::string pa_debug(const D& dom, const PseudoAntichain<D>& a) {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < a.elems.size(); ++i) {
        if (i) os << ", ";
        os << "{max: " << dom.to_string(a.elems[i].x) << ", excluded: [";
        const auto& alpha = a.elems[i].alpha.elems;
        for (size_t j = 0; j < alpha.size(); ++j) {
            if (j) os << ", ";
            os << dom.to_string(alpha[j]);
        }
        os << "]}";
    }
    os << "]";
    return os.str();
}

}  // namespace pamdp
