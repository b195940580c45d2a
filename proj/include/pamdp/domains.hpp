#pragma once

#include <bit>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace pamdp {

/// Tuples of naturals in [0, cap]^dims under the componentwise order, with
/// componentwise min as meet. Top antichain is the single all-cap tuple.
class GridDomain {
public:
    using Elem = std::vector<int>;

    GridDomain(int dims, int cap) : dims_(dims), cap_(cap) {}

    int dims() const { return dims_; }
    int cap() const { return cap_; }

    bool leq(const Elem& a, const Elem& b) const {
        for (int i = 0; i < dims_; ++i)
            if (a[i] > b[i]) return false;
        return true;
    }

    Elem meet(const Elem& a, const Elem& b) const {
        Elem m(dims_);
        for (int i = 0; i < dims_; ++i) m[i] = std::min(a[i], b[i]);
        return m;
    }

    bool less(const Elem& a, const Elem& b) const { return a < b; }

    std::string to_string(const Elem& e) const {
        std::ostringstream os;
        os << "(";
        for (int i = 0; i < dims_; ++i) {
            if (i) os << ",";
            os << e[i];
        }
        os << ")";
        return os.str();
    }

    std::vector<Elem> top() const { return {Elem(dims_, cap_)}; }

    std::vector<Elem> enumerate() const {
        std::vector<Elem> all;
        Elem cur(dims_, 0);
        while (true) {
            all.push_back(cur);
            int i = 0;
            while (i < dims_ && cur[i] == cap_) cur[i++] = 0;
            if (i == dims_) break;
            ++cur[i];
        }
        return all;
    }

    uint64_t state_count() const {
        uint64_t n = 1;
        for (int i = 0; i < dims_; ++i) n *= uint64_t(cap_ + 1);
        return n;
    }

private:
    int dims_;
    int cap_;
};

/// The lattice 2^P of condition sets, ordered by reverse inclusion
/// (s below s' iff s is a superset of s'). Meet is set union; the unique
/// maximal element is the empty set. Elements are bitmasks over P.
class SubsetDomain {
public:
    using Elem = uint64_t;

    explicit SubsetDomain(std::vector<std::string> names) : names_(std::move(names)) {
        if (names_.size() > 63) throw std::invalid_argument("SubsetDomain: more than 63 conditions");
        full_ = (uint64_t(1) << names_.size()) - 1;
    }

    size_t conditions() const { return names_.size(); }
    uint64_t full_mask() const { return full_; }
    const std::vector<std::string>& names() const { return names_; }

    bool leq(Elem a, Elem b) const { return (a & b) == b; }
    Elem meet(Elem a, Elem b) const { return a | b; }
    bool less(Elem a, Elem b) const { return a < b; }

    std::string to_string(Elem e) const {
        std::ostringstream os;
        os << "{";
        bool first = true;
        for (size_t i = 0; i < names_.size(); ++i) {
            if (e & (uint64_t(1) << i)) {
                if (!first) os << " ";
                os << names_[i];
                first = false;
            }
        }
        os << "}";
        return os.str();
    }

    std::vector<Elem> top() const { return {Elem(0)}; }

    std::vector<Elem> enumerate() const {
        if (names_.size() > 24) throw std::length_error("SubsetDomain::enumerate: state space too large");
        std::vector<Elem> all;
        all.reserve(full_ + 1);
        for (Elem e = 0; e <= full_; ++e) all.push_back(e);
        return all;
    }

    uint64_t state_count() const { return full_ + 1; }

private:
    std::vector<std::string> names_;
    uint64_t full_;
};

}  // namespace pamdp
