#pragma once

#include <gmpxx.h>

#include <optional>
#include <string>

namespace pamdp {

/// Exact rational number. All probabilities, costs and values in the solver
/// are kept exact; floating point only appears behind the optional float
/// solver mode.
using Rat = mpq_class;

inline Rat rat(long num, long den = 1) {
    Rat r(num, den);
    r.canonicalize();
    return r;
}

/// Parses "num/den" or "num". Returns nullopt on malformed input or den == 0.
inline std::optional<Rat> parse_rat(const std::string& text) {
    auto slash = text.find('/');
    try {
        if (slash == std::string::npos) {
            mpz_class num(text);
            return Rat(num);
        }
        mpz_class num(text.substr(0, slash));
        mpz_class den(text.substr(slash + 1));
        if (den == 0) return std::nullopt;
        Rat r(num, den);
        r.canonicalize();
        return r;
    } catch (const std::invalid_argument&) {
        return std::nullopt;
    }
}

inline std::string rat_str(const Rat& r) { return r.get_str(); }

/// Size proxy used for pivot selection in exact elimination: total limb
/// count of numerator and denominator.
inline size_t rat_size(const Rat& r) {
    return mpz_size(r.get_num().get_mpz_t()) + mpz_size(r.get_den().get_mpz_t());
}

}  // namespace pamdp
