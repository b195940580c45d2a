#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "pamdp/rational.hpp"

namespace pamdp {

/// Explicit sparse Markov chain over lumped blocks. Goal blocks are
/// absorbing rows with cost 0.
struct QuotientMc {
    std::vector<std::vector<std::pair<size_t, Rat>>> rows;  // sparse, per block
    std::vector<Rat> cost;
    std::vector<bool> goal;

    size_t size() const { return rows.size(); }
    void validate() const;
};

/// Raised when the evaluated strategy does not reach the goal almost surely.
struct NonProperError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Exact solve of the square system a x = b (one rhs per column of b).
/// Pivot rows are chosen by smallest numerator/denominator limb count to
/// curb coefficient growth. Returns nullopt when singular.
std::optional<std::vector<std::vector<Rat>>> gauss_solve(std::vector<std::vector<Rat>> a,
                                                         std::vector<std::vector<Rat>> b);

/// Expected truncated sum per block: exact solution of (I - P)v = C on
/// non-goal blocks, v = 0 on goals. Throws NonProperError on a singular
/// system.
std::vector<Rat> solve_ssp(const QuotientMc& q);

struct GainBias {
    std::vector<Rat> gain;
    std::vector<Rat> bias;
    /// Stationary distribution per recurrent class, as (block, pi) pairs;
    /// kept so the P* b = 0 normalization is independently checkable.
    std::vector<std::vector<std::pair<size_t, Rat>>> stationary;
};

/// Gain/bias of a (possibly multichain) quotient: (P-I)g = 0,
/// C - g + (P-I)b = 0, P* b = 0, all exact.
GainBias solve_gain_bias(const QuotientMc& q);

/// Residual audits; all comparisons exact.
bool check_ssp_residual(const QuotientMc& q, const std::vector<Rat>& v);
bool check_gain_bias_residual(const QuotientMc& q, const GainBias& gb);

}  // namespace pamdp
