#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pamdp/domains.hpp"
#include "pamdp/mdp.hpp"
#include "pamdp/rational.hpp"

namespace pamdp {

/// Condition sets are bitmasks over the condition list (at most 63).

/// Classical STRIPS with positive/negative guards and a goal given as
/// (must-be-true, must-be-false).
struct Strips {
    struct Op {
        std::string name;
        uint64_t guard_pos = 0, guard_neg = 0;
        uint64_t add = 0, del = 0;
        Rat cost = 1;
    };
    std::vector<std::string> conds;
    uint64_t init = 0;
    uint64_t goal_pos = 0, goal_neg = 0;
    std::vector<Op> ops;

    void validate() const;
};

/// Monotonic stochastic STRIPS: positive guards and goal only; operator
/// effects are exact distributions over (add, del) pairs.
struct Mss {
    struct Effect {
        uint64_t add = 0, del = 0;
        bool operator==(const Effect&) const = default;
    };
    struct Op {
        std::string name;
        uint64_t guard = 0;
        std::vector<std::pair<Rat, Effect>> effects;
        Rat cost = 1;
    };
    std::vector<std::string> conds;
    uint64_t init = 0;
    uint64_t goal = 0;
    std::vector<Op> ops;

    void validate() const;
};

/// Doubles the conditions with negated copies so that guards and the goal
/// become purely positive; plan validity is preserved.
Mss monotonize(const Strips& s);

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Mss parse_mss(std::istream& in);
Mss parse_mss_file(const std::string& path);
std::string write_mss(const Mss& m);

/// The MDP view of an MSS over the reverse-inclusion lattice of 2^P.
struct MssModel {
    SubsetDomain dom;
    MonotonicMdp<SubsetDomain> mdp;
    PseudoAntichain<SubsetDomain> goal;
    CostModel cost;
    uint64_t init = 0;
    std::vector<Mss::Effect> taus;  // tau index -> effect pair
};

MssModel mss_to_mdp(const Mss& m);

/// Greatest fixpoint of the non-blocking states; restricts the model's
/// enabled sets in place and returns the surviving state set. Throws when
/// every state blocks.
PseudoAntichain<SubsetDomain> prune_blocking(MssModel& model);

/// Benchmark generators with the documented parametrization; see README.
Mss gen_monkey(int sticks, int pieces);
Mss gen_moats(int castles, int depths);

}  // namespace pamdp
