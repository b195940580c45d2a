#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "brute.hpp"
#include "pamdp/strips.hpp"

using namespace pamdp;

namespace {

// Example 5 monkey model: box/stick/bananas with three stochastic banana
// operators.
Mss example_monkey() {
    Mss m;
    m.conds = {"box", "stick", "bananas"};
    const uint64_t box = 1, stick = 2, bananas = 4;
    m.init = 0;
    m.goal = bananas;
    m.ops.push_back({"takebox", 0, {{Rat(1), {box, 0}}}, Rat(1)});
    m.ops.push_back({"takestick", 0, {{Rat(1), {stick, 0}}}, Rat(1)});
    m.ops.push_back({"takebananaswithbox", box, {{rat(1, 4), {bananas, 0}}, {rat(3, 4), {0, 0}}}, Rat(2)});
    m.ops.push_back(
        {"takebananaswithstick", stick, {{rat(1, 5), {bananas, 0}}, {rat(4, 5), {0, 0}}}, Rat(2)});
    m.ops.push_back(
        {"takebananaswithboth", box | stick, {{rat(1, 2), {bananas, 0}}, {rat(1, 2), {0, 0}}}, Rat(2)});
    m.validate();
    return m;
}

int sigma_index(const MssModel& mm, const std::string& name) {
    for (int s = 0; s < mm.mdp.num_sigma(); ++s)
        if (mm.mdp.sigma[size_t(s)] == name) return s;
    REQUIRE(false);
    return -1;
}

int tau_index(const MssModel& mm, Mss::Effect eff) {
    for (size_t t = 0; t < mm.taus.size(); ++t)
        if (mm.taus[t] == eff) return int(t);
    REQUIRE(false);
    return -1;
}

}  // namespace

TEST_CASE("monotonize doubles conditions and rewrites guards/effects") {
    Strips s;
    s.conds = {"p", "q"};
    s.init = 0b01;
    s.goal_pos = 0b10;
    s.goal_neg = 0b01;
    s.ops.push_back({"flip", 0b01, 0b10, 0b10, 0b01, Rat(1)});
    auto m = monotonize(s);
    CHECK(m.conds == std::vector<std::string>{"p", "q", "!p", "!q"});
    const auto& op = m.ops[0];
    // guard' = {p, !q}; add' = {q, !p}; del' = {p, !q}
    CHECK(op.guard == 0b1001);
    CHECK(op.effects[0].second.add == 0b0110);
    CHECK(op.effects[0].second.del == 0b1001);
    CHECK(m.init == 0b1001);        // p true, q false
    CHECK(m.goal == 0b0110);        // q and not-p
}

TEST_CASE("monotonize preserves plan reachability") {
    Strips s;
    s.conds = {"a", "b", "c"};
    s.init = 0b001;
    s.goal_pos = 0b100;
    s.goal_neg = 0b001;
    s.ops.push_back({"mk_b", 0b001, 0b100, 0b010, 0, Rat(1)});
    s.ops.push_back({"mk_c", 0b010, 0, 0b100, 0b001, Rat(1)});
    auto reach_strips = [&]() {
        // Explicit BFS over 2^P with STRIPS semantics.
        std::set<uint64_t> seen{s.init};
        std::vector<uint64_t> queue{s.init};
        while (!queue.empty()) {
            uint64_t q = queue.back();
            queue.pop_back();
            if ((q & s.goal_pos) == s.goal_pos && (q & s.goal_neg) == 0) return true;
            for (const auto& op : s.ops) {
                if ((q & op.guard_pos) != op.guard_pos || (q & op.guard_neg)) continue;
                uint64_t q2 = (q | op.add) & ~op.del;
                if (seen.insert(q2).second) queue.push_back(q2);
            }
        }
        return false;
    };
    auto m = monotonize(s);
    auto reach_mss = [&]() {
        std::set<uint64_t> seen{m.init};
        std::vector<uint64_t> queue{m.init};
        while (!queue.empty()) {
            uint64_t q = queue.back();
            queue.pop_back();
            if ((q & m.goal) == m.goal) return true;
            for (const auto& op : m.ops) {
                if ((q & op.guard) != op.guard) continue;
                for (const auto& [p, eff] : op.effects) {
                    uint64_t q2 = (q | eff.add) & ~eff.del;
                    if (seen.insert(q2).second) queue.push_back(q2);
                }
            }
        }
        return false;
    };
    CHECK(reach_strips() == reach_mss());
    CHECK(reach_strips());
}

TEST_CASE("parser roundtrip and error reporting") {
    auto m = example_monkey();
    auto text = write_mss(m);
    std::istringstream in(text);
    auto m2 = parse_mss(in);
    CHECK(m2.conds == m.conds);
    CHECK(m2.init == m.init);
    CHECK(m2.goal == m.goal);
    REQUIRE(m2.ops.size() == m.ops.size());
    for (size_t i = 0; i < m.ops.size(); ++i) {
        CHECK(m2.ops[i].name == m.ops[i].name);
        CHECK(m2.ops[i].guard == m.ops[i].guard);
        CHECK(m2.ops[i].cost == m.ops[i].cost);
        CHECK(m2.ops[i].effects == m.ops[i].effects);
    }

    std::istringstream bad1("conditions: a b\ninit: a\ngoal: c\n");
    CHECK_THROWS_WITH_AS(parse_mss(bad1), "line 3: unknown condition 'c'", ParseError);
    std::istringstream bad2(
        "conditions: a\ninit:\ngoal: a\noperator op cost 1\n guard:\n effect 1/2 add: a del:\n");
    CHECK_THROWS_AS(parse_mss(bad2), ParseError);
}

TEST_CASE("mss_to_mdp: successor, probabilities, pre_max") {
    auto mm = mss_to_mdp(example_monkey());
    const uint64_t box = 1, stick = 2, bananas = 4;
    int withstick = sigma_index(mm, "takebananaswithstick");
    int tb = tau_index(mm, Mss::Effect{bananas, 0});
    int tn = tau_index(mm, Mss::Effect{0, 0});
    CHECK(mm.mdp.succ_value(stick, withstick, tb) == (stick | bananas));
    CHECK(mm.mdp.prob_of(stick, withstick, tb) == rat(1, 5));
    CHECK(mm.mdp.prob_of(stick, withstick, tn) == rat(4, 5));
    CHECK(mm.mdp.cost_of(stick, withstick) == Rat(2));
    // succ with the empty effect is the identity.
    CHECK(mm.mdp.succ_value(box, sigma_index(mm, "takebananaswithbox"), tn) == box);
    // pre_max({bananas}) under takebananaswithstick is {{stick}}.
    auto pm = mm.mdp.pre_max(bananas, withstick, tb);
    REQUIRE(pm.size() == 1);
    CHECK(pm.elems[0] == stick);
    // Deleted condition kills the predecessor set.
    Mss delmod = example_monkey();
    delmod.ops[0].effects = {{Rat(1), {box, bananas}}};
    auto mm2 = mss_to_mdp(delmod);
    CHECK(mm2.mdp.pre_max(bananas, 0, tau_index(mm2, Mss::Effect{box, bananas})).empty());
}

TEST_CASE("states_enabling matches guards") {
    auto mm = mss_to_mdp(example_monkey());
    const auto& dom = mm.mdp.dom;
    // Empty guard enables everywhere.
    CHECK(pa_equal(dom, mm.mdp.states_enabling(sigma_index(mm, "takebox")), pa_full(dom)));
    // Guard {box, stick}: enabled exactly on supersets.
    auto sb = mm.mdp.states_enabling(sigma_index(mm, "takebananaswithboth"));
    for (auto e : dom.enumerate()) CHECK(pa_member(dom, e, sb) == ((e & 3) == 3));
}

TEST_CASE("pre_star agrees with brute-force predecessors") {
    auto mm = mss_to_mdp(example_monkey());
    const auto& dom = mm.mdp.dom;
    std::mt19937 rng(23);
    for (int iter = 0; iter < 100; ++iter) {
        auto a = brute::random_pa(dom, rng, 3);
        auto sa = brute::pa_set(dom, a);
        for (int s = 0; s < mm.mdp.num_sigma(); ++s) {
            for (int t = 0; t < mm.mdp.num_tau(); ++t) {
                auto pre = mm.mdp.pre_star(a, s, t);
                for (auto e : dom.enumerate()) {
                    bool expected = mm.mdp.enabled(e, s) && sa.count(mm.mdp.succ(e, s, t));
                    CHECK(pa_member(dom, e, pre) == expected);
                }
            }
        }
    }
}

TEST_CASE("pre_star distributes over boolean operations") {
    auto mm = mss_to_mdp(example_monkey());
    const auto& dom = mm.mdp.dom;
    std::mt19937 rng(29);
    for (int iter = 0; iter < 60; ++iter) {
        auto a = brute::random_pa(dom, rng, 3);
        auto b = brute::random_pa(dom, rng, 3);
        for (int s = 0; s < mm.mdp.num_sigma(); ++s) {
            for (int t = 0; t < mm.mdp.num_tau(); ++t) {
                auto pu = mm.mdp.pre_star(pa_union(dom, a, b), s, t);
                auto pi = mm.mdp.pre_star(pa_intersect(dom, a, b), s, t);
                auto pd = mm.mdp.pre_star(pa_difference(dom, a, b), s, t);
                auto pa_ = mm.mdp.pre_star(a, s, t);
                auto pb = mm.mdp.pre_star(b, s, t);
                CHECK(pa_equal(dom, pu, pa_union(dom, pa_, pb)));
                CHECK(pa_equal(dom, pi, pa_intersect(dom, pa_, pb)));
                CHECK(pa_equal(dom, pd, pa_difference(dom, pa_, pb)));
            }
        }
    }
}

TEST_CASE("monotonicity audit passes on generated models") {
    auto mm = mss_to_mdp(gen_monkey(1, 2));
    mm.mdp.audit_monotonicity(mm.dom.enumerate());
}

TEST_CASE("prune_blocking") {
    // A model with an empty-guard operator never blocks.
    auto mm = mss_to_mdp(example_monkey());
    auto n = prune_blocking(mm);
    CHECK(pa_equal(mm.dom, n, pa_full(mm.dom)));

    // Only guard {p}, p never produced: states without p are removed.
    Mss m;
    m.conds = {"p", "q"};
    m.init = 1;
    m.goal = 2;
    m.ops.push_back({"mk_q", 1, {{Rat(1), {2, 0}}}, Rat(1)});
    m.validate();
    auto mm2 = mss_to_mdp(m);
    auto n2 = prune_blocking(mm2);
    for (auto e : mm2.dom.enumerate()) CHECK(pa_member(mm2.dom, e, n2) == bool(e & 1));
    // Restricted enabled set stays within the surviving states.
    CHECK(pa_subset(mm2.dom, mm2.mdp.states_enabling(0), n2));
}

TEST_CASE("generators: state counts match the documented pattern") {
    CHECK(mss_to_mdp(gen_monkey(1, 2)).dom.state_count() == 256);
    CHECK(mss_to_mdp(gen_monkey(1, 3)).dom.state_count() == 1024);
    CHECK(mss_to_mdp(gen_monkey(2, 2)).dom.state_count() == 1024);
    CHECK(mss_to_mdp(gen_monkey(3, 4)).dom.state_count() == 1048576);
    CHECK(mss_to_mdp(gen_moats(2, 3)).dom.state_count() == 256);
    CHECK(mss_to_mdp(gen_moats(3, 2)).dom.state_count() == 512);
    CHECK_THROWS_AS(gen_monkey(0, 2), std::invalid_argument);
    CHECK_THROWS_AS(gen_moats(9, 7), std::invalid_argument);
}

TEST_CASE("generator models validate and are goal-reachable from init") {
    for (auto [s, p] : {std::pair{1, 2}, {2, 2}, {1, 3}}) {
        auto mm = mss_to_mdp(gen_monkey(s, p));
        // BFS reachability of the goal from init under positive-probability
        // moves.
        std::set<uint64_t> seen{mm.init};
        std::vector<uint64_t> queue{mm.init};
        bool found = false;
        while (!queue.empty() && !found) {
            uint64_t q = queue.back();
            queue.pop_back();
            if (pa_member(mm.dom, q, mm.goal)) {
                found = true;
                break;
            }
            for (int a = 0; a < mm.mdp.num_sigma(); ++a) {
                if (!mm.mdp.enabled(q, a)) continue;
                for (int t : mm.mdp.support(a)) {
                    uint64_t q2 = mm.mdp.succ(q, a, t);
                    if (seen.insert(q2).second) queue.push_back(q2);
                }
            }
        }
        CHECK(found);
    }
}
