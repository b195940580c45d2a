#include "pamdp/strips.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

namespace pamdp {

namespace {

uint64_t bit(size_t i) { return uint64_t(1) << i; }

void check_mask(uint64_t m, size_t n, const char* what) {
    if (n < 64 && (m >> n) != 0) throw std::invalid_argument(std::string(what) + ": condition out of range");
}

}  // namespace

void Strips::validate() const {
    size_t n = conds.size();
    if (n > 31) throw std::invalid_argument("strips: too many conditions to monotonize");
    check_mask(init, n, "init");
    check_mask(goal_pos | goal_neg, n, "goal");
    if (goal_pos & goal_neg) throw std::invalid_argument("strips: goal condition both true and false");
    for (const auto& op : ops) {
        check_mask(op.guard_pos | op.guard_neg | op.add | op.del, n, op.name.c_str());
        if (op.guard_pos & op.guard_neg)
            throw std::invalid_argument("strips: operator " + op.name + " has contradictory guard");
        if (op.add & op.del)
            throw std::invalid_argument("strips: operator " + op.name + " adds and deletes a condition");
    }
}

void Mss::validate() const {
    size_t n = conds.size();
    if (n > 63) throw std::invalid_argument("mss: too many conditions");
    check_mask(init, n, "init");
    check_mask(goal, n, "goal");
    for (const auto& op : ops) {
        check_mask(op.guard, n, op.name.c_str());
        if (op.cost <= 0) throw std::invalid_argument("mss: operator " + op.name + " has non-positive cost");
        if (op.effects.empty()) throw std::invalid_argument("mss: operator " + op.name + " has no effect");
        Rat sum = 0;
        for (const auto& [p, eff] : op.effects) {
            check_mask(eff.add | eff.del, n, op.name.c_str());
            if (eff.add & eff.del)
                throw std::invalid_argument("mss: operator " + op.name + " adds and deletes a condition");
            if (p < 0) throw std::invalid_argument("mss: operator " + op.name + " has a negative probability");
            sum += p;
        }
        if (sum != 1) throw std::invalid_argument("mss: effects of " + op.name + " do not sum to 1");
    }
}

Mss monotonize(const Strips& s) {
    s.validate();
    size_t n = s.conds.size();
    uint64_t full = (n == 0) ? 0 : (bit(n) - 1);
    auto barred = [n](uint64_t m) { return m << n; };
    Mss out;
    out.conds = s.conds;
    for (const auto& c : s.conds) out.conds.push_back("!" + c);
    out.init = s.init | barred(full & ~s.init);
    out.goal = s.goal_pos | barred(s.goal_neg);
    for (const auto& op : s.ops) {
        Mss::Op o;
        o.name = op.name;
        o.cost = op.cost;
        o.guard = op.guard_pos | barred(op.guard_neg);
        o.effects = {{Rat(1), Mss::Effect{op.add | barred(op.del), op.del | barred(op.add)}}};
        out.ops.push_back(std::move(o));
    }
    out.validate();
    return out;
}

namespace {

struct Tokenizer {
    std::istream& in;
    int line = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError("line " + std::to_string(line) + ": " + msg);
    }

    bool next_line(std::vector<std::string>& tokens) {
        std::string raw;
        while (std::getline(in, raw)) {
            ++line;
            auto hash = raw.find('#');
            if (hash != std::string::npos) raw.erase(hash);
            std::istringstream is(raw);
            tokens.clear();
            std::string t;
            while (is >> t) tokens.push_back(t);
            if (!tokens.empty()) return true;
        }
        return false;
    }
};

}  // namespace

Mss parse_mss(std::istream& in) {
    Tokenizer tz{in};
    Mss m;
    std::map<std::string, size_t> index;
    auto cond_mask = [&](const std::vector<std::string>& tokens, size_t from, size_t to) {
        uint64_t mask = 0;
        for (size_t i = from; i < to; ++i) {
            auto it = index.find(tokens[i]);
            if (it == index.end()) tz.fail("unknown condition '" + tokens[i] + "'");
            mask |= bit(it->second);
        }
        return mask;
    };
    std::vector<std::string> tok;
    bool have_conds = false, have_init = false, have_goal = false;
    while (tz.next_line(tok)) {
        if (tok[0] == "conditions:") {
            if (have_conds) tz.fail("duplicate conditions line");
            have_conds = true;
            for (size_t i = 1; i < tok.size(); ++i) {
                if (index.count(tok[i])) tz.fail("duplicate condition '" + tok[i] + "'");
                index[tok[i]] = m.conds.size();
                m.conds.push_back(tok[i]);
            }
            if (m.conds.size() > 63) tz.fail("more than 63 conditions");
        } else if (tok[0] == "init:") {
            if (!have_conds) tz.fail("init before conditions");
            have_init = true;
            m.init = cond_mask(tok, 1, tok.size());
        } else if (tok[0] == "goal:") {
            if (!have_conds) tz.fail("goal before conditions");
            have_goal = true;
            m.goal = cond_mask(tok, 1, tok.size());
        } else if (tok[0] == "operator") {
            if (!have_conds) tz.fail("operator before conditions");
            if (tok.size() != 4 || tok[2] != "cost") tz.fail("expected: operator <name> cost <num>/<den>");
            Mss::Op op;
            op.name = tok[1];
            auto c = parse_rat(tok[3]);
            if (!c) tz.fail("malformed cost '" + tok[3] + "'");
            op.cost = *c;
            m.ops.push_back(std::move(op));
        } else if (tok[0] == "guard:") {
            if (m.ops.empty()) tz.fail("guard outside an operator");
            m.ops.back().guard = cond_mask(tok, 1, tok.size());
        } else if (tok[0] == "effect") {
            if (m.ops.empty()) tz.fail("effect outside an operator");
            if (tok.size() < 3) tz.fail("expected: effect <num>/<den> add: ... del: ...");
            auto p = parse_rat(tok[1]);
            if (!p) tz.fail("malformed probability '" + tok[1] + "'");
            if (tok[2] != "add:") tz.fail("expected 'add:' after the probability");
            size_t del_at = tok.size();
            for (size_t i = 3; i < tok.size(); ++i)
                if (tok[i] == "del:") {
                    del_at = i;
                    break;
                }
            if (del_at == tok.size()) tz.fail("missing 'del:' in effect");
            Mss::Effect eff{cond_mask(tok, 3, del_at), cond_mask(tok, del_at + 1, tok.size())};
            m.ops.back().effects.emplace_back(*p, eff);
        } else {
            tz.fail("unrecognized directive '" + tok[0] + "'");
        }
    }
    if (!have_conds) throw ParseError("missing conditions line");
    if (!have_init) throw ParseError("missing init line");
    if (!have_goal) throw ParseError("missing goal line");
    try {
        m.validate();
    } catch (const std::invalid_argument& e) {
        throw ParseError(e.what());
    }
    return m;
}

Mss parse_mss_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    return parse_mss(in);
}

std::string write_mss(const Mss& m) {
    std::ostringstream os;
    auto names = [&](uint64_t mask) {
        std::string out;
        for (size_t i = 0; i < m.conds.size(); ++i)
            if (mask & bit(i)) {
                if (!out.empty()) out += " ";
                out += m.conds[i];
            }
        return out;
    };
    os << "conditions:";
    for (const auto& c : m.conds) os << " " << c;
    os << "\ninit: " << names(m.init) << "\ngoal: " << names(m.goal) << "\n";
    for (const auto& op : m.ops) {
        os << "operator " << op.name << " cost " << rat_str(op.cost) << "\n";
        os << "  guard: " << names(op.guard) << "\n";
        for (const auto& [p, eff] : op.effects)
            os << "  effect " << rat_str(p) << " add: " << names(eff.add) << "  del: " << names(eff.del)
               << "\n";
    }
    return os.str();
}

MssModel mss_to_mdp(const Mss& m) {
    m.validate();
    SubsetDomain dom(m.conds);

    std::vector<Mss::Effect> taus;
    std::vector<std::string> tau_names;
    for (const auto& op : m.ops) {
        for (const auto& [p, eff] : op.effects) {
            if (p == 0) continue;
            if (std::find(taus.begin(), taus.end(), eff) == taus.end()) {
                taus.push_back(eff);
                std::string nm = "(+{";
                bool first = true;
                for (size_t i = 0; i < m.conds.size(); ++i)
                    if (eff.add & bit(i)) {
                        if (!first) nm += " ";
                        nm += m.conds[i];
                        first = false;
                    }
                nm += "} -{";
                first = true;
                for (size_t i = 0; i < m.conds.size(); ++i)
                    if (eff.del & bit(i)) {
                        if (!first) nm += " ";
                        nm += m.conds[i];
                        first = false;
                    }
                nm += "})";
                tau_names.push_back(nm);
            }
        }
    }

    std::vector<std::string> sigma_names;
    std::vector<uint64_t> guards;
    for (const auto& op : m.ops) {
        sigma_names.push_back(op.name);
        guards.push_back(op.guard);
    }

    MonotonicMdp<SubsetDomain> mdp(dom, sigma_names, tau_names);
    mdp.succ = [taus](uint64_t s, int /*sigma*/, int t) { return (s | taus[size_t(t)].add) & ~taus[size_t(t)].del; };
    mdp.pre_max = [guards, taus](uint64_t x, int s, int t) {
        const auto& eff = taus[size_t(t)];
        if (x & eff.del) return Antichain<SubsetDomain>{};
        return Antichain<SubsetDomain>{{guards[size_t(s)] | (x & ~eff.add)}};
    };
    for (const auto& op : m.ops) {
        ProbRow row(taus.size(), Rat(0));
        for (const auto& [p, eff] : op.effects) {
            if (p == 0) continue;
            size_t t = size_t(std::find(taus.begin(), taus.end(), eff) - taus.begin());
            row[t] += p;
        }
        SymbolicPartition<SubsetDomain, ProbRow> dp;
        dp.carrier = pa_full(dom);
        dp.blocks.emplace_back(pa_full(dom), std::move(row));
        mdp.dist.push_back(std::move(dp));
        SymbolicPartition<SubsetDomain, Rat> cp;
        cp.carrier = pa_full(dom);
        cp.blocks.emplace_back(pa_full(dom), op.cost);
        mdp.cost.push_back(std::move(cp));
    }
    mdp.validate();

    PseudoAntichain<SubsetDomain> goal = pa_from_antichain(dom, Antichain<SubsetDomain>{{m.goal}});
    return MssModel{dom, std::move(mdp), std::move(goal), CostModel{}, m.init, std::move(taus)};
}

PseudoAntichain<SubsetDomain> prune_blocking(MssModel& model) {
    auto& mdp = model.mdp;
    const auto& dom = mdp.dom;
    PseudoAntichain<SubsetDomain> n = pa_full(dom);
    std::vector<std::vector<int>> support;
    for (int s = 0; s < mdp.num_sigma(); ++s) support.push_back(mdp.support(s));
    while (true) {
        PseudoAntichain<SubsetDomain> next = pa_empty<SubsetDomain>();
        for (int s = 0; s < mdp.num_sigma(); ++s) {
            PseudoAntichain<SubsetDomain> safe = pa_full(dom);
            for (int t : support[size_t(s)]) {
                safe = pa_intersect(dom, safe, mdp.raw_pre_star(n, s, t));
                if (pa_is_empty(safe)) break;
            }
            next = pa_union(dom, next, safe);
        }
        if (pa_equal(dom, next, n)) break;
        n = std::move(next);
    }
    if (pa_is_empty(n)) throw std::invalid_argument("model is blocking everywhere: no state survives pruning");
    std::vector<PseudoAntichain<SubsetDomain>> enabled;
    for (int s = 0; s < mdp.num_sigma(); ++s) {
        PseudoAntichain<SubsetDomain> safe = pa_full(dom);
        for (int t : support[size_t(s)])
            safe = pa_intersect(dom, safe, mdp.raw_pre_star(n, s, t));
        enabled.push_back(std::move(safe));
    }
    mdp.set_enabled_override(std::move(enabled));
    return n;
}

Mss gen_monkey(int sticks, int pieces) {
    if (sticks < 1 || pieces < 1 || sticks > 6 || pieces > 6)
        throw std::invalid_argument("gen_monkey: parameters must lie in [1,6]");
    Mss m;
    auto add_cond = [&](const std::string& name) {
        m.conds.push_back(name);
        return bit(m.conds.size() - 1);
    };
    uint64_t box = add_cond("box");
    uint64_t stone = add_cond("stone");
    uint64_t stick = add_cond("stick");
    uint64_t bananas = add_cond("bananas");
    std::vector<uint64_t> set_mask(size_t(sticks), 0);
    for (int j = 1; j <= sticks; ++j)
        for (int i = 1; i <= pieces; ++i)
            set_mask[size_t(j - 1)] |= add_cond("piece" + std::to_string(j) + "_" + std::to_string(i));
    uint64_t useless = 0;
    for (int i = 1; i <= pieces; ++i) useless |= add_cond("upiece" + std::to_string(i));

    m.init = 0;
    m.goal = bananas;

    auto det = [&](const std::string& name, uint64_t guard, uint64_t add, Rat cost) {
        m.ops.push_back(Mss::Op{name, guard, {{Rat(1), Mss::Effect{add, 0}}}, cost});
    };
    auto coin = [&](const std::string& name, uint64_t guard, uint64_t add, Rat p, Rat cost) {
        m.ops.push_back(
            Mss::Op{name, guard, {{p, Mss::Effect{add, 0}}, {1 - p, Mss::Effect{0, 0}}}, cost});
    };

    det("takebox", 0, box, Rat(5));
    det("takestone", 0, stone, Rat(1));
    for (int j = 1; j <= sticks; ++j)
        for (int i = 1; i <= pieces; ++i)
            det("takepiece" + std::to_string(j) + "_" + std::to_string(i), 0,
                bit(size_t(4 + (j - 1) * pieces + (i - 1))), Rat(1));
    for (int i = 1; i <= pieces; ++i)
        det("takeupiece" + std::to_string(i), 0, bit(size_t(4 + sticks * pieces + (i - 1))), Rat(1));
    // Assembly from the first set is the cheapest; extra sets never improve
    // the optimal value, which therefore only depends on the piece count.
    for (int j = 1; j <= sticks; ++j)
        coin("assemble" + std::to_string(j), set_mask[size_t(j - 1)], stick, rat(1, 2),
             Rat(2 + (j - 1) % 5));
    m.ops.push_back(Mss::Op{"assembleuseless", useless,
                            {{Rat(0), Mss::Effect{stick, 0}}, {Rat(1), Mss::Effect{0, 0}}}, Rat(2)});
    coin("takebananaswithbox", box, bananas, rat(1, 4), Rat(2));
    coin("takebananaswithstick", stick, bananas, rat(1, 5), Rat(2));
    coin("takebananaswithboth", box | stick, bananas, rat(1, 2), Rat(2));
    m.validate();
    return m;
}

Mss gen_moats(int castles, int depths) {
    if (castles < 1 || depths < 1 || depths > 7 || castles * (depths + 1) > 63)
        throw std::invalid_argument("gen_moats: parameter caps exceeded");
    Mss m;
    auto add_cond = [&](const std::string& name) {
        m.conds.push_back(name);
        return bit(m.conds.size() - 1);
    };
    std::vector<std::vector<uint64_t>> depth{size_t(castles)};
    std::vector<uint64_t> castle(size_t(castles), 0);
    for (int i = 1; i <= castles; ++i) {
        for (int k = 1; k <= depths; ++k)
            depth[size_t(i - 1)].push_back(add_cond("moat" + std::to_string(i) + "_" + std::to_string(k)));
        castle[size_t(i - 1)] = add_cond("castle" + std::to_string(i));
        m.goal |= castle[size_t(i - 1)];
    }
    m.init = 0;
    for (int i = 1; i <= castles; ++i) {
        for (int k = 1; k <= depths; ++k) {
            uint64_t guard = (k == 1) ? 0 : depth[size_t(i - 1)][size_t(k - 2)];
            m.ops.push_back(Mss::Op{"dig" + std::to_string(i) + "_" + std::to_string(k), guard,
                                    {{Rat(1), Mss::Effect{depth[size_t(i - 1)][size_t(k - 1)], 0}}},
                                    Rat(1)});
        }
        for (int k = 0; k <= depths; ++k) {
            uint64_t guard = (k == 0) ? 0 : depth[size_t(i - 1)][size_t(k - 1)];
            Rat p = rat(2 * k + 3, 4 * (k + 1));
            m.ops.push_back(Mss::Op{"build" + std::to_string(i) + "_" + std::to_string(k), guard,
                                    {{p, Mss::Effect{castle[size_t(i - 1)], 0}},
                                     {1 - p, Mss::Effect{0, 0}}},
                                    Rat(2)});
        }
    }
    m.validate();
    return m;
}

}  // namespace pamdp
