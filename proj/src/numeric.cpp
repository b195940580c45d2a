#include "pamdp/numeric.hpp"

#include <algorithm>
#include <map>

namespace pamdp {

void QuotientMc::validate() const {
    if (cost.size() != rows.size() || goal.size() != rows.size())
        throw std::invalid_argument("quotient: field length mismatch");
    for (size_t i = 0; i < rows.size(); ++i) {
        Rat sum = 0;
        for (const auto& [j, p] : rows[i]) {
            if (j >= rows.size()) throw std::invalid_argument("quotient: transition out of range");
            if (p < 0) throw std::invalid_argument("quotient: negative probability");
            sum += p;
        }
        if (sum != 1) throw std::invalid_argument("quotient: row does not sum to 1");
    }
}

std::optional<std::vector<std::vector<Rat>>> gauss_solve(std::vector<std::vector<Rat>> a,
                                                         std::vector<std::vector<Rat>> b) {
    size_t n = a.size();
    if (n == 0) return std::vector<std::vector<Rat>>{};
    size_t k = b[0].size();
    for (size_t col = 0; col < n; ++col) {
        size_t pivot = n;
        size_t best = 0;
        for (size_t r = col; r < n; ++r) {
            if (a[r][col] == 0) continue;
            size_t sz = rat_size(a[r][col]);
            if (pivot == n || sz < best) {
                pivot = r;
                best = sz;
            }
        }
        if (pivot == n) return std::nullopt;
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (size_t r = col + 1; r < n; ++r) {
            if (a[r][col] == 0) continue;
            Rat f = a[r][col] / a[col][col];
            a[r][col] = 0;
            for (size_t c = col + 1; c < n; ++c)
                if (a[col][c] != 0) a[r][c] -= f * a[col][c];
            for (size_t c = 0; c < k; ++c)
                if (b[col][c] != 0) b[r][c] -= f * b[col][c];
        }
    }
    std::vector<std::vector<Rat>> x(n, std::vector<Rat>(k, Rat(0)));
    for (size_t ri = n; ri-- > 0;) {
        for (size_t c = 0; c < k; ++c) {
            Rat acc = b[ri][c];
            for (size_t j = ri + 1; j < n; ++j)
                if (a[ri][j] != 0) acc -= a[ri][j] * x[j][c];
            x[ri][c] = acc / a[ri][ri];
        }
    }
    return x;
}

std::vector<Rat> solve_ssp(const QuotientMc& q) {
    size_t n = q.size();
    std::vector<size_t> idx(n, n);
    std::vector<size_t> nong;
    for (size_t i = 0; i < n; ++i) {
        if (!q.goal[i]) {
            idx[i] = nong.size();
            nong.push_back(i);
        }
    }
    size_t m = nong.size();
    std::vector<std::vector<Rat>> a(m, std::vector<Rat>(m, Rat(0)));
    std::vector<std::vector<Rat>> b(m, std::vector<Rat>(1, Rat(0)));
    for (size_t r = 0; r < m; ++r) {
        size_t i = nong[r];
        a[r][r] = 1;
        for (const auto& [j, p] : q.rows[i])
            if (!q.goal[j]) a[r][idx[j]] -= p;
        b[r][0] = q.cost[i];
    }
    auto sol = gauss_solve(std::move(a), std::move(b));
    if (!sol) throw NonProperError("non-proper block present: strategy does not reach the goal a.s.");
    std::vector<Rat> v(n, Rat(0));
    for (size_t r = 0; r < m; ++r) v[nong[r]] = (*sol)[r][0];
    return v;
}

namespace {

/// Iterative Tarjan; returns component id per node, ids in reverse
/// topological order of discovery.
std::pair<std::vector<size_t>, size_t> scc_decompose(const QuotientMc& q) {
    size_t n = q.size();
    const size_t none = size_t(-1);
    std::vector<size_t> comp(n, none), low(n), disc(n, none), stk;
    std::vector<bool> on_stack(n, false);
    size_t timer = 0, ncomp = 0;
    struct Frame {
        size_t v;
        size_t edge;
    };
    for (size_t root = 0; root < n; ++root) {
        if (disc[root] != none) continue;
        std::vector<Frame> call{{root, 0}};
        disc[root] = low[root] = timer++;
        stk.push_back(root);
        on_stack[root] = true;
        while (!call.empty()) {
            auto& [v, edge] = call.back();
            if (edge < q.rows[v].size()) {
                size_t w = q.rows[v][edge].first;
                bool pos = q.rows[v][edge].second > 0;
                ++edge;
                if (!pos) continue;
                if (disc[w] == none) {
                    disc[w] = low[w] = timer++;
                    stk.push_back(w);
                    on_stack[w] = true;
                    call.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], disc[w]);
                }
            } else {
                if (low[v] == disc[v]) {
                    while (true) {
                        size_t w = stk.back();
                        stk.pop_back();
                        on_stack[w] = false;
                        comp[w] = ncomp;
                        if (w == v) break;
                    }
                    ++ncomp;
                }
                size_t child = v;
                call.pop_back();
                if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[child]);
            }
        }
    }
    return {comp, ncomp};
}

}  // namespace

GainBias solve_gain_bias(const QuotientMc& q) {
    size_t n = q.size();
    GainBias gb;
    if (n == 0) return gb;
    auto [comp, ncomp] = scc_decompose(q);

    // A component is recurrent iff no positive edge leaves it.
    std::vector<bool> recurrent(ncomp, true);
    for (size_t i = 0; i < n; ++i)
        for (const auto& [j, p] : q.rows[i])
            if (p > 0 && comp[j] != comp[i]) recurrent[comp[i]] = false;

    std::vector<std::vector<size_t>> members(ncomp);
    for (size_t i = 0; i < n; ++i) members[comp[i]].push_back(i);

    // Recurrent classes ordered by smallest member index for determinism.
    std::vector<size_t> classes;
    for (size_t c = 0; c < ncomp; ++c)
        if (recurrent[c]) classes.push_back(c);
    std::sort(classes.begin(), classes.end(),
              [&](size_t a, size_t b) { return members[a][0] < members[b][0]; });
    size_t nc = classes.size();

    // Stationary distribution and gain per recurrent class:
    // pi P = pi with sum(pi) = 1 (last balance equation replaced).
    std::vector<Rat> class_gain(nc, Rat(0));
    std::vector<size_t> class_of(n, nc);  // nc = transient
    for (size_t k = 0; k < nc; ++k) {
        const auto& r = members[classes[k]];
        size_t m = r.size();
        std::map<size_t, size_t> pos;
        for (size_t i = 0; i < m; ++i) {
            pos[r[i]] = i;
            class_of[r[i]] = k;
        }
        std::vector<std::vector<Rat>> a(m, std::vector<Rat>(m, Rat(0)));
        std::vector<std::vector<Rat>> b(m, std::vector<Rat>(1, Rat(0)));
        for (size_t i = 0; i < m; ++i) {
            if (i + 1 < m) a[i][i] = -1;
            for (const auto& [j, p] : q.rows[r[i]]) {
                if (p == 0) continue;
                size_t jj = pos.at(j);
                if (jj + 1 < m) a[jj][i] += p;
            }
        }
        for (size_t i = 0; i < m; ++i) a[m - 1][i] = 1;
        b[m - 1][0] = 1;
        auto sol = gauss_solve(std::move(a), std::move(b));
        if (!sol) throw std::logic_error("stationary system singular on an irreducible class");
        std::vector<std::pair<size_t, Rat>> pi;
        for (size_t i = 0; i < m; ++i) {
            pi.emplace_back(r[i], (*sol)[i][0]);
            class_gain[k] += (*sol)[i][0] * q.cost[r[i]];
        }
        gb.stationary.push_back(std::move(pi));
    }

    // Absorption probabilities of transient states into each class.
    std::vector<size_t> trans;
    std::vector<size_t> tidx(n, n);
    for (size_t i = 0; i < n; ++i) {
        if (class_of[i] == nc) {
            tidx[i] = trans.size();
            trans.push_back(i);
        }
    }
    size_t nt = trans.size();
    std::vector<std::vector<Rat>> absorb(nt, std::vector<Rat>(nc, Rat(0)));
    if (nt > 0) {
        std::vector<std::vector<Rat>> a(nt, std::vector<Rat>(nt, Rat(0)));
        std::vector<std::vector<Rat>> b(nt, std::vector<Rat>(nc, Rat(0)));
        for (size_t ti = 0; ti < nt; ++ti) {
            size_t i = trans[ti];
            a[ti][ti] = 1;
            for (const auto& [j, p] : q.rows[i]) {
                if (p == 0) continue;
                if (class_of[j] == nc)
                    a[ti][tidx[j]] -= p;
                else
                    b[ti][class_of[j]] += p;
            }
        }
        auto sol = gauss_solve(std::move(a), std::move(b));
        if (!sol) throw std::logic_error("absorption system singular");
        absorb = std::move(*sol);
    }

    gb.gain.assign(n, Rat(0));
    for (size_t i = 0; i < n; ++i) {
        if (class_of[i] != nc) {
            gb.gain[i] = class_gain[class_of[i]];
        } else {
            for (size_t k = 0; k < nc; ++k) gb.gain[i] += absorb[tidx[i]][k] * class_gain[k];
        }
    }

    // Bias: (I-P) b = C - g with one reference per recurrent class pinned to
    // 0, then renormalized by subtracting P* b (harmonic, so the bias
    // equation is preserved and P* b becomes exactly 0).
    std::vector<size_t> pin(nc);
    for (size_t k = 0; k < nc; ++k) pin[k] = members[classes[k]][0];
    std::vector<bool> pinned(n, false);
    for (size_t k = 0; k < nc; ++k) pinned[pin[k]] = true;
    std::vector<std::vector<Rat>> a(n, std::vector<Rat>(n, Rat(0)));
    std::vector<std::vector<Rat>> b(n, std::vector<Rat>(1, Rat(0)));
    for (size_t i = 0; i < n; ++i) {
        if (pinned[i]) {
            a[i][i] = 1;
            continue;
        }
        a[i][i] += 1;
        for (const auto& [j, p] : q.rows[i]) a[i][j] -= p;
        b[i][0] = q.cost[i] - gb.gain[i];
    }
    auto sol = gauss_solve(std::move(a), std::move(b));
    if (!sol) throw std::logic_error("bias system singular");
    std::vector<Rat> b0(n);
    for (size_t i = 0; i < n; ++i) b0[i] = (*sol)[i][0];

    std::vector<Rat> class_corr(nc, Rat(0));
    for (size_t k = 0; k < nc; ++k)
        for (const auto& [i, p] : gb.stationary[k]) class_corr[k] += p * b0[i];
    gb.bias.assign(n, Rat(0));
    for (size_t i = 0; i < n; ++i) {
        Rat h = 0;
        if (class_of[i] != nc) {
            h = class_corr[class_of[i]];
        } else {
            for (size_t k = 0; k < nc; ++k) h += absorb[tidx[i]][k] * class_corr[k];
        }
        gb.bias[i] = b0[i] - h;
    }
    return gb;
}

bool check_ssp_residual(const QuotientMc& q, const std::vector<Rat>& v) {
    for (size_t i = 0; i < q.size(); ++i) {
        if (q.goal[i]) {
            if (v[i] != 0) return false;
            continue;
        }
        Rat acc = q.cost[i] - v[i];
        for (const auto& [j, p] : q.rows[i])
            if (!q.goal[j]) acc += p * v[j];
        if (acc != 0) return false;
    }
    return true;
}

bool check_gain_bias_residual(const QuotientMc& q, const GainBias& gb) {
    for (size_t i = 0; i < q.size(); ++i) {
        Rat rg = -gb.gain[i];
        Rat rb = q.cost[i] - gb.gain[i] - gb.bias[i];
        for (const auto& [j, p] : q.rows[i]) {
            rg += p * gb.gain[j];
            rb += p * gb.bias[j];
        }
        if (rg != 0 || rb != 0) return false;
    }
    for (const auto& pi : gb.stationary) {
        Rat dot = 0;
        for (const auto& [i, p] : pi) dot += p * gb.bias[i];
        if (dot != 0) return false;
    }
    return true;
}

}  // namespace pamdp
