#include "ionqec/matching.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace ionqec::matching {

namespace {

// O(n^3) maximum-weight perfect matching with blossoms (primal-dual).
// Classic dense formulation; vertices are 1-based internally, ids above n
// denote contracted blossoms.
struct Blossom {
    struct Edge {
        int u = 0, v = 0;
        int64_t w = 0;
    };

    int n = 0, n_x = 0;
    std::vector<std::vector<Edge>> g;
    std::vector<int64_t> lab;
    std::vector<int> match, slack, st, pa, S, vis;
    std::vector<std::vector<int>> flower, flower_from;
    std::deque<int> q;

    explicit Blossom(int n_) : n(n_) {
        const int m = 2 * n + 1;
        g.assign(m, std::vector<Edge>(m));
        lab.assign(m, 0);
        match.assign(m, 0);
        slack.assign(m, 0);
        st.assign(m, 0);
        pa.assign(m, 0);
        S.assign(m, 0);
        vis.assign(m, 0);
        flower.assign(m, {});
        flower_from.assign(m, std::vector<int>(n + 1, 0));
        for (int u = 1; u <= n; ++u)
            for (int v = 1; v <= n; ++v) g[u][v] = Edge{u, v, 0};
    }

    void add_edge(int u, int v, int64_t w) { g[u][v].w = g[v][u].w = w; }

    int64_t e_delta(const Edge& e) const { return lab[e.u] + lab[e.v] - g[e.u][e.v].w * 2; }

    void update_slack(int u, int x) {
        if (!slack[x] || e_delta(g[u][x]) < e_delta(g[slack[x]][x])) slack[x] = u;
    }

    void set_slack(int x) {
        slack[x] = 0;
        for (int u = 1; u <= n; ++u)
            if (g[u][x].w > 0 && st[u] != x && S[st[u]] == 0) update_slack(u, x);
    }

    void q_push(int x) {
        if (x <= n) {
            q.push_back(x);
        } else {
            for (int p : flower[x]) q_push(p);
        }
    }

    void set_st(int x, int b) {
        st[x] = b;
        if (x > n)
            for (int p : flower[x]) set_st(p, b);
    }

    int get_pr(int b, int xr) {
        int pr = static_cast<int>(std::find(flower[b].begin(), flower[b].end(), xr) -
                                  flower[b].begin());
        if (pr % 2 == 1) {
            std::reverse(flower[b].begin() + 1, flower[b].end());
            return static_cast<int>(flower[b].size()) - pr;
        }
        return pr;
    }

    void set_match(int u, int v) {
        match[u] = g[u][v].v;
        if (u <= n) return;
        const Edge& e = g[u][v];
        const int xr = flower_from[u][e.u];
        const int pr = get_pr(u, xr);
        for (int i = 0; i < pr; ++i) set_match(flower[u][i], flower[u][i ^ 1]);
        set_match(xr, v);
        std::rotate(flower[u].begin(), flower[u].begin() + pr, flower[u].end());
    }

    void augment(int u, int v) {
        for (;;) {
            int xnv = st[match[u]];
            set_match(u, v);
            if (!xnv) return;
            set_match(xnv, st[pa[xnv]]);
            u = st[pa[xnv]];
            v = xnv;
        }
    }

    int get_lca(int u, int v) {
        static int t = 0;
        for (++t; u || v; std::swap(u, v)) {
            if (!u) continue;
            if (vis[u] == t) return u;
            vis[u] = t;
            u = st[match[u]];
            if (u) u = st[pa[u]];
        }
        return 0;
    }

    void add_blossom(int u, int lca, int v) {
        int b = n + 1;
        while (b <= n_x && st[b]) ++b;
        if (b > n_x) ++n_x;
        lab[b] = 0;
        S[b] = 0;
        match[b] = match[lca];
        flower[b].clear();
        flower[b].push_back(lca);
        for (int x = u, y; x != lca; x = st[pa[y]]) {
            flower[b].push_back(x);
            y = st[match[x]];
            flower[b].push_back(y);
            q_push(y);
        }
        std::reverse(flower[b].begin() + 1, flower[b].end());
        for (int x = v, y; x != lca; x = st[pa[y]]) {
            flower[b].push_back(x);
            y = st[match[x]];
            flower[b].push_back(y);
            q_push(y);
        }
        set_st(b, b);
        for (int x = 1; x <= n_x; ++x) g[b][x].w = g[x][b].w = 0;
        for (int x = 1; x <= n; ++x) flower_from[b][x] = 0;
        for (int xs : flower[b]) {
            for (int x = 1; x <= n_x; ++x)
                if (g[b][x].w == 0 || e_delta(g[xs][x]) < e_delta(g[b][x])) {
                    g[b][x] = g[xs][x];
                    g[x][b] = g[x][xs];
                }
            for (int x = 1; x <= n; ++x)
                if (flower_from[xs][x]) flower_from[b][x] = xs;
        }
        set_slack(b);
    }

    void expand_blossom(int b) {
        for (int xs : flower[b]) set_st(xs, xs);
        const int xr = flower_from[b][g[b][pa[b]].u];
        const int pr = get_pr(b, xr);
        for (int i = 0; i < pr; i += 2) {
            int xs = flower[b][i], xns = flower[b][i + 1];
            pa[xs] = g[xns][xs].u;
            S[xs] = 1;
            S[xns] = 0;
            slack[xs] = 0;
            set_slack(xns);
            q_push(xns);
        }
        S[xr] = 1;
        pa[xr] = pa[b];
        for (size_t i = pr + 1; i < flower[b].size(); ++i) {
            int xs = flower[b][i];
            S[xs] = -1;
            set_slack(xs);
        }
        st[b] = 0;
    }

    bool on_found_edge(const Edge& e) {
        const int u = st[e.u], v = st[e.v];
        if (S[v] == -1) {
            pa[v] = e.u;
            S[v] = 1;
            const int nu = st[match[v]];
            slack[v] = slack[nu] = 0;
            S[nu] = 0;
            q_push(nu);
        } else if (S[v] == 0) {
            const int lca = get_lca(u, v);
            if (!lca) {
                augment(u, v);
                augment(v, u);
                return true;
            }
            add_blossom(u, lca, v);
        }
        return false;
    }

    bool matching() {
        std::fill(S.begin(), S.end(), -1);
        std::fill(slack.begin(), slack.end(), 0);
        q.clear();
        for (int x = 1; x <= n_x; ++x)
            if (st[x] == x && !match[x]) {
                pa[x] = 0;
                S[x] = 0;
                q_push(x);
            }
        if (q.empty()) return false;
        for (;;) {
            while (!q.empty()) {
                const int u = q.front();
                q.pop_front();
                if (S[st[u]] == 1) continue;
                for (int v = 1; v <= n; ++v) {
                    if (g[u][v].w > 0 && st[u] != st[v]) {
                        if (e_delta(g[u][v]) == 0) {
                            if (on_found_edge(g[u][v])) return true;
                        } else {
                            update_slack(u, st[v]);
                        }
                    }
                }
            }
            int64_t d = std::numeric_limits<int64_t>::max();
            for (int b = n + 1; b <= n_x; ++b)
                if (st[b] == b && S[b] == 1) d = std::min(d, lab[b] / 2);
            for (int x = 1; x <= n_x; ++x)
                if (st[x] == x && slack[x]) {
                    if (S[x] == -1)
                        d = std::min(d, e_delta(g[slack[x]][x]));
                    else if (S[x] == 0)
                        d = std::min(d, e_delta(g[slack[x]][x]) / 2);
                }
            for (int u = 1; u <= n; ++u) {
                if (S[st[u]] == 0) {
                    if (lab[u] <= d) return false;
                    lab[u] -= d;
                } else if (S[st[u]] == 1) {
                    lab[u] += d;
                }
            }
            for (int b = n + 1; b <= n_x; ++b)
                if (st[b] == b) {
                    if (S[b] == 0)
                        lab[b] += d * 2;
                    else if (S[b] == 1)
                        lab[b] -= d * 2;
                }
            q.clear();
            for (int x = 1; x <= n_x; ++x)
                if (st[x] == x && slack[x] && st[slack[x]] != x && e_delta(g[slack[x]][x]) == 0)
                    if (on_found_edge(g[slack[x]][x])) return true;
            for (int b = n + 1; b <= n_x; ++b)
                if (st[b] == b && S[b] == 1 && lab[b] == 0) expand_blossom(b);
        }
        return false;
    }

    // returns mate array (1-based), all vertices matched
    std::vector<int> solve() {
        n_x = n;
        int64_t w_max = 0;
        for (int u = 1; u <= n; ++u) {
            st[u] = u;
            flower[u].clear();
            flower_from[u][u] = u;
            for (int v = 1; v <= n; ++v) w_max = std::max(w_max, g[u][v].w);
        }
        for (int u = 1; u <= n; ++u) lab[u] = w_max;
        int n_matches = 0;
        while (matching()) ++n_matches;
        if (n_matches * 2 != n) throw std::runtime_error("blossom: no perfect matching found");
        std::vector<int> mate(n + 1, 0);
        for (int u = 1; u <= n; ++u) mate[u] = match[u];
        return mate;
    }
};

}  // namespace

std::vector<int> max_weight_perfect_matching_int(const std::vector<int64_t>& w, int n) {
    if (n % 2) throw std::invalid_argument("matching: odd node count");
    Blossom b(n);
    for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v)
            if (u != v) b.add_edge(u + 1, v + 1, w[static_cast<size_t>(u) * n + v]);
    auto mate1 = b.solve();
    std::vector<int> mate(n);
    for (int u = 0; u < n; ++u) mate[u] = mate1[u + 1] - 1;
    return mate;
}

std::vector<int> min_weight_matching_dp(const std::vector<double>& w, int n) {
    if (n % 2) throw std::invalid_argument("matching: odd node count");
    if (n > 20) throw std::invalid_argument("matching dp: too many nodes");
    if (n == 0) return {};
    const size_t full = 1ull << n;
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dp(full, inf);
    std::vector<int> choice(full, -1);
    dp[0] = 0.0;
    for (size_t mask = 0; mask + 1 < full; ++mask) {
        if (dp[mask] == inf) continue;
        int i = 0;
        while (mask >> i & 1) ++i;
        for (int j = i + 1; j < n; ++j) {
            if (mask >> j & 1) continue;
            const size_t nm = mask | (1ull << i) | (1ull << j);
            const double c = dp[mask] + w[static_cast<size_t>(i) * n + j];
            if (c < dp[nm]) {
                dp[nm] = c;
                choice[nm] = j;
            }
        }
    }
    std::vector<int> mate(n, -1);
    size_t mask = full - 1;
    while (mask) {
        int i = 0;
        while (!(mask >> i & 1)) ++i;
        const int j = choice[mask];
        mate[i] = j;
        mate[j] = i;
        mask &= ~((1ull << i) | (1ull << static_cast<unsigned>(j)));
    }
    return mate;
}

std::vector<int> min_weight_perfect_matching(const std::vector<double>& w, int n) {
    if (n == 0) return {};
    if (n <= 12) return min_weight_matching_dp(w, n);
    // scale to integers for the blossom; ties beyond ~1e-9 relative are broken
    // arbitrarily, which Monte Carlo sweeps tolerate
    double w_max = 0.0;
    for (double x : w) w_max = std::max(w_max, std::abs(x));
    const double scale = w_max > 0.0 ? (1ll << 30) / w_max : 1.0;
    std::vector<int64_t> wi(w.size());
    int64_t top = 0;
    for (size_t i = 0; i < w.size(); ++i) {
        wi[i] = static_cast<int64_t>(std::llround(w[i] * scale));
        top = std::max(top, wi[i]);
    }
    // maximize (top + 1 - w): perfect matchings all have n/2 edges
    std::vector<int64_t> wmaxed(w.size());
    for (size_t i = 0; i < w.size(); ++i) wmaxed[i] = top + 1 - wi[i];
    return max_weight_perfect_matching_int(wmaxed, n);
}

}  // namespace ionqec::matching
