#include "lab/diagrams.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "lab/errors.hpp"
#include "lab/simplex.hpp"

namespace lab {

std::vector<std::vector<int>> enumerate_histories(int n, int cap) {
    if (n < 1) throw std::domain_error("diagram order must be >= 1");
    if (n > cap)
        throw resource_error("diagram order " + std::to_string(n) + " exceeds the enumeration cap " +
                             std::to_string(cap));
    std::vector<std::vector<int>> out;
    std::vector<int> h(n, 1);
    auto width = [&](int i) { return 2 * (n - 1 - i) + 1; }; // choices for h[i] (0-based)
    for (;;) {
        out.push_back(h);
        int i = n - 1;
        while (i >= 0 && h[i] == width(i)) h[i--] = 1;
        if (i < 0) break;
        ++h[i];
    }
    return out;
}

InteractionDiagram build_diagram(int n, const std::vector<int>& history, int top_parity) {
    if (n < 1) throw std::domain_error("diagram order must be >= 1");
    if (static_cast<int>(history.size()) != n)
        throw std::domain_error("history length does not match the order");
    if (top_parity != 1 && top_parity != -1) throw std::domain_error("top parity must be +-1");

    InteractionDiagram g;
    g.n = n;
    g.history = history;
    g.top_parity = top_parity;
    g.slot.resize(n + 1);
    g.slot[0].resize(2 * n + 1);
    std::iota(g.slot[0].begin(), g.slot[0].end(), 0);
    g.parity.assign(3 * n + 1, 0);
    g.vertex.resize(n);

    for (int i = 1; i <= n; ++i) {
        const std::vector<int>& prev = g.slot[i - 1];
        const int width = static_cast<int>(prev.size()); // 1 + 2(n-i+1)
        const int l = history[i - 1];
        if (l < 1 || l > width - 2)
            throw std::domain_error("history entry " + std::to_string(l) + " out of range 1.." +
                                    std::to_string(width - 2));
        InteractionDiagram::Vertex v;
        v.child = {prev[l - 1], prev[l], prev[l + 1]};
        v.out = 2 * n + i;
        g.vertex[i - 1] = v;
        std::vector<int>& cur = g.slot[i];
        cur.reserve(width - 2);
        for (int j = 0; j < l - 1; ++j) cur.push_back(prev[j]);
        cur.push_back(v.out);
        for (int j = l + 2; j < width; ++j) cur.push_back(prev[j]);
    }

    // parities, top-down: children of each vertex are (-1, output parity, +1)
    g.parity[g.top_wave()] = top_parity;
    for (int i = n; i >= 1; --i) {
        const auto& v = g.vertex[i - 1];
        g.parity[v.child[0]] = -1;
        g.parity[v.child[1]] = g.parity[v.out];
        g.parity[v.child[2]] = +1;
    }

    // initial waves below each vertex
    std::vector<std::vector<int>> below(3 * n + 1);
    for (int w = 0; w <= 2 * n; ++w) below[w] = {w};
    g.in_set.resize(n);
    for (int i = 1; i <= n; ++i) {
        const auto& v = g.vertex[i - 1];
        std::vector<int> u;
        for (int c : v.child) u.insert(u.end(), below[c].begin(), below[c].end());
        std::sort(u.begin(), u.end());
        below[v.out] = u;
        g.in_set[i - 1] = u;
    }
    return g;
}

namespace {

// initial waves below a wave id (global ids after adding `offset`)
std::vector<int> wave_in_set(const InteractionDiagram& g, int wave, int offset) {
    std::vector<int> out;
    if (wave <= 2 * g.n) {
        out = {wave + offset};
    } else {
        for (int w : g.in_set[wave - 2 * g.n - 1]) out.push_back(w + offset);
    }
    return out;
}

void append_vertices(const InteractionDiagram& g, int offset, KirchhoffSystem& sys) {
    for (const auto& v : g.vertex) {
        std::vector<int> c(sys.nvars, 0);
        c[v.out + offset] = 1;
        for (int ch : v.child) c[ch + offset] -= 1;
        sys.constraints.push_back(std::move(c));
        sys.vertex_out.push_back(v.out + offset);
        sys.vertex_child.push_back({v.child[0] + offset, v.child[1] + offset, v.child[2] + offset});
        const int sigma = g.parity[v.out];
        sys.vertex_parity.push_back(sigma);
        // suppressed diagonals: {left, right} and {middle, left or right by parity}
        std::array<int, 2> p1 = {v.child[0] + offset, v.child[2] + offset};
        std::array<int, 2> p2 = {v.child[1] + offset,
                                 (sigma == 1 ? v.child[0] : v.child[2]) + offset};
        sys.suppressed.push_back({p1, p2});
    }
}

void append_pair_constraint(KirchhoffSystem& sys, int a, int b) {
    std::vector<int> c(sys.nvars, 0);
    c[a] += 1;
    c[b] += 1;
    sys.constraints.push_back(std::move(c));
}

} // namespace

std::vector<PairedDiagram> enumerate_pairings(const InteractionDiagram& left,
                                              const InteractionDiagram& right) {
    if (left.top_parity != 1 || right.top_parity != -1)
        throw std::domain_error("pairing expects top parities +1 (left) and -1 (right)");
    if (left.n != right.n) throw std::domain_error("pairing expects equal orders");
    const int n = left.n;
    const int off = left.wave_count();

    std::vector<int> plus, minus; // global initial ids by parity
    for (int w = 0; w <= 2 * n; ++w) {
        (left.parity[w] == 1 ? plus : minus).push_back(w);
        (right.parity[w] == 1 ? plus : minus).push_back(w + off);
    }

    std::vector<PairedDiagram> out;
    std::vector<int> perm(minus.size());
    std::iota(perm.begin(), perm.end(), 0);
    do {
        PairedDiagram pd;
        pd.left = left;
        pd.right = right;
        pd.partner.assign(2 * off, -1);
        for (std::size_t i = 0; i < plus.size(); ++i) {
            int a = plus[i], b = minus[perm[i]];
            pd.pairs.push_back({std::min(a, b), std::max(a, b)});
            pd.partner[a] = b;
            pd.partner[b] = a;
        }
        KirchhoffSystem& sys = pd.system;
        sys.nvars = 2 * off;
        append_vertices(left, 0, sys);
        append_vertices(right, off, sys);
        for (const auto& pr : pd.pairs) append_pair_constraint(sys, pr[0], pr[1]);
        append_pair_constraint(sys, left.top_wave(), right.top_wave() + off);
        out.push_back(std::move(pd));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
}

std::vector<Degeneracy> detect_degeneracies(PairedDiagram& paired) {
    const int n = paired.n();
    const int off = paired.right_offset();
    std::vector<Degeneracy> out;
    for (int gv = 0; gv < 2 * n; ++gv) {
        const InteractionDiagram& g = (gv < n) ? paired.left : paired.right;
        const int offset = (gv < n) ? 0 : off;
        const auto& v = g.vertex[gv % n];
        static const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
        for (const auto& pr : pairs) {
            int wa = v.child[pr[0]], wb = v.child[pr[1]];
            if (g.parity[wa] * g.parity[wb] != -1) continue;
            std::vector<int> u = wave_in_set(g, wa, offset);
            std::vector<int> ub = wave_in_set(g, wb, offset);
            u.insert(u.end(), ub.begin(), ub.end());
            std::sort(u.begin(), u.end());
            bool internal = true;
            for (int w : u)
                if (!std::binary_search(u.begin(), u.end(), paired.partner[w])) {
                    internal = false;
                    break;
                }
            if (!internal) continue;
            Degeneracy dg;
            dg.vertex = gv;
            dg.offsets = {pr[0], pr[1]};
            dg.waves = {wa + offset, wb + offset};
            out.push_back(dg);
            append_pair_constraint(paired.system, dg.waves[0], dg.waves[1]);
        }
    }
    return out;
}

long long resonance_modulus(const InteractionDiagram& g,
                            const std::vector<std::vector<int>>& freq, int vertex_index) {
    if (vertex_index < 1 || vertex_index > g.n)
        throw std::domain_error("vertex index out of range");
    const auto& v = g.vertex[vertex_index - 1];
    auto norm2 = [&](int w) {
        if (w >= static_cast<int>(freq.size()) || freq[w].empty())
            throw std::domain_error("unassigned frequency at wave " + std::to_string(w));
        long long s = 0;
        for (int x : freq[w]) s += static_cast<long long>(x) * x;
        return s;
    };
    const long long l = norm2(v.child[0]), m = norm2(v.child[1]), r = norm2(v.child[2]);
    const long long o = norm2(v.out);
    return r - l + static_cast<long long>(g.parity[v.out]) * (m - o);
}

FourierField tree_iterate(const PhysicalParams& params, const FourierField& u0, int n,
                          double t, int band) {
    const TorusGrid& g = u0.grid;
    const int d = g.d;
    FourierField out(g);
    int kk[8];
    if (n == 0) {
        for (std::size_t i = 0; i < u0.c.size(); ++i) {
            g.decode(i, kk);
            double k2 = 0;
            for (int a = 0; a < d; ++a) k2 += double(kk[a]) * kk[a];
            out.c[i] = u0.c[i] * cd(std::cos(t * k2), -std::sin(t * k2));
        }
        return out;
    }
    if ((2 * n + 1) * band > g.K)
        throw std::domain_error("tree frequencies can leave the grid band");

    const int nw = 2 * n + 1;
    const int W = 2 * band + 1;
    const double pref_mod = params.lambda * params.lambda * std::pow(2.0 * M_PI, -d);

    for (const auto& h : enumerate_histories(n)) {
        InteractionDiagram G = build_diagram(n, h, +1);
        int sign = 1;
        for (const auto& v : G.vertex) sign *= G.parity[v.out];
        // (-i)^n lambda^{2n} (2pi)^{-dn} times the product of output parities
        cd pref(1.0, 0.0);
        for (int i = 0; i < n; ++i) pref *= cd(0.0, -1.0) * pref_mod;
        pref *= static_cast<double>(sign);

        std::vector<int> f(nw * d, -band); // initial frequencies, odometer
        std::vector<std::array<int, 8>> kw(G.wave_count());
        std::vector<double> omega(n);
        for (;;) {
            // initial factors prod uhat0^{sigma}(k): stop early on zeros
            cd init(1.0, 0.0);
            bool zero = false;
            for (int w = 0; w < nw && !zero; ++w) {
                for (int a = 0; a < d; ++a) kw[w][a] = f[w * d + a];
                cd val;
                if (G.parity[w] == 1) {
                    val = u0.at(kw[w].data());
                } else {
                    int mk[8];
                    for (int a = 0; a < d; ++a) mk[a] = -kw[w][a];
                    val = std::conj(u0.at(mk));
                }
                if (val == cd(0.0, 0.0)) zero = true;
                init *= val;
            }
            if (!zero) {
                // Kirchhoff outputs and exact truncation factors
                int trunc = 1;
                for (int i = 0; i < n && trunc != 0; ++i) {
                    const auto& v = G.vertex[i];
                    for (int a = 0; a < d; ++a)
                        kw[v.out][a] = kw[v.child[0]][a] + kw[v.child[1]][a] + kw[v.child[2]][a];
                    auto cancels = [&](int wa, int wb) {
                        for (int a = 0; a < d; ++a)
                            if (kw[wa][a] + kw[wb][a] != 0) return false;
                        return true;
                    };
                    int factor = 1;
                    if (cancels(v.child[0], v.child[2])) factor -= 1;
                    int other = (G.parity[v.out] == 1) ? v.child[0] : v.child[2];
                    if (cancels(v.child[1], other)) factor -= 1;
                    trunc *= factor;
                }
                if (trunc != 0) {
                    std::vector<std::vector<int>> fr(G.wave_count());
                    for (int w = 0; w < G.wave_count(); ++w)
                        fr[w].assign(kw[w].begin(), kw[w].begin() + d);
                    for (int i = 1; i <= n; ++i)
                        omega[i - 1] = static_cast<double>(resonance_modulus(G, fr, i));
                    cd simplex = time_simplex_integral(t, omega);
                    const int top = G.top_wave();
                    double k2 = 0;
                    for (int a = 0; a < d; ++a) k2 += double(kw[top][a]) * kw[top][a];
                    cd phase(std::cos(t * k2), -std::sin(t * k2));
                    out.at(kw[top].data()) +=
                        pref * phase * static_cast<double>(trunc) * init * simplex;
                }
            }
            // advance odometer
            int i = nw * d - 1;
            while (i >= 0 && f[i] == band) f[i--] = -band;
            if (i < 0) break;
            ++f[i];
        }
    }
    return out;
}

} // namespace lab
