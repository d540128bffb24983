#include "lab/spanning.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>

#include "lab/errors.hpp"
#include "lab/simplex.hpp"

namespace lab {

namespace {

using cd = std::complex<double>;

// graph layout shared by construction and evaluation
struct DiagramGraph {
    int n = 0;
    int off = 0;        // right-tree wave id offset (3n+1)
    int n_edges = 0;    // interaction edges (6n+2)
    int n_vertices = 0; // 2n interaction + 4n+2 initial + root
    int root = 0;
    std::vector<int> lo, hi; // endpoints of interaction edge e, oriented lo -> hi
    std::vector<int> rank;   // natural time-order rank per interaction edge

    int init_vertex(int w) const { // w: global initial wave id
        const int local = (w < off) ? w : w - off;
        const int base = (w < off) ? 0 : 2 * n + 1;
        return 2 * n + base + local;
    }
};

DiagramGraph layout(const PairedDiagram& paired) {
    DiagramGraph g;
    g.n = paired.n();
    g.off = paired.right_offset();
    g.n_edges = 2 * g.off;
    g.root = 2 * g.n + (4 * g.n + 2);
    g.n_vertices = g.root + 1;
    g.lo.assign(g.n_edges, -1);
    g.hi.assign(g.n_edges, g.root); // top waves end at the root
    g.rank.assign(g.n_edges, 2 * g.n);

    for (int gv = 0; gv < 2 * g.n; ++gv) {
        for (int c : paired.system.vertex_child[gv]) {
            g.hi[c] = gv;
            g.rank[c] = (gv < g.n) ? g.n + gv : gv - g.n; // right graph first
        }
    }
    for (int e = 0; e < g.n_edges; ++e) {
        const int local = (e < g.off) ? e : e - g.off;
        if (local <= 2 * g.n) {
            g.lo[e] = g.init_vertex(e);
        } else {
            const int i = local - 2 * g.n; // output of vertex v_i of its tree
            g.lo[e] = (e < g.off) ? i - 1 : g.n + i - 1;
        }
    }
    return g;
}

struct Dsu {
    std::vector<int> p;
    explicit Dsu(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
    int find(int x) {
        while (p[x] != x) x = p[x] = p[p[x]];
        return x;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        p[a] = b;
        return true;
    }
};

} // namespace

SpanningTree build_spanning_tree(const PairedDiagram& paired) {
    const DiagramGraph g = layout(paired);
    const int n = g.n;

    SpanningTree tree;
    tree.n = n;
    tree.edge_rank = g.rank;
    tree.free_mask.assign(g.n_edges, 0);

    Dsu dsu(g.n_vertices);
    std::vector<std::vector<std::array<int, 2>>> adj(g.n_vertices); // (neighbor, edge id)
    int tree_edges = 0;
    // pairing edges get ids past the interaction edges (internal only)
    auto add = [&](int a, int b, int edge_id) {
        if (!dsu.unite(a, b)) return false;
        adj[a].push_back({b, edge_id});
        adj[b].push_back({a, edge_id});
        ++tree_edges;
        return true;
    };

    for (std::size_t p = 0; p < paired.pairs.size(); ++p) {
        const int a = g.init_vertex(paired.pairs[p][0]);
        const int b = g.init_vertex(paired.pairs[p][1]);
        if (!add(a, b, g.n_edges + static_cast<int>(p)))
            throw std::logic_error("pairing edges closed a loop");
    }

    // natural vertex order: right graph v'_1..v'_n, then left v_1..v_n
    std::vector<int> visit;
    for (int i = 0; i < n; ++i) visit.push_back(n + i);
    for (int i = 0; i < n; ++i) visit.push_back(i);
    for (int gv : visit) {
        const auto& ch = paired.system.vertex_child[gv];
        for (int idx : {2, 1, 0}) { // right, middle, left
            const int e = ch[idx];
            const bool added = add(g.lo[e], g.hi[e], e);
            if (idx == 2 && !added)
                throw std::logic_error("right child edge closed a loop");
            if (!added) {
                tree.free_edges.push_back(e);
                tree.free_mask[e] = 1;
            }
        }
    }
    const int right_top = paired.right.top_wave() + g.off;
    if (!add(g.lo[right_top], g.hi[right_top], right_top))
        throw std::logic_error("right top edge closed a loop");
    const int left_top = paired.left.top_wave();
    if (add(g.lo[left_top], g.hi[left_top], left_top))
        throw std::logic_error("left top edge failed to close the final loop");
    tree.free_edges.push_back(left_top);
    tree.free_mask[left_top] = 1;

    if (static_cast<int>(tree.free_edges.size()) != 2 * n + 1)
        throw std::logic_error("free interaction edge count is not 2n+1");
    if (tree_edges != g.n_vertices - 1)
        throw std::logic_error("spanning tree is incomplete");
    for (int e = 0; e < g.n_edges; ++e)
        if (!tree.free_mask[e]) tree.integrated_edges.push_back(e);

    // root the tree and read off fundamental-cycle coefficients
    std::vector<int> parent(g.n_vertices, -1), parent_edge(g.n_vertices, -1),
        depth(g.n_vertices, 0);
    std::vector<int> bfs{g.root};
    parent[g.root] = g.root;
    for (std::size_t q = 0; q < bfs.size(); ++q) {
        const int v = bfs[q];
        for (const auto& nb : adj[v])
            if (parent[nb[0]] < 0) {
                parent[nb[0]] = v;
                parent_edge[nb[0]] = nb[1];
                depth[nb[0]] = depth[v] + 1;
                bfs.push_back(nb[0]);
            }
    }

    tree.coeffs.assign(tree.free_edges.size(), std::vector<int>(g.n_edges, 0));
    for (std::size_t i = 0; i < tree.free_edges.size(); ++i) {
        const int f = tree.free_edges[i];
        auto& row = tree.coeffs[i];
        row[f] = 1;
        // cycle: chord lo(f) -> hi(f), then the tree path hi(f) -> lo(f);
        // a tree edge counts +1 when traversed along its own orientation
        int a = g.hi[f], b = g.lo[f]; // a descends toward the root first
        auto step_from_hi = [&](int node) { // travel node -> parent
            const int e = parent_edge[node];
            if (e < g.n_edges) row[e] += (g.lo[e] == node) ? 1 : -1;
        };
        auto step_from_lo = [&](int node) { // travel parent -> node
            const int e = parent_edge[node];
            if (e < g.n_edges) row[e] += (g.lo[e] == parent[node]) ? 1 : -1;
        };
        while (depth[a] > depth[b]) {
            step_from_hi(a);
            a = parent[a];
        }
        while (depth[b] > depth[a]) {
            step_from_lo(b);
            b = parent[b];
        }
        while (a != b) {
            step_from_hi(a);
            a = parent[a];
            step_from_lo(b);
            b = parent[b];
        }
    }
    return tree;
}

DegreeProfile classify_degrees(const PairedDiagram& paired, const SpanningTree& tree) {
    DegreeProfile prof;
    const int n = paired.n();
    prof.per_vertex.resize(2 * n, 0);
    for (int gv = 0; gv < 2 * n; ++gv) {
        const auto& ch = paired.system.vertex_child[gv];
        if (tree.is_free(ch[2]))
            throw std::logic_error("right child edge marked free");
        int deg = 0;
        for (int c : ch) deg += tree.is_free(c) ? 1 : 0;
        if (deg > 2) throw std::logic_error("vertex of degree 3");
        prof.per_vertex[gv] = deg;
        (deg == 0 ? prof.n0 : deg == 1 ? prof.n1 : prof.n2) += 1;
    }
    return prof;
}

namespace {

cd eval_amplitude(const PairedDiagram& paired, const SpanningTree& tree, double t,
                  const PhysicalParams& params, const DataProfile& profile, int freq_cap,
                  bool use_resolvent, double eta) {
    const int d = params.d;
    const int n = paired.n();
    const int off = paired.right_offset();
    const int n_edges = 2 * off;
    if (static_cast<int>(tree.free_edges.size()) != 2 * n + 1)
        throw std::logic_error("spanning tree does not match the paired diagram");
    if (t <= 0.0) throw std::domain_error("amplitude time must be positive");
    if (use_resolvent && eta <= 0.0) eta = 1.0 / t;

    const int cap =
        freq_cap > 0 ? freq_cap
                     : static_cast<int>(std::ceil(profile.support_radius / params.eps));

    // candidate frequencies: nonzero spectrum weight inside |k|_inf <= cap
    struct Cand {
        std::array<int, 8> k{};
        double w = 0.0;
    };
    std::vector<Cand> cands;
    {
        std::vector<int> k(d, -cap);
        for (;;) {
            double x[8];
            for (int a = 0; a < d; ++a) x[a] = params.eps * k[a];
            const double v = profile(x, d);
            if (v != 0.0) {
                Cand c;
                for (int a = 0; a < d; ++a) c.k[a] = k[a];
                c.w = v * v;
                cands.push_back(c);
            }
            int i = d - 1;
            while (i >= 0 && k[i] == cap) k[i--] = -cap;
            if (i < 0) break;
            ++k[i];
        }
    }
    const int npair = 2 * n + 1;
    if (std::pow(static_cast<double>(cands.size()), npair) > 2e8)
        throw resource_error("free-frequency enumeration too large: " +
                             std::to_string(cands.size()) + " candidates per pair at order " +
                             std::to_string(n));
    if (cands.empty()) return 0.0;

    // pair representatives: the +1-parity member (its partner carries -k)
    auto parity = [&](int w) {
        return w < off ? paired.left.parity[w] : paired.right.parity[w - off];
    };
    std::vector<int> rep(npair), other(npair);
    for (int p = 0; p < npair; ++p) {
        const auto& pr = paired.pairs[p];
        rep[p] = (parity(pr[0]) == 1) ? pr[0] : pr[1];
        other[p] = (rep[p] == pr[0]) ? pr[1] : pr[0];
    }

    const auto& sys = paired.system;
    const int ltop = paired.left.top_wave();
    const int rtop = paired.right.top_wave() + off;

    std::vector<std::array<int, 8>> kw(n_edges);
    std::vector<long long> nsq(n_edges);
    std::vector<double> omega(n);
    std::vector<long long> key(n);
    std::map<std::vector<long long>, cd> memo; // phase integral per resonance vector
    auto phase_integral = [&](double time) {
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;
        cd val;
        if (use_resolvent) {
            std::vector<double> nodes(n + 1, 0.0);
            for (int j = n - 1; j >= 0; --j) nodes[j] = nodes[j + 1] + omega[j];
            val = resolvent_layer_integral(time, nodes, eta);
        } else {
            val = time_simplex_integral(time, omega);
        }
        memo.emplace(key, val);
        return val;
    };

    cd total(0.0, 0.0);
    std::vector<std::size_t> idx(npair, 0);
    for (;;) {
        double weight = 1.0;
        for (int p = 0; p < npair; ++p) {
            const Cand& c = cands[idx[p]];
            weight *= c.w;
            for (int a = 0; a < d; ++a) {
                kw[rep[p]][a] = c.k[a];
                kw[other[p]][a] = -c.k[a];
            }
        }
        for (int p = 0; p < npair; ++p) {
            long long s = 0;
            for (int a = 0; a < d; ++a) s += static_cast<long long>(kw[rep[p]][a]) * kw[rep[p]][a];
            nsq[rep[p]] = nsq[other[p]] = s;
        }
        int trunc = 1;
        for (int gv = 0; gv < 2 * n && trunc != 0; ++gv) {
            const auto& ch = sys.vertex_child[gv];
            const int out = sys.vertex_out[gv];
            long long s = 0;
            for (int a = 0; a < d; ++a) {
                kw[out][a] = kw[ch[0]][a] + kw[ch[1]][a] + kw[ch[2]][a];
                s += static_cast<long long>(kw[out][a]) * kw[out][a];
            }
            nsq[out] = s;
            int factor = 1;
            for (const auto& sup : sys.suppressed[gv]) {
                bool zero = true;
                for (int a = 0; a < d; ++a)
                    if (kw[sup[0]][a] + kw[sup[1]][a] != 0) {
                        zero = false;
                        break;
                    }
                if (zero) factor -= 1;
            }
            trunc *= factor;
        }
        if (trunc != 0) {
            for (int a = 0; a < d; ++a)
                if (kw[ltop][a] + kw[rtop][a] != 0)
                    throw std::logic_error("root constraint violated by pair coordinates");
            cd part(static_cast<double>(trunc) * weight, 0.0);
            for (int side = 0; side < 2; ++side) {
                for (int i = 0; i < n; ++i) {
                    const int gv = side * n + i;
                    const auto& ch = sys.vertex_child[gv];
                    const long long w = nsq[ch[2]] - nsq[ch[0]] +
                                        sys.vertex_parity[gv] *
                                            (nsq[ch[1]] - nsq[sys.vertex_out[gv]]);
                    omega[i] = static_cast<double>(w);
                    key[i] = w;
                }
                part *= phase_integral(t);
            }
            total += part;
        }
        int p = npair - 1;
        while (p >= 0 && idx[p] + 1 == cands.size()) idx[p--] = 0;
        if (p < 0) break;
        ++idx[p];
    }

    // (-1)^{#minus vertices} lambda^{4n} eps^{d(2n+1)} (2pi)^{-2dn}
    double sign = (n % 2 == 0) ? 1.0 : -1.0;
    for (int gv = 0; gv < 2 * n; ++gv) sign *= sys.vertex_parity[gv];
    const double scale = sign * std::pow(params.lambda, 4 * n) *
                         std::pow(params.eps, d * npair) * std::pow(2.0 * M_PI, -2.0 * d * n);
    return scale * total;
}

} // namespace

cd eval_amplitude_time(const PairedDiagram& paired, const SpanningTree& tree, double t,
                       const PhysicalParams& params, const DataProfile& profile, int freq_cap) {
    return eval_amplitude(paired, tree, t, params, profile, freq_cap, false, 0.0);
}

cd eval_amplitude_resolvent(const PairedDiagram& paired, const SpanningTree& tree, double t,
                            const PhysicalParams& params, const DataProfile& profile,
                            int freq_cap, double eta) {
    return eval_amplitude(paired, tree, t, params, profile, freq_cap, true, eta);
}

long long lattice_resonance_count(int d, double eps, const std::vector<int>& k0, double alpha,
                                  double beta, int degree, int sigma, int sigma_prime) {
    if (d < 1 || d > 8) throw std::domain_error("dimension out of range");
    if (eps <= 0.0 || eps > 1.0) throw std::domain_error("eps must be in (0,1]");
    if (beta < 1.0) throw std::domain_error("beta must be >= 1");
    if (static_cast<int>(k0.size()) != d) throw std::domain_error("k0 dimension mismatch");
    if (degree != 1 && degree != 2) throw std::domain_error("degree must be 1 or 2");
    if (std::abs(sigma) != 1 || std::abs(sigma_prime) != 1)
        throw std::domain_error("signs must be +-1");
    if (degree == 2 && sigma == 1 && sigma_prime == 1)
        throw std::domain_error("signs (+1,+1) excluded for degree two");
    const double r2 = 1.0 / (eps * eps);
    {
        long long k0sq = 0;
        for (int x : k0) k0sq += static_cast<long long>(x) * x;
        if (static_cast<double>(k0sq) > r2 + 1e-9)
            throw std::domain_error("|k0| exceeds 1/eps");
    }

    const int B = static_cast<int>(std::ceil(1.0 / eps));
    double box = 1.0;
    for (int a = 0; a < d; ++a) box *= 2.0 * B + 1;
    if ((degree == 1 ? box : box * box) > 4e9)
        throw resource_error("resonance lattice too large at eps = " + std::to_string(eps));

    // points with |k| < 1/eps (strict), flat-packed coordinates
    std::vector<int> pts;
    std::vector<long long> pts_sq;
    {
        std::vector<int> k(d, -B);
        for (;;) {
            long long s = 0;
            for (int a = 0; a < d; ++a) s += static_cast<long long>(k[a]) * k[a];
            if (static_cast<double>(s) < r2 - 1e-9) {
                pts.insert(pts.end(), k.begin(), k.end());
                pts_sq.push_back(s);
            }
            int i = d - 1;
            while (i >= 0 && k[i] == B) k[i--] = -B;
            if (i < 0) break;
            ++k[i];
        }
    }
    const std::size_t np = pts_sq.size();

    long long count = 0;
    if (degree == 1) {
        for (std::size_t i = 0; i < np; ++i) {
            long long rest = 0;
            for (int a = 0; a < d; ++a) {
                const long long v = k0[a] - pts[i * d + a];
                rest += v * v;
            }
            const double q = static_cast<double>(pts_sq[i]) + sigma * static_cast<double>(rest);
            if (std::abs(q - alpha) <= beta) ++count;
        }
    } else {
        std::vector<int> s0(d);
        for (std::size_t i = 0; i < np; ++i) {
            for (int a = 0; a < d; ++a) s0[a] = k0[a] - pts[i * d + a];
            for (std::size_t j = 0; j < np; ++j) {
                long long rest = 0;
                for (int a = 0; a < d; ++a) {
                    const long long v = s0[a] - pts[j * d + a];
                    rest += v * v;
                }
                const double q = static_cast<double>(pts_sq[i]) +
                                 sigma_prime * static_cast<double>(pts_sq[j]) +
                                 sigma * static_cast<double>(rest);
                if (std::abs(q - alpha) <= beta) ++count;
            }
        }
    }
    return count;
}

} // namespace lab
