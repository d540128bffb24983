// Unit tests: spanning-tree construction on paired diagrams (free edges,
// coefficient tables, basis and time-ordering properties, degree structure),
// amplitude evaluation in time-simplex and resolvent form, and the lattice
// near-resonance counts.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "lab/duhamel.hpp"
#include "lab/errors.hpp"
#include "lab/grid.hpp"
#include "lab/random_data.hpp"
#include "lab/rng.hpp"
#include "lab/simplex.hpp"
#include "lab/spanning.hpp"

using namespace lab;
using cd = std::complex<double>;

namespace {

double factorial(int n) {
    double f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

} // namespace

TEST_CASE("spanning tree: exhaustive structural properties for n <= 3") {
    Rng rng(2026);
    long long checked = 0, violations = 0;
    std::string first;
    auto fail = [&](const std::string& what) {
        ++violations;
        if (first.empty()) first = what;
    };

    for (int n = 1; n <= 3; ++n) {
        const auto histories = enumerate_histories(n);
        for (const auto& hl : histories) {
            const auto left = build_diagram(n, hl, +1);
            for (const auto& hr : histories) {
                const auto right = build_diagram(n, hr, -1);
                auto pairings = enumerate_pairings(left, right);
                for (auto& pd : pairings) {
                    const auto degs = detect_degeneracies(pd);
                    const auto tree = build_spanning_tree(pd);
                    ++checked;
                    const int n_edges = pd.system.nvars;

                    // 2n+1 free interaction edges; the left top edge is last
                    if (static_cast<int>(tree.free_edges.size()) != 2 * n + 1)
                        fail("free edge count");
                    if (tree.free_edges.back() != pd.left.top_wave()) fail("left top edge not free");

                    // coefficients in {-1,0,1}; unit rows on the free edges
                    for (std::size_t i = 0; i < tree.free_edges.size(); ++i)
                        for (int e = 0; e < n_edges; ++e) {
                            const int c = tree.coeffs[i][e];
                            if (c < -1 || c > 1) fail("coefficient out of range");
                            if (tree.is_free(e) && c != (e == tree.free_edges[i] ? 1 : 0))
                                fail("free edge row not a unit row");
                        }

                    // basis property: a random integer assignment of the free
                    // frequencies satisfies every constraint exactly
                    std::vector<long long> kf(tree.free_edges.size());
                    for (auto& v : kf) v = static_cast<long long>(rng.next_u64() % 19) - 9;
                    std::vector<long long> k(n_edges, 0);
                    for (std::size_t i = 0; i < kf.size(); ++i) {
                        if (kf[i] == 0) continue;
                        for (int e = 0; e < n_edges; ++e) k[e] += tree.coeffs[i][e] * kf[i];
                    }
                    for (const auto& row : pd.system.constraints) {
                        long long s = 0;
                        for (int e = 0; e < n_edges; ++e) s += row[e] * k[e];
                        if (s != 0) fail("Kirchhoff constraint violated");
                    }

                    // time ordering: an integrated edge only involves free
                    // frequencies at or after it in the natural order
                    for (std::size_t i = 0; i < tree.free_edges.size(); ++i) {
                        const int rf = tree.edge_rank[tree.free_edges[i]];
                        for (int e = 0; e < n_edges; ++e)
                            if (tree.coeffs[i][e] != 0 && tree.edge_rank[e] > rf)
                                fail("time ordering violated");
                    }

                    // degree structure
                    const auto prof = classify_degrees(pd, tree);
                    if (prof.n0 + prof.n1 + prof.n2 != 2 * n) fail("degree count sum");
                    if (prof.n1 + 2 * prof.n2 != 2 * n) fail("free-below-vertex sum");
                    // first right-graph vertex: degree 0 or 1, degree 1 forces
                    // a degeneracy there
                    const int v1r = n; // global index of the first right vertex
                    if (prof.per_vertex[v1r] > 1) fail("first right vertex degree > 1");
                    if (prof.per_vertex[v1r] == 1) {
                        bool hit = false;
                        for (const auto& dg : degs) hit = hit || dg.vertex == v1r;
                        if (!hit) fail("degree-1 first right vertex without degeneracy");
                    }

                    // per-vertex coefficient structure of the children
                    for (int gv = 0; gv < 2 * n; ++gv) {
                        const auto& ch = pd.system.vertex_child[gv];
                        std::vector<int> freec, intc;
                        for (int c : ch) (tree.is_free(c) ? freec : intc).push_back(c);
                        auto free_index = [&](int e) {
                            return std::find(tree.free_edges.begin(), tree.free_edges.end(), e) -
                                   tree.free_edges.begin();
                        };
                        if (freec.size() == 1) {
                            // degree 1: k_e = -k_f + G, k_e' independent of k_f
                            const auto& row = tree.coeffs[free_index(freec[0])];
                            std::array<int, 2> got{row[intc[0]], row[intc[1]]};
                            std::sort(got.begin(), got.end());
                            if (got != std::array<int, 2>{-1, 0})
                                fail("degree-1 coefficient structure");
                        } else if (freec.size() == 2) {
                            // degree 2: k_e = -k_f - k_f' + G
                            for (int f : freec)
                                if (tree.coeffs[free_index(f)][intc[0]] != -1)
                                    fail("degree-2 coefficient structure");
                        }
                    }
                }
            }
        }
    }
    INFO("first violation: " << first);
    CHECK(violations == 0);
    CHECK(checked == 6 + 9 * 120 + 225 * 5040);
}

TEST_CASE("time simplex of a flat phase is the volume t^n/n!") {
    const double t = 0.37;
    for (int n = 1; n <= 4; ++n) {
        std::vector<double> omega(n, 0.0);
        const cd got = time_simplex_integral(t, omega);
        CHECK(std::abs(got - std::pow(t, n) / factorial(n)) < 1e-12);
    }
}

TEST_CASE("resolvent layer integral: identities against the closed form") {
    // m = 1: the contour form reproduces a single phase
    {
        const double t = 0.7, e1 = 3.2;
        const cd got = resolvent_layer_integral(t, {e1}, 1.0 / t);
        const cd want = std::exp(cd(0.0, -t * e1));
        CHECK(std::abs(got - want) < 1e-8);
    }
    // m = 3, random nodes: matches i^{m-1} x divided difference of e^{-izt}
    Rng rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        const double t = 0.3 + 0.7 * rng.next_uniform();
        std::vector<double> e(3);
        for (auto& x : e) x = -10.0 + 20.0 * rng.next_uniform();
        const cd want = cd(0.0, 1.0) * cd(0.0, 1.0) * exp_divided_difference(t, e);
        const cd got = resolvent_layer_integral(t, e, 1.0 / t);
        INFO("t = " << t << " e = (" << e[0] << ", " << e[1] << ", " << e[2] << ")");
        CHECK(std::abs(got - want) <= 1e-6 * std::max(1e-3, std::abs(want)));
    }
    // confluent nodes are fine (the time side handles them by construction)
    {
        const double t = 0.9;
        const cd want = cd(0.0, 1.0) * exp_divided_difference(t, {2.0, 2.0});
        CHECK(std::abs(resolvent_layer_integral(t, {2.0, 2.0}, 1.0 / t) - want) < 1e-7);
    }
    CHECK_THROWS_AS(resolvent_layer_integral(-1.0, {0.0}, 1.0), std::domain_error);
    CHECK_THROWS_AS(resolvent_layer_integral(1.0, {0.0}, 0.0), std::domain_error);
    CHECK_THROWS_AS(resolvent_layer_integral(1.0, {}, 1.0), std::domain_error);
}

TEST_CASE("amplitude scaling: lambda doubling multiplies F by 2^{4n}") {
    const auto prof = plateau(0.7, 1.2);
    const double t = 0.45;

    auto ratio_check = [&](int n, double tol) {
        const auto left = build_diagram(n, enumerate_histories(n)[0], +1);
        const auto right = build_diagram(n, enumerate_histories(n).back(), -1);
        auto pairings = enumerate_pairings(left, right);
        const auto& pd = pairings[1];
        const auto tree = build_spanning_tree(pd);
        const auto p1 = make_params_lambda(2, 1.0, 0.9);
        const auto p2 = make_params_lambda(2, 1.0, 1.8);
        const cd f1 = eval_amplitude_time(pd, tree, t, p1, prof);
        const cd f2 = eval_amplitude_time(pd, tree, t, p2, prof);
        INFO("n = " << n << " F1 = " << f1 << " F2 = " << f2);
        const double scale = std::pow(2.0, 4 * n);
        CHECK(std::abs(f2 - scale * f1) <= tol * scale * std::abs(f1));
    };
    ratio_check(1, 1e-12);
    ratio_check(2, 1e-12);
}

TEST_CASE("amplitude sum at n=1 matches the Monte Carlo second moment") {
    const auto params = make_params_lambda(2, 0.5, 0.7);
    const auto prof = default_bump();
    const double t = 0.3;

    // diagram side: single history pair, six pairings
    const auto left = build_diagram(1, {1}, +1);
    const auto right = build_diagram(1, {1}, -1);
    cd total(0.0, 0.0);
    for (auto& pd : enumerate_pairings(left, right)) {
        const auto tree = build_spanning_tree(pd);
        total += eval_amplitude_time(pd, tree, t, params, prof);
    }
    CHECK(std::abs(total.imag()) < 1e-10 * std::abs(total));
    CHECK(total.real() > 0.0);

    // Monte Carlo side
    const auto grid = make_grid(2, 25, params.eps, prof.support_radius);
    const auto mc = iterate_moment_L2(params, grid, prof, 1, t, 300, 2.5e-3, 4242, 2);
    INFO("diagram sum = " << total.real() << " MC = " << mc.first << " +- " << mc.second);
    CHECK(std::abs(total.real() - mc.first) <= 3.0 * mc.second + 3e-3 * mc.first);
}

TEST_CASE("time-simplex and resolvent amplitudes agree at n=1") {
    const auto params = make_params_lambda(2, 1.0, 1.3);
    const auto prof = plateau(0.8, 1.52);
    const double t = 0.6;
    const auto left = build_diagram(1, {1}, +1);
    const auto right = build_diagram(1, {1}, -1);
    for (auto& pd : enumerate_pairings(left, right)) {
        const auto tree = build_spanning_tree(pd);
        const cd ft = eval_amplitude_time(pd, tree, t, params, prof);
        const cd fr = eval_amplitude_resolvent(pd, tree, t, params, prof);
        INFO("F_time = " << ft << " F_res = " << fr);
        CHECK(std::abs(ft - fr) <= 1e-6 * std::max(std::abs(ft), 1e-10));
    }
}

TEST_CASE("second moment grows like t^{2n} for small t") {
    const auto params = make_params_lambda(2, 1.0, 1.0);
    const auto prof = plateau(0.8, 1.52);
    auto moment = [&](double t) {
        cd s(0.0, 0.0);
        const auto left = build_diagram(1, {1}, +1);
        const auto right = build_diagram(1, {1}, -1);
        for (auto& pd : enumerate_pairings(left, right)) {
            const auto tree = build_spanning_tree(pd);
            s += eval_amplitude_time(pd, tree, t, params, prof);
        }
        return s.real();
    };
    const double s1 = moment(0.01), s2 = moment(0.02);
    const double slope = std::log(s2 / s1) / std::log(2.0);
    INFO("S(0.01) = " << s1 << " S(0.02) = " << s2 << " slope = " << slope);
    CHECK(slope > 1.9);
    CHECK(slope < 2.1);
}

TEST_CASE("lattice resonance counts: vacuous bound, symmetry, guards") {
    const int d = 2;
    const double eps = 1.0 / 8.0;
    // points with |k| < 8
    long long lattice = 0;
    for (int a = -8; a <= 8; ++a)
        for (int b = -8; b <= 8; ++b)
            if (a * a + b * b < 64) ++lattice;

    const std::vector<int> k0{3, -2};
    // beta large enough to swallow every |Q - alpha|
    const double huge = 10.0 / (eps * eps);
    CHECK(lattice_resonance_count(d, eps, k0, 0.0, huge, 1) == lattice);
    CHECK(lattice_resonance_count(d, eps, k0, 0.0, 10.0 * huge, 2) == lattice * lattice);

    // k0 -> -k0 symmetry (k -> -k bijection of the ball)
    const std::vector<int> mk0{-3, 2};
    for (double alpha : {0.0, 5.0, -7.0}) {
        CHECK(lattice_resonance_count(d, eps, k0, alpha, 2.0, 1) ==
              lattice_resonance_count(d, eps, mk0, alpha, 2.0, 1));
        CHECK(lattice_resonance_count(d, eps, k0, alpha, 2.0, 2, -1, +1) ==
              lattice_resonance_count(d, eps, mk0, alpha, 2.0, 2, -1, +1));
    }

    // counts grow with beta and with the lattice
    const long long c1 = lattice_resonance_count(d, eps, k0, 1.0, 1.0, 1);
    const long long c2 = lattice_resonance_count(d, eps, k0, 1.0, 3.0, 1);
    CHECK(c1 <= c2);
    CHECK(lattice_resonance_count(d, 1.0 / 16.0, k0, 1.0, 1.0, 1) > c1);

    CHECK_THROWS_AS(lattice_resonance_count(d, eps, k0, 0.0, 0.5, 1), std::domain_error);
    CHECK_THROWS_AS(lattice_resonance_count(d, eps, k0, 0.0, 1.0, 2, +1, +1), std::domain_error);
    CHECK_THROWS_AS(lattice_resonance_count(d, eps, std::vector<int>{9, 9}, 0.0, 1.0, 1),
                    std::domain_error);
    CHECK_THROWS_AS(lattice_resonance_count(d, 1e-5, std::vector<int>{0, 0}, 0.0, 1.0, 1),
                    resource_error);
}
