// Unit tests: truncation operator, Duhamel iterates, Wick phase, error term,
// iterate moments.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "lab/duhamel.hpp"
#include "lab/nls.hpp"
#include "lab/random_data.hpp"
#include "lab/rng.hpp"

using namespace lab;

namespace {

FourierField random_band_field(const TorusGrid& g, std::uint64_t seed, double amp, int band) {
    Rng rng(seed);
    FourierField f(g);
    int k[8];
    for (std::size_t i = 0; i < f.c.size(); ++i) {
        g.decode(i, k);
        bool in = true;
        for (int a = 0; a < g.d; ++a)
            if (std::abs(k[a]) > band) in = false;
        if (in) f.c[i] = amp * rng.next_complex_gaussian();
    }
    return f;
}

double field_max_diff(const FourierField& a, const FourierField& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.c.size(); ++i) m = std::max(m, std::abs(a.c[i] - b.c[i]));
    return m;
}

double field_norm(const FourierField& a) { return std::sqrt(a.l2_norm_sq()); }

FourierField single_mode(const TorusGrid& g, int kx, int ky, cd v) {
    FourierField f(g);
    int k[2] = {kx, ky};
    f.at(k) = v;
    return f;
}

// Direct evaluation of the first-order Duhamel integral as an explicit triple
// sum with the per-triple phase integral int_0^t e^{is Omega} ds.
FourierField first_iterate_closed_form(const PhysicalParams& p, const FourierField& u0,
                                       int band, double t) {
    const TorusGrid& g = u0.grid;
    FourierField out(g);
    const double pref = p.lambda * p.lambda * std::pow(2.0 * M_PI, -g.d);
    int k[2], k1[2], k2[2], k3[2], mk2[2];
    for (std::size_t i = 0; i < out.c.size(); ++i) {
        g.decode(i, k);
        cd sum(0.0, 0.0);
        for (k1[0] = -band; k1[0] <= band; ++k1[0])
            for (k1[1] = -band; k1[1] <= band; ++k1[1])
                for (k3[0] = -band; k3[0] <= band; ++k3[0])
                    for (k3[1] = -band; k3[1] <= band; ++k3[1]) {
                        k2[0] = k[0] - k1[0] - k3[0];
                        k2[1] = k[1] - k1[1] - k3[1];
                        if (std::abs(k2[0]) > band || std::abs(k2[1]) > band) continue;
                        int tr = 1;
                        if (k1[0] + k2[0] == 0 && k1[1] + k2[1] == 0) tr -= 1;
                        if (k2[0] + k3[0] == 0 && k2[1] + k3[1] == 0) tr -= 1;
                        if (tr == 0) continue;
                        mk2[0] = -k2[0];
                        mk2[1] = -k2[1];
                        double om = double(k[0]) * k[0] + double(k[1]) * k[1]
                                  - double(k1[0]) * k1[0] - double(k1[1]) * k1[1]
                                  + double(k2[0]) * k2[0] + double(k2[1]) * k2[1]
                                  - double(k3[0]) * k3[0] - double(k3[1]) * k3[1];
                        cd it; // int_0^t e^{is om} ds
                        if (om == 0.0) it = t;
                        else it = (cd(std::cos(t * om), std::sin(t * om)) - 1.0) / cd(0.0, om);
                        sum += double(tr) * it * u0.at(k1) * std::conj(u0.at(mk2)) * u0.at(k3);
                    }
        double k2abs = double(k[0]) * k[0] + double(k[1]) * k[1];
        out.c[i] = cd(0.0, -pref) * cd(std::cos(t * k2abs), -std::sin(t * k2abs)) * sum;
    }
    return out;
}

} // namespace

TEST_CASE("truncated_product: single-mode cases and grid mismatch") {
    auto grid = make_grid(2, 17, 0.5, 1.0);
    const double pref = std::pow(2.0 * M_PI, -2);
    cd va(0.7, 0.2), vb(-0.3, 1.1), vc(0.5, -0.4);

    // generic modes: one summand survives with weight (2pi)^{-d}
    auto p = truncated_product(single_mode(grid, 1, 2, va), single_mode(grid, 0, 1, vb),
                               single_mode(grid, 2, -1, vc));
    int kout[2] = {3, 2};
    CHECK(std::abs(p.at(kout) - pref * va * vb * vc) < 1e-14);
    p.at(kout) = 0.0;
    CHECK(field_norm(p) < 1e-14);

    // k1 + k2 = 0: truncation factor vanishes
    auto z1 = truncated_product(single_mode(grid, 1, 2, va), single_mode(grid, -1, -2, vb),
                                single_mode(grid, 2, -1, vc));
    CHECK(field_norm(z1) < 1e-14);
    // k2 + k3 = 0 likewise
    auto z2 = truncated_product(single_mode(grid, 1, 2, va), single_mode(grid, -2, 1, vb),
                                single_mode(grid, 2, -1, vc));
    CHECK(field_norm(z2) < 1e-14);

    auto other = make_grid(2, 21, 0.5, 1.0);
    CHECK_THROWS_AS(truncated_product(FourierField(grid), FourierField(other), FourierField(grid)),
                    std::domain_error);
}

TEST_CASE("truncated_product is trilinear to machine precision") {
    auto grid = make_grid(2, 17, 0.5, 1.0);
    auto a = random_band_field(grid, 1, 0.5, 4);
    auto a2 = random_band_field(grid, 2, 0.5, 4);
    auto b = random_band_field(grid, 3, 0.5, 4);
    auto c = random_band_field(grid, 4, 0.5, 4);
    const cd alpha(0.3, -1.2);

    auto scaled = a;
    for (auto& z : scaled.c) z *= alpha;
    auto lhs = truncated_product(scaled, b, c);
    auto rhs = truncated_product(a, b, c);
    for (auto& z : rhs.c) z *= alpha;
    CHECK(field_max_diff(lhs, rhs) < 1e-13);

    auto summed = a;
    for (std::size_t i = 0; i < summed.c.size(); ++i) summed.c[i] += a2.c[i];
    auto both = truncated_product(summed, b, c);
    auto p1 = truncated_product(a, b, c);
    auto p2 = truncated_product(a2, b, c);
    for (std::size_t i = 0; i < p1.c.size(); ++i) p1.c[i] += p2.c[i];
    CHECK(field_max_diff(both, p1) < 1e-13);

    // middle and last slot by symmetry of the implementation path
    auto mid = truncated_product(b, scaled, c);
    auto mid_ref = truncated_product(b, a, c);
    for (auto& z : mid_ref.c) z *= alpha;
    CHECK(field_max_diff(mid, mid_ref) < 1e-13);
}

TEST_CASE("product decomposition: abc = P(a,b,c) + diagonal corrections") {
    // band-4 fields on K=12: the cubic product (band 12) is fully resolved,
    // so the identity can be checked pointwise in physical space
    auto grid = make_grid(2, 25, 0.5, 1.0, 12);
    auto a = random_band_field(grid, 11, 0.6, 4);
    auto b = random_band_field(grid, 12, 0.6, 4);
    auto c = random_band_field(grid, 13, 0.6, 4);
    const double pref = std::pow(2.0 * M_PI, -2);

    // <conj a, b> = integral of a b; <conj b, c> = integral of b c
    cd s_ab(0.0, 0.0), s_bc(0.0, 0.0);
    int k[2], mk[2];
    for (std::size_t i = 0; i < a.c.size(); ++i) {
        grid.decode(i, k);
        mk[0] = -k[0];
        mk[1] = -k[1];
        s_ab += a.c[i] * b.at(mk);
        s_bc += b.c[i] * c.at(mk);
    }

    auto pa = inverse_transform(a);
    auto pb = inverse_transform(b);
    auto pc = inverse_transform(c);
    auto pp = inverse_transform(truncated_product(a, b, c));
    double worst = 0;
    for (std::size_t x = 0; x < pa.size(); ++x) {
        cd lhs = pa[x] * pb[x] * pc[x];
        cd rhs = pp[x] + pref * s_ab * pc[x] + pref * s_bc * pa[x];
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("compute_iterates: order 0 is the free evolution, zero start above") {
    auto params = make_params(2, 0.5, 0.3);
    auto grid = make_grid(2, 17, 0.5, 1.0);
    auto u0 = sample_initial_data(params, grid, default_bump(), 5);
    auto set = compute_iterates(params, u0, 2, {0.0, 0.3}, 1e-3);
    REQUIRE(set.times.size() == 2);
    // u^n(0) = 0 for n >= 1, u^0(0) = u0
    CHECK(field_max_diff(set.at(0, 0.0), u0) == 0.0);
    CHECK(field_norm(set.at(1, 0.0)) == 0.0);
    CHECK(field_norm(set.at(2, 0.0)) == 0.0);
    // |u^0(k,t)| = |u0(k)|
    const auto& f = set.at(0, 0.3);
    double worst = 0;
    for (std::size_t i = 0; i < f.c.size(); ++i)
        worst = std::max(worst, std::abs(std::abs(f.c[i]) - std::abs(u0.c[i])));
    CHECK(worst < 1e-12);
    CHECK_THROWS_AS(set.time_index(0.15), std::domain_error);
}

TEST_CASE("first iterate matches the explicit triple-sum closed form") {
    auto params = make_params(2, 0.5, 0.3);
    auto grid = make_grid(2, 17, 0.5, 1.0);
    auto u0 = sample_initial_data(params, grid, default_bump(), 21);
    const double t = 0.3;
    auto set = compute_iterates(params, u0, 1, {t}, 5e-4);
    auto ref = first_iterate_closed_form(params, u0, 2, t);
    double err = field_max_diff(set.at(1, t), ref);
    INFO("max diff = " << err << ", |u1| = " << field_norm(ref));
    CHECK(err < 1e-6 * std::max(1.0, field_norm(ref)));
}

TEST_CASE("halving the quadrature step reduces the u^1 error ~4x") {
    auto params = make_params(2, 0.5, 0.3);
    auto grid = make_grid(2, 17, 0.5, 1.0);
    auto u0 = sample_initial_data(params, grid, default_bump(), 22);
    const double t = 0.3;
    auto ref = first_iterate_closed_form(params, u0, 2, t);
    auto err_at = [&](double h) {
        auto set = compute_iterates(params, u0, 1, {t}, h);
        return field_max_diff(set.at(1, t), ref);
    };
    double e1 = err_at(4e-3);
    double e2 = err_at(2e-3);
    INFO("e1=" << e1 << " e2=" << e2 << " ratio=" << e1 / e2);
    CHECK(e1 / e2 > 3.2);
    CHECK(e1 / e2 < 4.8);
}

TEST_CASE("doubling lambda multiplies u^n by exactly 2^{2n}") {
    auto p1 = make_params_lambda(2, 0.5, 1.0);
    auto p2 = make_params_lambda(2, 0.5, 2.0);
    auto grid = make_grid(2, 17, 0.5, 1.0);
    auto u0 = sample_initial_data(p1, grid, default_bump(), 33);
    const double t = 0.2;
    auto s1 = compute_iterates(p1, u0, 2, {t}, 2e-3);
    auto s2 = compute_iterates(p2, u0, 2, {t}, 2e-3);
    const auto& a1 = s1.at(1, t);
    const auto& a2 = s2.at(1, t);
    const auto& b1 = s1.at(2, t);
    const auto& b2 = s2.at(2, t);
    for (std::size_t i = 0; i < a1.c.size(); ++i) {
        CHECK(a2.c[i] == 4.0 * a1.c[i]);   // power-of-two scaling is exact
        CHECK(b2.c[i] == 16.0 * b1.c[i]);
    }
}

TEST_CASE("wick_phase: arithmetic and linearity") {
    auto grid = make_grid(2, 17, 0.5, 1.0);
    FourierField f(grid);
    int k0[2] = {0, 0};
    f.at(k0) = std::pow(2.0 * M_PI, 1.0); // ||f||^2 = (2pi)^d, d = 2
    CHECK(wick_phase(f, 0.0) == 0.0);
    CHECK(wick_phase(f, 0.7) == doctest::Approx(-1.4).epsilon(1e-14));
    auto g = random_band_field(grid, 9, 0.4, 4);
    CHECK(wick_phase(g, 0.6) == doctest::Approx(2.0 * wick_phase(g, 0.3)).epsilon(1e-14));
}

TEST_CASE("error_term: order-0 closed form; zero iterates give zero") {
    auto params = make_params(2, 0.5, 0.3);
    auto grid = make_grid(2, 17, 0.5, 1.0);
    auto u0 = sample_initial_data(params, grid, default_bump(), 44);
    const double t = 0.25;
    auto set = compute_iterates(params, u0, 0, {t}, 1e-2);
    auto e0 = error_term(set, t);
    // E^0 = lambda^2 [ -u0bar u0 u0 + (2/(2pi)^d) ||u0||^2 u0 ] on the free flow
    const auto& v = set.at(0, t);
    const int P = 2 * grid.M;
    auto pv = to_physical_padded(v, P);
    std::vector<cd> cube(pv.size());
    for (std::size_t x = 0; x < pv.size(); ++x) cube[x] = pv[x] * std::norm(pv[x]);
    auto cubic = from_physical_padded(cube, P, grid);
    const double lam2 = params.lambda * params.lambda;
    const double pref = 2.0 * std::pow(2.0 * M_PI, -2) * v.l2_norm_sq();
    double worst = 0;
    for (std::size_t i = 0; i < e0.c.size(); ++i)
        worst = std::max(worst, std::abs(e0.c[i] - lam2 * (-cubic.c[i] + pref * v.c[i])));
    CHECK(worst < 1e-12);

    FourierField zero(grid);
    auto zset = compute_iterates(params, zero, 2, {t}, 1e-2);
    CHECK(field_norm(error_term(zset, t)) == 0.0);
}

TEST_CASE("residual identity: i dv/dt + Lap v - lambda^2 P(v, conj v, v) = E^N") {
    auto params = make_params(2, 0.5, 0.3);
    auto grid = make_grid(2, 17, 0.5, 1.0);
    auto u0 = sample_initial_data(params, grid, default_bump(), 55);
    const int N = 2;
    const double t = 0.2, del = 2e-4;
    auto set = compute_iterates(params, u0, N, {t - del, t, t + del}, 5e-5);

    auto partial_sum = [&](double tt) {
        FourierField v(grid);
        for (int n = 0; n <= N; ++n) {
            const auto& f = set.at(n, tt);
            for (std::size_t i = 0; i < v.c.size(); ++i) v.c[i] += f.c[i];
        }
        return v;
    };
    auto vm = partial_sum(t - del), v = partial_sum(t), vp = partial_sum(t + del);
    auto pvvv = truncated_product(v, conjugate_field(v), v);
    auto en = error_term(set, t);

    const double lam2 = params.lambda * params.lambda;
    int k[2];
    double diff2 = 0, ref2 = 0;
    for (std::size_t i = 0; i < v.c.size(); ++i) {
        grid.decode(i, k);
        double k2 = double(k[0]) * k[0] + double(k[1]) * k[1];
        cd dvdt = (vp.c[i] - vm.c[i]) / (2.0 * del);
        cd lhs = cd(0.0, 1.0) * dvdt - k2 * v.c[i] - lam2 * pvvv.c[i];
        diff2 += std::norm(lhs - en.c[i]);
        ref2 += std::norm(en.c[i]);
    }
    double rel = std::sqrt(diff2 / ref2);
    INFO("relative residual mismatch = " << rel << ", |E^N| = " << std::sqrt(ref2));
    CHECK(rel < 1e-2);
}

TEST_CASE("gauge consistency: solver vs renormalized solver times the Wick phase") {
    auto params = make_params_lambda(2, 0.5, 1.1);
    auto grid = make_grid(2, 17, 0.5, 1.0);
    auto u0 = sample_initial_data(params, grid, default_bump(), 66);
    const double t = 0.4, dt = 1e-3;
    StrangStepper plain{params};
    StrangStepper renorm{params};
    renorm.nonlinear_shift = 2.0 * u0.l2_norm_sq() * std::pow(2.0 * M_PI, -2);
    auto u = plain.evolve(u0, t, dt);
    auto w = renorm.evolve(u0, t, dt);
    double ph = params.lambda * params.lambda * wick_phase(u0, t);
    cd gauge(std::cos(ph), std::sin(ph));
    double worst = 0;
    for (std::size_t i = 0; i < u.c.size(); ++i)
        worst = std::max(worst, std::abs(u.c[i] - gauge * w.c[i]));
    CHECK(worst < 1e-11);
}

TEST_CASE("assemble_approximation: cutoff shape and gauged partial sum") {
    CHECK(time_cutoff(0.3) == 1.0);
    CHECK(time_cutoff(1.0) == 1.0);
    CHECK(time_cutoff(2.0) == 0.0);
    CHECK(time_cutoff(3.0) == 0.0);
    double mid = time_cutoff(1.5);
    CHECK(mid > 0.0);
    CHECK(mid < 1.0);
    CHECK(time_cutoff(1.2) > time_cutoff(1.8)); // monotone in between

    auto params = make_params(2, 0.5, 0.3);
    auto grid = make_grid(2, 17, 0.5, 1.0);
    auto u0 = sample_initial_data(params, grid, default_bump(), 77);
    const double t = 0.3;
    auto set = compute_iterates(params, u0, 1, {t}, 2e-3);
    auto app = assemble_approximation(set, t);
    double ph = params.lambda * params.lambda * wick_phase(u0, t);
    cd gauge(std::cos(ph), std::sin(ph));
    FourierField ref(grid);
    for (int n = 0; n <= 1; ++n)
        for (std::size_t i = 0; i < ref.c.size(); ++i) ref.c[i] += set.at(n, t).c[i];
    for (auto& z : ref.c) z *= gauge; // chi(t/2) = 1 here
    CHECK(field_max_diff(app, ref) < 1e-14);
}

TEST_CASE("iterate moment, order 0: time-independent and matches the data spectrum") {
    auto params = make_params(2, 0.25, 0.3);
    auto grid = make_grid(2, 21, 0.25, 1.0, 5);
    auto prof = default_bump();
    auto mc = iterate_moment_L2(params, grid, prof, 0, {0.05, 0.1}, 400, 1e-2, 13, 3);
    CHECK(mc.mean[0] == mc.mean[1]); // free flow: per-realization norm identical
    double expect = 0;
    int k[2];
    double x[2];
    for (std::size_t i = 0; i < grid.size(); ++i) {
        grid.decode(i, k);
        x[0] = params.eps * k[0];
        x[1] = params.eps * k[1];
        double A = prof(x, 2);
        expect += A * A;
    }
    expect *= std::pow(params.eps, 2);
    INFO("mean=" << mc.mean[0] << " expect=" << expect << " se=" << mc.std_error[0]);
    CHECK(std::abs(mc.mean[0] - expect) < 3.0 * mc.std_error[0]);
}

TEST_CASE("E||u^1(t)||^2 grows ~linearly in t on [4 eps, 1]") {
    auto params = make_params_lambda(2, 1.0 / 12.0, 1.0);
    auto grid = make_grid(2, 49, 1.0 / 12.0, 1.0);
    std::vector<double> times = {1.0 / 3.0, 0.5774, 1.0}; // log-spaced
    auto mc = iterate_moment_L2(params, grid, default_bump(), 1, times, 80, 5e-4, 29, 2);
    // least-squares slope of log mean vs log t
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int m = 3;
    for (int i = 0; i < m; ++i) {
        double lx = std::log(times[i]), ly = std::log(mc.mean[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    INFO("means: " << mc.mean[0] << " " << mc.mean[1] << " " << mc.mean[2]
                   << "  slope=" << slope);
    CHECK(slope > 0.8);
    CHECK(slope < 1.2);
}
