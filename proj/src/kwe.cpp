#include "lab/kwe.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "lab/errors.hpp"
#include "lab/reduce.hpp"

namespace lab {

namespace {

// ---- generic helpers -------------------------------------------------------

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& body) {
    workers = std::max(1, workers);
    if (workers == 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr eptr;
    std::atomic<bool> failed{false};
    auto run = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n || failed.load()) return;
            try {
                body(i);
            } catch (...) {
                if (!failed.exchange(true)) eptr = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& th : pool) th.join();
    if (failed.load()) std::rethrow_exception(eptr);
}

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) * z * p1 - j * p2) / (j + 1);
            }
            // P_n'(z) = n (P_{n-1}(z) - z P_n(z)) / (1 - z^2)
            pp = n * (p1 - z * p0) / (1.0 - z * z);
            const double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
    }
}

struct SphereNode {
    std::vector<double> dir;
    double weight;
};

// Product quadrature on the unit sphere S^{d-1}: trapezoid in the circle
// angle, Gauss-Legendre in each polar cosine with the (1-c^2)^{(d-3)/2}
// surface factor folded into the weight. Weights sum to |S^{d-1}|.
std::vector<SphereNode> sphere_nodes(int d, int n) {
    std::vector<SphereNode> out;
    if (d == 1) {
        out.push_back({{1.0}, 1.0});
        out.push_back({{-1.0}, 1.0});
        return out;
    }
    if (d == 2) {
        out.reserve(n);
        for (int j = 0; j < n; ++j) {
            const double th = 2.0 * M_PI * (j + 0.5) / n;
            out.push_back({{std::cos(th), std::sin(th)}, 2.0 * M_PI / n});
        }
        return out;
    }
    std::vector<double> c, wc;
    gauss_legendre(n, c, wc);
    const std::vector<SphereNode> sub = sphere_nodes(d - 1, n);
    out.reserve(static_cast<std::size_t>(n) * sub.size());
    for (int i = 0; i < n; ++i) {
        const double s = std::sqrt(std::max(0.0, 1.0 - c[i] * c[i]));
        const double fac = wc[i] * std::pow(1.0 - c[i] * c[i], 0.5 * (d - 3));
        for (const SphereNode& sn : sub) {
            SphereNode node;
            node.dir.resize(d);
            for (int j = 0; j + 1 < d; ++j) node.dir[j] = s * sn.dir[j];
            node.dir[d - 1] = c[i];
            node.weight = fac * sn.weight;
            out.push_back(std::move(node));
        }
    }
    return out;
}

// Orthonormal basis of the hyperplane orthogonal to the unit vector w,
// built from coordinate axes by two Gram-Schmidt passes (the second pass
// pushes the residual dot products down to rounding, so the resonance
// Omega = 2r sum_i s_i (w . u_i) vanishes to machine precision on the nodes).
std::vector<std::vector<double>> plane_basis(const std::vector<double>& w) {
    const int d = static_cast<int>(w.size());
    int skip = 0;
    for (int j = 1; j < d; ++j)
        if (std::abs(w[j]) > std::abs(w[skip])) skip = j;
    std::vector<std::vector<double>> basis;
    basis.reserve(d - 1);
    for (int axis = 0; axis < d; ++axis) {
        if (axis == skip) continue;
        std::vector<double> v(d, 0.0);
        v[axis] = 1.0;
        for (int pass = 0; pass < 2; ++pass) {
            double dw = 0.0;
            for (int j = 0; j < d; ++j) dw += v[j] * w[j];
            for (int j = 0; j < d; ++j) v[j] -= dw * w[j];
            for (const auto& u : basis) {
                double du = 0.0;
                for (int j = 0; j < d; ++j) du += v[j] * u[j];
                for (int j = 0; j < d; ++j) v[j] -= du * u[j];
            }
        }
        double nrm = 0.0;
        for (int j = 0; j < d; ++j) nrm += v[j] * v[j];
        nrm = std::sqrt(nrm);
        for (int j = 0; j < d; ++j) v[j] /= nrm;
        basis.push_back(std::move(v));
    }
    return basis;
}

double norm2(const double* k, int d) {
    double s = 0.0;
    for (int j = 0; j < d; ++j) s += k[j] * k[j];
    return std::sqrt(s);
}

} // namespace

// ---- spectral density grid -------------------------------------------------

double SpectralDensity::value(const double* k) const {
    const int s = side();
    double y[8];
    int i0[8];
    for (int j = 0; j < d; ++j) {
        y[j] = k[j] / h + half;
        if (!(y[j] >= 0.0 && y[j] <= s - 1)) return 0.0; // also rejects NaN
        i0[j] = std::min(static_cast<int>(y[j]), s - 2);
        y[j] -= i0[j];
    }
    double acc = 0.0;
    for (int corner = 0; corner < (1 << d); ++corner) {
        double wgt = 1.0;
        std::size_t idx = 0;
        for (int j = 0; j < d; ++j) {
            const int bit = (corner >> j) & 1;
            wgt *= bit ? y[j] : 1.0 - y[j];
            idx = idx * s + (i0[j] + bit);
        }
        acc += wgt * rho[idx];
    }
    return acc;
}

SpectralDensity make_density(int d, double h, double extent) {
    if (d < 1 || d > 8) throw std::domain_error("density dimension must be in [1, 8]");
    if (h <= 0.0 || extent <= 0.0) throw std::domain_error("density grid needs h > 0, extent > 0");
    SpectralDensity out;
    out.d = d;
    out.h = h;
    out.half = static_cast<int>(std::ceil(extent / h - 1e-12));
    std::size_t n = 1;
    for (int j = 0; j < d; ++j) n *= static_cast<std::size_t>(out.side());
    out.rho.assign(n, 0.0);
    return out;
}

SpectralDensity sample_density(const DensityFn& f, int d, double h, double extent) {
    SpectralDensity out = make_density(d, h, extent);
    const int s = out.side();
    double k[8];
    for (std::size_t idx = 0; idx < out.size(); ++idx) {
        std::size_t rem = idx;
        for (int j = d - 1; j >= 0; --j) {
            k[j] = h * (static_cast<int>(rem % s) - out.half);
            rem /= s;
        }
        out.rho[idx] = f(k, d);
    }
    return out;
}

double density_mass(const SpectralDensity& rho) {
    const double hd = std::pow(rho.h, rho.d);
    return hd * pairwise_sum(rho.rho.data(), rho.rho.size());
}

double density_energy(const SpectralDensity& rho) {
    const int s = rho.side();
    std::vector<double> terms(rho.size());
    for (std::size_t idx = 0; idx < rho.size(); ++idx) {
        std::size_t rem = idx;
        double k2 = 0.0;
        for (int j = 0; j < rho.d; ++j) {
            const double kj = rho.h * (static_cast<int>(rem % s) - rho.half);
            k2 += kj * kj;
            rem /= s;
        }
        terms[idx] = k2 * rho.rho[idx];
    }
    return std::pow(rho.h, rho.d) * pairwise_sum(terms.data(), terms.size());
}

// ---- collision operator ----------------------------------------------------

double collision_bracket(double rk, double rl, double rm, double rn) {
    return rl * rm * rn + rk * rm * rn - rk * rl * rn - rk * rl * rm;
}

double collision_value(const DensityFn& rho, int d, const double* k,
                       const CollisionQuadrature& quad, double* excluded) {
    if (d < 2 || d > 8) throw std::domain_error("collision operator needs 2 <= d <= 8");
    const double R = quad.support_radius;
    if (R <= 0.0) throw std::domain_error("collision quadrature needs support_radius > 0");
    if (quad.n_angle < 2 || quad.n_radial < 2 || quad.n_plane < 2)
        throw std::domain_error("collision quadrature needs at least 2 nodes per coordinate");
    if (quad.r_min < 0.0) throw std::domain_error("collision quadrature needs r_min >= 0");
    if (excluded) *excluded = 0.0;

    const double knorm = norm2(k, d);
    // every bracket monomial either carries rho_k (so |k| <= R) or carries
    // rho_l rho_m rho_n, where the resonance gives
    // |k|^2 = |m|^2 + |n|^2 - |l|^2 <= 2 R^2
    if (knorm > std::sqrt(2.0) * R + 1e-12) return 0.0;

    const double rhok = rho(k, d);
    // radial reach: terms carrying rho_m need |m| <= R; the one term without
    // rho_m carries rho_k rho_l rho_n and only contributes for |k| <= R, with
    // m within 2R sqrt(d-1) (in-plane box) + R of k.
    const double rmax = (knorm <= R * (1.0 + 1e-9)) ? knorm + R + 2.0 * R * std::sqrt(double(d - 1))
                                                    : knorm + R;

    std::vector<double> gx, gw, px, pw;
    gauss_legendre(quad.n_radial, gx, gw);
    gauss_legendre(quad.n_plane, px, pw);
    const std::vector<SphereNode> sphere = sphere_nodes(d, quad.n_angle);

    // flattened product grid over the d-1 in-plane coordinates, each on [-2R, 2R]
    const int pd = d - 1;
    std::size_t pcount = 1;
    for (int j = 0; j < pd; ++j) pcount *= static_cast<std::size_t>(quad.n_plane);
    std::vector<double> pnode(pcount * pd), pweight(pcount);
    for (std::size_t i = 0; i < pcount; ++i) {
        std::size_t rem = i;
        double wgt = 1.0;
        for (int j = 0; j < pd; ++j) {
            const int a = static_cast<int>(rem % quad.n_plane);
            rem /= quad.n_plane;
            pnode[i * pd + j] = 2.0 * R * px[a];
            wgt *= 2.0 * R * pw[a];
        }
        pweight[i] = wgt;
    }

    double m[8], l[8], nn[8];
    auto sweep = [&](double rlo, double rhi, bool absolute) {
        if (rhi <= rlo) return 0.0;
        double acc = 0.0;
        for (const SphereNode& sn : sphere) {
            const auto basis = plane_basis(sn.dir);
            for (int ir = 0; ir < quad.n_radial; ++ir) {
                const double r = 0.5 * (rlo + rhi) + 0.5 * (rhi - rlo) * gx[ir];
                const double wr = 0.5 * (rhi - rlo) * gw[ir];
                for (int j = 0; j < d; ++j) m[j] = k[j] + r * sn.dir[j];
                const double rhom = rho(m, d);
                if (rhom == 0.0 && rhok == 0.0) continue; // every monomial has rho_k or rho_m
                const double pref = sn.weight * wr * 0.5 * std::pow(r, d - 2);
                for (std::size_t is = 0; is < pcount; ++is) {
                    for (int j = 0; j < d; ++j) {
                        double shift = 0.0;
                        for (int b = 0; b < pd; ++b) shift += pnode[is * pd + b] * basis[b][j];
                        l[j] = m[j] + shift;
                        nn[j] = k[j] + shift;
                    }
                    const double br = collision_bracket(rhok, rho(l, d), rhom, rho(nn, d));
                    acc += pref * pweight[is] * (absolute ? std::abs(br) : br);
                }
            }
        }
        return acc;
    };

    const double c0 = std::pow(2.0, 2 - 2 * d) * std::pow(M_PI, 1 - 2 * d);
    const double val = c0 * sweep(std::min(quad.r_min, rmax), rmax, false);
    if (excluded && quad.r_min > 0.0)
        *excluded = c0 * sweep(0.0, std::min(quad.r_min, rmax), true);
    return val;
}

SpectralDensity collision_map(const DensityFn& rho, int d, double h, double extent,
                              const CollisionQuadrature& quad, int workers,
                              double* excluded_mass) {
    SpectralDensity out = make_density(d, h, extent);
    const int s = out.side();
    std::vector<double> excl(excluded_mass ? out.size() : 0, 0.0);
    parallel_for(out.size(), workers, [&](std::size_t idx) {
        double k[8];
        std::size_t rem = idx;
        for (int j = d - 1; j >= 0; --j) {
            k[j] = h * (static_cast<int>(rem % s) - out.half);
            rem /= s;
        }
        out.rho[idx] = collision_value(rho, d, k, quad, excluded_mass ? &excl[idx] : nullptr);
    });
    if (excluded_mass)
        *excluded_mass = std::pow(h, d) * pairwise_sum(excl.data(), excl.size());
    return out;
}

SpectralDensity collision_operator(const SpectralDensity& rho, const CollisionQuadrature& quad,
                                   int workers, double* excluded_mass) {
    // tight support of the grid function: largest |k| carrying a nonzero
    // value, plus one interpolation cell (keeps the Gauss-Legendre ranges
    // matched to where the density actually lives)
    const int s = rho.side();
    double supp2 = 0.0;
    for (std::size_t idx = 0; idx < rho.size(); ++idx) {
        if (rho.rho[idx] == 0.0) continue;
        std::size_t rem = idx;
        double k2 = 0.0;
        for (int j = 0; j < rho.d; ++j) {
            const double kj = rho.h * (static_cast<int>(rem % s) - rho.half);
            k2 += kj * kj;
            rem /= s;
        }
        supp2 = std::max(supp2, k2);
    }
    CollisionQuadrature q = quad;
    if (supp2 == 0.0) return make_density(rho.d, rho.h, rho.h * rho.half); // C[0] = 0
    // caller's declared radius acts as a floor so repeated evaluations with a
    // fixed declared support use identical quadrature ranges
    q.support_radius =
        std::max(quad.support_radius, std::sqrt(supp2) + rho.h * std::sqrt(double(rho.d)));
    const DensityFn fn = [&rho](const double* k, int) { return rho.value(k); };
    return collision_map(fn, rho.d, rho.h, rho.h * rho.half, q, workers, excluded_mass);
}

// ---- time stepping ---------------------------------------------------------

namespace {

void axpy(SpectralDensity& y, double a, const SpectralDensity& x) {
    for (std::size_t i = 0; i < y.rho.size(); ++i) y.rho[i] += a * x.rho[i];
}

} // namespace

SpectralDensity kwe_step(const SpectralDensity& rho, double dt, const CollisionQuadrature& quad,
                         int workers) {
    const SpectralDensity k1 = collision_operator(rho, quad, workers);
    SpectralDensity stage = rho;
    axpy(stage, 0.5 * dt, k1);
    const SpectralDensity k2 = collision_operator(stage, quad, workers);
    stage = rho;
    axpy(stage, 0.5 * dt, k2);
    const SpectralDensity k3 = collision_operator(stage, quad, workers);
    stage = rho;
    axpy(stage, dt, k3);
    const SpectralDensity k4 = collision_operator(stage, quad, workers);
    SpectralDensity out = rho;
    axpy(out, dt / 6.0, k1);
    axpy(out, dt / 3.0, k2);
    axpy(out, dt / 3.0, k3);
    axpy(out, dt / 6.0, k4);
    return out;
}

KineticTrajectory kwe_solve(const SpectralDensity& rho0, double t_final, double dt,
                            const CollisionQuadrature& quad, int workers, int max_retries,
                            double tol_negative) {
    if (t_final < 0.0 || dt <= 0.0) throw std::domain_error("kwe_solve needs t_final >= 0, dt > 0");
    double scale = 0.0;
    for (double v : rho0.rho) scale = std::max(scale, std::abs(v));
    const double floor_neg = -tol_negative * std::max(scale, 1.0);

    KineticTrajectory traj;
    traj.times.push_back(0.0);
    traj.rho.push_back(rho0);
    traj.mass.push_back(density_mass(rho0));
    traj.energy.push_back(density_energy(rho0));

    double t = 0.0, step = dt;
    while (t < t_final * (1.0 - 1e-12)) {
        double h = std::min(step, t_final - t);
        SpectralDensity next;
        bool accepted = false;
        for (int attempt = 0; attempt <= max_retries; ++attempt) {
            next = kwe_step(traj.rho.back(), h, quad, workers);
            bool ok = true;
            for (double v : next.rho)
                if (!(std::isfinite(v) && v >= floor_neg)) {
                    ok = false;
                    break;
                }
            if (ok) {
                accepted = true;
                break;
            }
            h *= 0.5;
        }
        if (!accepted)
            throw numeric_error("kinetic step-size underflow: density stays negative after " +
                                std::to_string(max_retries) + " halvings");
        t += h;
        step = h; // keep the reduced step for the rest of the march
        traj.times.push_back(t);
        traj.mass.push_back(density_mass(next));
        traj.energy.push_back(density_energy(next));
        traj.rho.push_back(std::move(next));
    }
    return traj;
}

// ---- discrete main term ----------------------------------------------------

double main_term_sum(const PhysicalParams& params, const DataProfile& profile, double t,
                     const std::vector<int>& k) {
    const int d = params.d;
    if (static_cast<int>(k.size()) != d) throw std::domain_error("main_term_sum: k has wrong dimension");
    if (t < 0.0) throw std::domain_error("main_term_sum needs t >= 0");
    if (t == 0.0) return 0.0;
    const double eps = params.eps;
    const int B = static_cast<int>(std::ceil(profile.support_radius / eps - 1e-12));
    const long long sidell = 2LL * B + 1;
    double boxsz = 1.0;
    for (int j = 0; j < d; ++j) boxsz *= double(sidell);
    if (boxsz > 2e8)
        throw resource_error("main_term_sum: support lattice too large (" +
                             std::to_string(boxsz) + " box points)");
    const int side = static_cast<int>(sidell);
    const std::size_t box = static_cast<std::size_t>(boxsz);

    // dense |A(eps .)|^2 over the box plus the in-support point list
    std::vector<double> dense(box, 0.0);
    std::vector<int> pts;       // flat coords, stride d
    std::vector<double> pa2;    // weight per point
    std::vector<long long> pm2; // |p|^2 per point
    double x[8];
    int c[8];
    for (std::size_t idx = 0; idx < box; ++idx) {
        std::size_t rem = idx;
        long long m2 = 0;
        for (int j = d - 1; j >= 0; --j) {
            c[j] = static_cast<int>(rem % side) - B;
            x[j] = eps * c[j];
            m2 += 1LL * c[j] * c[j];
            rem /= side;
        }
        const double a = profile(x, d);
        if (a == 0.0) continue;
        dense[idx] = a * a;
        pts.insert(pts.end(), c, c + d);
        pa2.push_back(a * a);
        pm2.push_back(m2);
    }
    const std::size_t P = pa2.size();
    if (3.0 * double(P) * double(P) > 4e9)
        throw resource_error("main_term_sum: " + std::to_string(P) +
                             " support points, pair enumeration too large");

    long long K2 = 0;
    int kinf = 0;
    for (int j = 0; j < d; ++j) {
        K2 += 1LL * k[j] * k[j];
        kinf = std::max(kinf, std::abs(k[j]));
        x[j] = eps * k[j];
    }
    const double ak = profile(x, d);
    const double A2k = ak * ak;

    // kernel table over every reachable Omega (determined coordinate bounded
    // by 2B + |k|_inf per axis)
    const long long reach = 1LL * d * (2LL * B + kinf) * (2LL * B + kinf);
    const long long bound = std::llabs(K2) + reach + 2LL * d * B * B + 8;
    std::vector<double> wtab(static_cast<std::size_t>(2 * bound + 1));
    for (long long om = -bound; om <= bound; ++om) {
        const double s = std::sin(0.5 * t * double(om));
        wtab[static_cast<std::size_t>(om + bound)] =
            om == 0 ? 2.0 * t * t : 8.0 * s * s / double(om * om);
    }

    auto dense_at = [&](const int* v, long long& v2) -> double {
        std::size_t idx = 0;
        v2 = 0;
        for (int j = 0; j < d; ++j) {
            v2 += 1LL * v[j] * v[j];
            if (v[j] < -B || v[j] > B) {
                for (++j; j < d; ++j) v2 += 1LL * v[j] * v[j];
                return -1.0; // outside the box: weight 0, |v|^2 still valid
            }
            idx = idx * side + (v[j] + B);
        }
        return dense[idx];
    };

    int det[8];
    // (m, n) enumeration covers the terms A2_l A2_m A2_n and A2_k A2_m A2_n
    double acc1 = 0.0;
    for (std::size_t a = 0; a < P; ++a) {
        const int* pm = &pts[a * d];
        for (std::size_t b = 0; b < P; ++b) {
            const int* pn = &pts[b * d];
            for (int j = 0; j < d; ++j) det[j] = pm[j] + pn[j] - k[j];
            long long l2;
            const double raw = dense_at(det, l2);
            const double A2l = raw < 0.0 ? 0.0 : raw;
            if (A2l == 0.0 && A2k == 0.0) continue;
            const long long om = K2 + l2 - pm2[a] - pm2[b];
            acc1 += wtab[static_cast<std::size_t>(om + bound)] * pa2[a] * pa2[b] * (A2l + A2k);
        }
    }
    double acc23 = 0.0;
    if (A2k > 0.0) {
        // (l, n) enumeration for -A2_k A2_l A2_n, m determined
        for (std::size_t a = 0; a < P; ++a) {
            const int* pl = &pts[a * d];
            for (std::size_t b = 0; b < P; ++b) {
                const int* pn = &pts[b * d];
                long long m2 = 0;
                for (int j = 0; j < d; ++j) {
                    det[j] = k[j] + pl[j] - pn[j];
                    m2 += 1LL * det[j] * det[j];
                }
                const long long om = K2 + pm2[a] - m2 - pm2[b];
                acc23 += wtab[static_cast<std::size_t>(om + bound)] * pa2[a] * pa2[b];
            }
        }
        // (l, m) enumeration for -A2_k A2_l A2_m, n determined
        for (std::size_t a = 0; a < P; ++a) {
            const int* pl = &pts[a * d];
            for (std::size_t b = 0; b < P; ++b) {
                const int* pm = &pts[b * d];
                long long n2 = 0;
                for (int j = 0; j < d; ++j) {
                    det[j] = k[j] + pl[j] - pm[j];
                    n2 += 1LL * det[j] * det[j];
                }
                const long long om = K2 + pm2[a] - pm2[b] - n2;
                acc23 += wtab[static_cast<std::size_t>(om + bound)] * pa2[a] * pa2[b];
            }
        }
    }

    const double pref = std::pow(eps, 3 * d) * std::pow(params.lambda, 4) /
                        std::pow(2.0 * M_PI, 2 * d);
    return pref * (acc1 - A2k * acc23);
}

// ---- comparison against the kinetic prediction ------------------------------

ComparisonReport kinetic_comparison(const SpectralTable& sim, std::size_t time_index,
                                    const PhysicalParams& params, const DataProfile& profile,
                                    const CollisionQuadrature& quad, int workers) {
    if (time_index >= sim.times.size())
        throw std::domain_error("kinetic_comparison: time index out of range");
    const double t = sim.times[time_index];
    const bool free_flow = params.lambda == 0.0;
    if (!free_flow) {
        const double lo = params.t_nonlin; // 1/lambda^2
        if (t < lo * (1.0 - 1e-9) || t > 1.0 + 1e-9)
            throw std::domain_error("kinetic_comparison: t = " + std::to_string(t) +
                                    " outside the admissible window [1/lambda^2, 1] = [" +
                                    std::to_string(lo) + ", 1]");
    }

    ComparisonReport rep;
    rep.t = t;
    rep.ks = sim.ks;
    const std::size_t nk = sim.ks.size();
    rep.residual.resize(nk);
    rep.std_error.resize(nk);
    rep.predicted.assign(nk, 0.0);
    const double epsd = std::pow(params.eps, params.d);
    rep.scale = free_flow ? 0.0 : epsd * t / params.t_kin;

    CollisionQuadrature q = quad;
    q.support_radius = std::max(quad.support_radius, profile.support_radius);
    const DensityFn a2 = [&profile](const double* v, int dd) {
        const double a = profile(v, dd);
        return a * a;
    };
    if (!free_flow) {
        parallel_for(nk, workers, [&](std::size_t j) {
            double kk[8];
            for (int i = 0; i < params.d; ++i) kk[i] = params.eps * sim.ks[j][i];
            rep.predicted[j] = rep.scale * collision_value(a2, params.d, kk, q);
        });
    }
    std::vector<double> absres(nk);
    for (std::size_t j = 0; j < nk; ++j) {
        rep.residual[j] = sim.mean_delta[time_index][j] - rep.predicted[j];
        rep.std_error[j] = sim.se_delta[time_index][j];
        absres[j] = std::abs(rep.residual[j]);
    }
    rep.l1 = epsd * pairwise_sum(absres.data(), absres.size());
    rep.ratio = rep.scale > 0.0 ? rep.l1 / rep.scale
                                : std::numeric_limits<double>::quiet_NaN();
    return rep;
}

// ---- quadrature self-test ---------------------------------------------------

double sinc_squared_integral() {
    // composite Simpson on [0, L], analytic tail from integrating by parts
    const double L = 2000.0;
    const std::size_t N = 1 << 22; // even
    const double h = L / N;
    auto f = [](double x) {
        if (x == 0.0) return 1.0;
        const double s = std::sin(x);
        return s * s / (x * x);
    };
    double odd = 0.0, even = 0.0;
    for (std::size_t i = 1; i < N; i += 2) odd += f(i * h);
    for (std::size_t i = 2; i < N; i += 2) even += f(i * h);
    const double body = h / 3.0 * (f(0.0) + 4.0 * odd + 2.0 * even + f(L));
    const double tail =
        1.0 / (2.0 * L) + std::sin(2.0 * L) / (4.0 * L * L) - std::cos(2.0 * L) / (4.0 * L * L * L);
    return 2.0 * (body + tail);
}

} // namespace lab
