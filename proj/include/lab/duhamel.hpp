// Truncated Duhamel expansion of the cubic Schrodinger flow around random
// data. The truncation operator P removes the two self-contracted diagonals
// of the cubic product; the iterates u^0, u^1, ..., u^N solve the forced
// linear hierarchy
//     i d/dt u^n + Laplace u^n = lambda^2 sum_{i+j+k=n-1} P(u^i, conj(u^j), u^k),
// integrated by interaction-picture trapezoid quadrature. The removed
// diagonals reappear as an explicit phase e^{i lambda^2 omega(t)} (Wick
// ordering) and the closure defect of the truncated system is the error term
// E^N. Ensemble moments of the iterates feed the kinetic cross-checks.
#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "lab/grid.hpp"
#include "lab/params.hpp"
#include "lab/profile.hpp"

namespace lab {

// F[P(a,b,c)](k) = (2pi)^{-d} sum_{k1+k2+k3=k} ahat(k1) bhat(k2) chat(k3)
//                  * (1 - delta(k1+k2) - delta(k2+k3)),
// i.e. the plain triple product minus the two diagonal corrections. No slot
// is conjugated here; callers pass conjugate_field(b) where needed. Computed
// alias-free on a 2M pad, truncated back to the grid band. Grids must match.
FourierField truncated_product(const FourierField& a, const FourierField& b,
                               const FourierField& c);

// Iterates u^0..u^N recorded at the requested times (ascending, >= 0).
struct IterateSet {
    PhysicalParams params;
    TorusGrid grid;
    int N = 0;
    std::vector<double> times;
    std::vector<std::vector<FourierField>> u; // u[n][time index], n = 0..N

    // Iterate of order n at the recorded time t (must match a requested time).
    const FourierField& at(int n, double t) const;
    std::size_t time_index(double t) const;
};

// March the hierarchy to max(times) with trapezoid step <= quadrature_dt
// (each inter-record interval is divided into equal steps, so every requested
// time is hit exactly). u^0 is the free evolution of u0; u^n(0) = 0 for n>=1.
IterateSet compute_iterates(const PhysicalParams& params, const FourierField& u0, int N,
                            const std::vector<double>& times, double quadrature_dt);

// Wick phase omega(t) = -(2t/(2pi)^d) ||u0||^2: the constant rotation that
// absorbs the diagonal corrections removed by P.
double wick_phase(const FourierField& u0, double t);

// Closure defect of the order-N truncation at a recorded time t:
//     E^N = lambda^2 [ - sum u^i conj(u^j) u^k + (2/(2pi)^d) sum V^{ij} u^k ],
// both sums over i,j,k <= N with i+j+k >= N, V^{ij} = <u^i, u^j> (spectral).
// Equivalently E^N = -lambda^2 sum_{same range} P(u^i, conj(u^j), u^k), so
//     i d/dt(sum_n u^n) + Laplace(sum_n u^n) - lambda^2 P(v, conj v, v) = E^N.
FourierField error_term(const IterateSet& set, double t);

// Smooth time cutoff: 1 on [0,1], 0 on [2,inf), C^infty in between
// (exp(-1/x) mollifier ratio). Only affects assembled output for t > 2.
double time_cutoff(double x);

// chi(t/2) e^{i lambda^2 omega(t)} sum_n u^n(t): the gauged, cutoff partial sum
// approximating the true flow of the same realization.
FourierField assemble_approximation(const IterateSet& set, double t);

// Monte Carlo estimate of E ||u^n(t)||^2 over the Gaussian ensemble, one
// entry per requested time (single march per realization).
struct MomentCurve {
    std::vector<double> times;
    std::vector<double> mean, std_error;
    std::size_t n = 0; // ensemble size
};

MomentCurve iterate_moment_L2(const PhysicalParams& params, const TorusGrid& grid,
                              const DataProfile& profile, int n,
                              const std::vector<double>& times, std::size_t ensemble_size,
                              double quadrature_dt, std::uint64_t master_seed, int workers);

// Single-time convenience wrapper: (mean, stderr).
std::pair<double, double> iterate_moment_L2(const PhysicalParams& params, const TorusGrid& grid,
                                            const DataProfile& profile, int n, double t,
                                            std::size_t ensemble_size, double quadrature_dt,
                                            std::uint64_t master_seed, int workers);

} // namespace lab
