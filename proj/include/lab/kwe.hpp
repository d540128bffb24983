// Kinetic wave equation: the collision operator evaluated by exact
// resonant-manifold quadrature, RK4 time stepping in kinetic time, the
// discrete lattice main-term sum, and the comparison of ensemble spectra
// against the kinetic prediction.
//
// The collision operator
//   C[rho](k) = c0 int delta(k+l-m-n) delta(|k|^2+|l|^2-|m|^2-|n|^2)
//               rho_k rho_l rho_m rho_n [1/rho_k + 1/rho_l - 1/rho_m - 1/rho_n]
// is computed by eliminating n = k+l-m, so the frequency constraint becomes
// Omega = -2(k-m).(l-m) = 0: for each m = k + r w (r > 0, w a unit vector)
// the resonant l live on the affine plane through m orthogonal to w. The
// co-area factor 1/(2|k-m|) combines with the polar volume r^{d-1} dr dw to
// the regular weight r^{d-2}/2, so no small-r cutoff is needed in d >= 2 (an
// optional cutoff is still supported, with the excluded mass estimated). The
// bracket is always evaluated in the multiplied-out form
//   rho_l rho_m rho_n + rho_k rho_m rho_n - rho_k rho_l rho_n - rho_k rho_l rho_m
// which is regular where rho vanishes. c0 = 2^{2-2d} pi^{1-2d}.
#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "lab/nls.hpp"
#include "lab/params.hpp"
#include "lab/profile.hpp"

namespace lab {

// Density as a function of the continuum wavenumber (real, nonnegative,
// compactly supported).
using DensityFn = std::function<double(const double* k, int d)>;

// Uniform continuum grid, spacing h, points k_i = h * (i - half) per axis,
// row-major over (2*half+1)^d nodes. Values vanish outside the box.
struct SpectralDensity {
    int d = 2;
    double h = 0.0;
    int half = 0;
    std::vector<double> rho;

    int side() const { return 2 * half + 1; }
    std::size_t size() const { return rho.size(); }
    // multilinear interpolation; zero outside the grid box
    double value(const double* k) const;
};

// Zero density / pointwise sampling of f on the grid covering |k_i| <= extent.
SpectralDensity make_density(int d, double h, double extent);
SpectralDensity sample_density(const DensityFn& f, int d, double h, double extent);

double density_mass(const SpectralDensity& rho);   // sum rho h^d
double density_energy(const SpectralDensity& rho); // sum |k|^2 rho h^d

// Quadrature resolution for the resonant-manifold integral.
struct CollisionQuadrature {
    double support_radius = 1.0; // rho vanishes for |k| > support_radius
    int n_angle = 64;            // nodes per angular coordinate of w
    int n_radial = 32;           // Gauss-Legendre nodes in r on (r_min, 2*support)
    int n_plane = 40;            // Gauss-Legendre nodes per in-plane coordinate
    double r_min = 0.0;          // optional cutoff |k-m| >= r_min (excluded mass reported)
};

// The multiplied-out bracket; antisymmetric under (rk,rl) <-> (rm,rn).
double collision_bracket(double rk, double rl, double rm, double rn);

// C[rho](k) for an analytic density. If `excluded` is non-null it receives an
// estimate of the |integrand| mass dropped by the r < r_min cutoff (0 when
// r_min == 0).
double collision_value(const DensityFn& rho, int d, const double* k,
                       const CollisionQuadrature& quad, double* excluded = nullptr);

// C[rho] sampled on the grid covering |k_i| <= extent (parallel over output
// points; each point is computed independently, so the result is identical
// for any worker count). `excluded_mass` accumulates the per-point exclusion
// estimates times h^d.
SpectralDensity collision_map(const DensityFn& rho, int d, double h, double extent,
                              const CollisionQuadrature& quad, int workers = 1,
                              double* excluded_mass = nullptr);

// Same, with rho given on a grid (multilinear interpolation feeds the
// quadrature); the output reuses the input grid geometry.
SpectralDensity collision_operator(const SpectralDensity& rho, const CollisionQuadrature& quad,
                                   int workers = 1, double* excluded_mass = nullptr);

// One explicit RK4 step of d rho / dt' = C[rho] in kinetic time.
SpectralDensity kwe_step(const SpectralDensity& rho, double dt, const CollisionQuadrature& quad,
                         int workers = 1);

struct KineticTrajectory {
    std::vector<double> times;
    std::vector<SpectralDensity> rho;
    std::vector<double> mass;   // sum rho h^d per recorded time
    std::vector<double> energy; // sum |k|^2 rho h^d per recorded time
};

// March to t_final with RK4 steps of at most dt. A step whose result dips
// below -tol_negative * max(rho0) anywhere is rejected and retried with half
// the step size; after `max_retries` consecutive rejections a numeric_error
// ("step-size") is thrown.
KineticTrajectory kwe_solve(const SpectralDensity& rho0, double t_final, double dt,
                            const CollisionQuadrature& quad, int workers = 1,
                            int max_retries = 8, double tol_negative = 1e-12);

// Exact lattice sum behind the second-order spectral transfer at mode k:
//   (eps^{3d} lambda^4 / (2pi)^{2d}) sum_{k+l=m+n} 8 sin^2(t Omega / 2) / Omega^2
//       * [A2_l A2_m A2_n + A2_k A2_m A2_n - A2_k A2_l A2_n - A2_k A2_l A2_m]
// with A2_k = |A(eps k)|^2 and the Omega = 0 term taking the limit value
// 2 t^2. The sum is truncated exactly by the support of A. Throws
// resource_error when the support lattice is too large to enumerate.
double main_term_sum(const PhysicalParams& params, const DataProfile& profile, double t,
                     const std::vector<int>& k);

// Comparison of an ensemble spectral table against the kinetic prediction at
// one recorded time: per mode the residual
//   LHS_k = E[|uhat(k,t)|^2 - |uhat(k,0)|^2] - eps^d (t/t_kin) C[A^2](eps k)
// (the paired-difference estimator subtracts the initial spectrum exactly),
// its Monte Carlo error bar, the measure-weighted l1 norm eps^d sum_k |LHS_k|
// (the lattice approximation of int |LHS| in the rescaled frequency eps*k,
// so values at different eps are comparable), the normalizing scale
// eps^d t/t_kin, and their ratio.
struct ComparisonReport {
    double t = 0.0;
    std::vector<std::vector<int>> ks;  // lattice modes, as in the table
    std::vector<double> residual;      // LHS_k
    std::vector<double> std_error;     // Monte Carlo error bar on LHS_k
    std::vector<double> predicted;     // eps^d (t/t_kin) C[A^2](eps k)
    double l1 = 0.0;                   // eps^d sum_k |LHS_k|
    double scale = 0.0;                // eps^d t/t_kin
    double ratio = 0.0;                // l1 / scale (NaN for the free evolution)
};

// `time_index` selects the recorded time; it must lie in the admissible
// window [1/lambda^2, 1] (domain_error otherwise; the free evolution
// lambda = 0 has no transfer scale and skips the window check).
ComparisonReport kinetic_comparison(const SpectralTable& sim, std::size_t time_index,
                                    const PhysicalParams& params, const DataProfile& profile,
                                    const CollisionQuadrature& quad, int workers = 1);

// Numerical value of int_R sin^2(x)/x^2 dx (the normalization constant of the
// squared Dirichlet kernel; equals pi). Kept as a quadrature self-test.
double sinc_squared_integral();

} // namespace lab
