// Pseudo-spectral solver for the cubic Schrodinger equation on the torus,
//     i du/dt + Laplace u = sign * lambda^2 |u|^2 u,
// by second-order Strang splitting: half-step of the exact linear flow in
// Fourier space, full nonlinear phase rotation in physical space, half linear
// step. Every substep is unitary on the M^d grid, so the discrete mass
// sum |uhat|^2 is conserved to rounding. Dealiasing is by construction: the
// grid band K = (M-1)/2 is at least twice the data band (`keep`), so cubic
// products of data-band content stay below the Nyquist frequency and never
// alias back onto resolved modes.
#pragma once

#include <cstdint>
#include <vector>

#include "lab/grid.hpp"
#include "lab/params.hpp"
#include "lab/profile.hpp"

namespace lab {

struct StrangStepper {
    PhysicalParams params;
    int sign = +1;                // +1 defocusing (default), -1 focusing
    double nonlinear_shift = 0.0; // rotate by |u|^2 - shift (renormalized variant)

    // One Strang step of size dt.
    FourierField step(const FourierField& u, double dt) const;
    // March to time t in steps of at most dt_max (final step shortened).
    FourierField evolve(const FourierField& u0, double t, double dt_max) const;
};

// Conserved quantities (for drift checks).
double mass(const FourierField& u);                              // ||u||_{L2}^2
double hamiltonian(const FourierField& u, const PhysicalParams& p); // int |grad u|^2 + (lambda^2/2) int |u|^4

// Ensemble spectral statistics. For every lattice point in the keep band and
// every requested time, records the sample mean/stderr of |uhat(k,t)|^2 and of
// the per-realization paired difference |uhat(k,t)|^2 - |uhat(k,0)|^2 (an
// unbiased, variance-reduced estimator of the transfer away from the initial
// spectrum, since E|uhat(k,0)|^2 = eps^d |A(eps k)|^2 exactly).
//
// With control_dt > 0 the delta additionally subtracts the control variate
//   2 Re( conj(uhat^0(t,k)) uhat^1(t,k) ),
// the cross term of the free evolution with the first expansion iterate
// (computed per realization by the trapezoid march with step <= control_dt).
// Its Gaussian expectation vanishes identically -- the truncated product
// leaves only the doubly diagonal Wick term, whose coefficient is purely
// imaginary -- so the delta estimator stays unbiased while its dominant
// fluctuation, which is exactly this cross term at leading order in the
// coupling, cancels realization by realization. The quadrature step only
// affects how much variance is removed, never the mean.
struct SpectralTable {
    TorusGrid grid;
    std::vector<double> times;            // actual times hit by the stepper
    std::vector<std::vector<int>> ks;     // keep-band lattice points, row-major order
    std::vector<std::vector<double>> mean_density, se_density; // [time][mode]
    std::vector<std::vector<double>> mean_delta, se_delta;     // [time][mode]
    std::size_t n = 0;                    // ensemble size
};

SpectralTable run_ensemble(const PhysicalParams& params, const TorusGrid& grid,
                           const DataProfile& profile, std::size_t ensemble_size,
                           const std::vector<double>& times, double dt,
                           std::uint64_t master_seed, int workers, double control_dt = 0.0);

} // namespace lab
