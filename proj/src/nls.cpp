#include "lab/nls.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "lab/duhamel.hpp"
#include "lab/random_data.hpp"
#include "lab/reduce.hpp"
#include "lab/rng.hpp"

namespace lab {

namespace {

// multiply coefficients by exp(-i dt |k|^2)
void linear_phase(FourierField& u, double dt) {
    const int d = u.grid.d;
    int k[8];
    for (std::size_t i = 0; i < u.c.size(); ++i) {
        if (u.c[i] == cd(0.0, 0.0)) continue;
        u.grid.decode(i, k);
        double k2 = 0;
        for (int a = 0; a < d; ++a) k2 += double(k[a]) * k[a];
        double ph = -dt * k2;
        u.c[i] *= cd(std::cos(ph), std::sin(ph));
    }
}

} // namespace

FourierField StrangStepper::step(const FourierField& u, double dt) const {
    FourierField v = u;
    linear_phase(v, 0.5 * dt);
    std::vector<cd> phys = inverse_transform(v);
    const double c = sign * params.lambda * params.lambda * dt;
    for (cd& z : phys) {
        double ph = -c * (std::norm(z) - nonlinear_shift);
        z *= cd(std::cos(ph), std::sin(ph));
    }
    v = forward_transform(phys, v.grid);
    linear_phase(v, 0.5 * dt);
    return v;
}

FourierField StrangStepper::evolve(const FourierField& u0, double t, double dt_max) const {
    if (t < 0 || dt_max <= 0) throw std::domain_error("evolve: need t >= 0 and dt > 0");
    long nsteps = static_cast<long>(std::ceil(t / dt_max - 1e-12));
    if (nsteps < 0) nsteps = 0;
    FourierField u = u0;
    if (nsteps == 0) return u;
    double dt = t / static_cast<double>(nsteps);
    for (long s = 0; s < nsteps; ++s) u = step(u, dt);
    return u;
}

double mass(const FourierField& u) { return u.l2_norm_sq(); }

double hamiltonian(const FourierField& u, const PhysicalParams& p) {
    const int d = u.grid.d;
    int k[8];
    double grad = 0;
    for (std::size_t i = 0; i < u.c.size(); ++i) {
        u.grid.decode(i, k);
        double k2 = 0;
        for (int a = 0; a < d; ++a) k2 += double(k[a]) * k[a];
        grad += k2 * std::norm(u.c[i]);
    }
    // |u|^4 integral: u^2 has band 2K, so a 2M-point grid integrates exactly
    const int P = 2 * u.grid.M;
    std::vector<cd> phys = to_physical_padded(u, P);
    double q = 0;
    for (const cd& z : phys) {
        double a2 = std::norm(z);
        q += a2 * a2;
    }
    q *= std::pow(2.0 * M_PI / P, d);
    return grad + 0.5 * p.lambda * p.lambda * q;
}

SpectralTable run_ensemble(const PhysicalParams& params, const TorusGrid& grid,
                           const DataProfile& profile, std::size_t ensemble_size,
                           const std::vector<double>& times, double dt,
                           std::uint64_t master_seed, int workers, double control_dt) {
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < 0) throw std::domain_error("negative output time");
        if (i > 0 && times[i] <= times[i - 1]) throw std::domain_error("output times must increase");
    }

    SpectralTable tab;
    tab.grid = grid;
    tab.n = ensemble_size;
    const int d = grid.d;
    const int B = grid.keep;
    const int W = 2 * B + 1;
    std::size_t nmodes = 1;
    for (int a = 0; a < d; ++a) nmodes *= static_cast<std::size_t>(W);
    tab.ks.resize(nmodes);
    for (std::size_t m = 0; m < nmodes; ++m) {
        std::vector<int> k(d);
        std::size_t idx = m;
        for (int a = d - 1; a >= 0; --a) {
            k[a] = static_cast<int>(idx % W) - B;
            idx /= W;
        }
        tab.ks[m] = k;
    }

    // actual times: each interval uses an integer number of equal steps
    const std::size_t T = times.size();
    tab.times = times;

    StrangStepper stepper{params};
    const std::size_t L = 2 * T * nmodes; // density then delta, per time

    auto job = [&](std::size_t r, double* out) {
        std::uint64_t seed = stream_seed(master_seed, r);
        FourierField u;
        try {
            u = sample_initial_data(params, grid, profile, seed);
        } catch (const std::exception& e) {
            throw std::runtime_error("seed " + std::to_string(seed) + ": " + e.what());
        }
        std::vector<double> dens0(nmodes);
        int kk[8];
        auto record_density = [&](const FourierField& f, std::vector<double>& dens) {
            for (std::size_t m = 0; m < nmodes; ++m) {
                for (int a = 0; a < d; ++a) kk[a] = tab.ks[m][a];
                dens[m] = std::norm(f.at(kk));
            }
        };
        record_density(u, dens0);
        // mean-zero control variate 2 Re(conj(uhat^0) uhat^1) per time/mode
        std::vector<double> control(T * nmodes, 0.0);
        if (control_dt > 0.0 && params.lambda != 0.0) {
            const IterateSet it = compute_iterates(params, u, 1, times, control_dt);
            for (std::size_t ti = 0; ti < T; ++ti)
                for (std::size_t m = 0; m < nmodes; ++m) {
                    for (int a = 0; a < d; ++a) kk[a] = tab.ks[m][a];
                    control[ti * nmodes + m] =
                        2.0 * std::real(std::conj(it.u[0][ti].at(kk)) * it.u[1][ti].at(kk));
                }
        }
        double tcur = 0;
        std::vector<double> dens(nmodes);
        for (std::size_t ti = 0; ti < T; ++ti) {
            double target = times[ti];
            if (target > tcur) u = stepper.evolve(u, target - tcur, dt);
            tcur = target;
            record_density(u, dens);
            for (std::size_t m = 0; m < nmodes; ++m) {
                out[ti * nmodes + m] = dens[m];
                out[(T + ti) * nmodes + m] = dens[m] - dens0[m] - control[ti * nmodes + m];
            }
            if (!std::isfinite(dens[0]))
                throw std::runtime_error("seed " + std::to_string(seed) + ": non-finite state");
        }
    };

    EnsembleStats st = run_ensemble_stats(ensemble_size, L, workers, job);

    tab.mean_density.resize(T);
    tab.se_density.resize(T);
    tab.mean_delta.resize(T);
    tab.se_delta.resize(T);
    for (std::size_t ti = 0; ti < T; ++ti) {
        tab.mean_density[ti].assign(st.mean.begin() + ti * nmodes, st.mean.begin() + (ti + 1) * nmodes);
        tab.se_density[ti].assign(st.std_error.begin() + ti * nmodes, st.std_error.begin() + (ti + 1) * nmodes);
        tab.mean_delta[ti].assign(st.mean.begin() + (T + ti) * nmodes, st.mean.begin() + (T + ti + 1) * nmodes);
        tab.se_delta[ti].assign(st.std_error.begin() + (T + ti) * nmodes, st.std_error.begin() + (T + ti + 1) * nmodes);
    }
    return tab;
}

} // namespace lab
