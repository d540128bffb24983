// Torus grid and spectral fields.
//
// Functions live on the torus [0,2pi)^d. A field is stored by its Fourier
// coefficients on the centered integer lattice |k|_inf <= K = (M-1)/2 (M odd),
// under the symmetric transform convention
//     f(x) = (2pi)^{-d/2} sum_k fhat(k) e^{ik.x},
// so Parseval reads ||f||_{L2}^2 = sum_k |fhat(k)|^2 and a plane wave
// e^{ik0.x} has a single coefficient of modulus (2pi)^{d/2}.
//
// `keep` is the dealias band: products of three keep-band fields cannot alias
// back into the keep band as long as M >= 4*keep+1 (cubic generalization of
// the 3/2 rule; a "factor 2" pad relative to the data band).
#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace lab {

using cd = std::complex<double>;

struct TorusGrid {
    int d = 2;       // dimension
    int M = 1;       // odd number of modes per axis
    int K = 0;       // (M-1)/2, largest representable |k| per axis
    int keep = 0;    // dealias band, keep <= K
    double eps = 1.; // owning params' eps (for k <-> eps*k bookkeeping)

    std::size_t size() const; // M^d
    // Row-major flat index of lattice point k (each component in [-K,K]).
    std::size_t index(const int* k) const;
    // Inverse of index(): decode flat index into lattice coordinates.
    void decode(std::size_t idx, int* k) const;
};

// Build a grid and check that the data profile band r/eps fits inside the
// keep band (throws std::domain_error otherwise). keep defaults to (M-1)/4.
TorusGrid make_grid(int d, int M, double eps, double support_radius, int keep = -1);

// Smallest FFT-friendly odd M with keep band >= margin * support_radius/eps.
int auto_modes(double eps, double support_radius, double margin = 1.0);

struct FourierField {
    TorusGrid grid;
    std::vector<cd> c; // size grid.size(), centered row-major layout

    explicit FourierField(const TorusGrid& g) : grid(g), c(g.size()) {}
    FourierField() = default;

    cd at(const int* k) const { return c[grid.index(k)]; }
    cd& at(const int* k) { return c[grid.index(k)]; }
    double l2_norm_sq() const; // sum |c|^2 = ||f||_{L2}^2
};

// Pointwise complex conjugate of the physical field: (conj f)^(k) = conj(fhat(-k)).
FourierField conjugate_field(const FourierField& f);

// Transforms between M^d physical samples at x_j = 2pi j / M (row-major j)
// and spectral coefficients, in the symmetric convention above.
FourierField forward_transform(const std::vector<cd>& samples, const TorusGrid& g);
std::vector<cd> inverse_transform(const FourierField& f);

// Padded variants used for alias-free products: embed the field in a P^d grid
// (P >= M), return physical samples there; and transform P^d samples back,
// truncating to the target grid's lattice.
std::vector<cd> to_physical_padded(const FourierField& f, int P);
FourierField from_physical_padded(const std::vector<cd>& samples, int P, const TorusGrid& target);

// Zero all coefficients with |k|_inf > band.
void project_band(FourierField& f, int band);

} // namespace lab
