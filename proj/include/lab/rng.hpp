// Deterministic random number generation.
//
// A single 64-bit master seed drives everything. Per-realization streams are
// derived by the documented splitting rule
//     stream_seed(master, r) = splitmix64(master + GOLDEN * (r+1))
// and each stream is a splitmix64 sequence. Gaussians use an explicit
// Box-Muller so results are bit-reproducible across standard libraries.
#pragma once

#include <complex>
#include <cstdint>

namespace lab {

std::uint64_t splitmix64(std::uint64_t& state);

struct Rng {
    std::uint64_t state;

    explicit Rng(std::uint64_t seed) : state(seed) {}
    std::uint64_t next_u64() { return splitmix64(state); }
    // uniform in [0,1) with 53-bit resolution
    double next_uniform() { return (next_u64() >> 11) * 0x1.0p-53; }
    // pair of independent standard real normals (Box-Muller)
    void next_gaussian_pair(double& g1, double& g2);
    // standard complex Gaussian G = (X+iY)/sqrt(2), E|G|^2 = 1
    std::complex<double> next_complex_gaussian();
};

// Stream seed for realization r under the given master seed.
std::uint64_t stream_seed(std::uint64_t master, std::uint64_t r);

} // namespace lab
