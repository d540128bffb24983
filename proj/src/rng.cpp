#include "lab/rng.hpp"

#include <cmath>

namespace lab {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t stream_seed(std::uint64_t master, std::uint64_t r) {
    std::uint64_t s = master + 0x9e3779b97f4a7c15ULL * (r + 1);
    return splitmix64(s);
}

void Rng::next_gaussian_pair(double& g1, double& g2) {
    // Box-Muller on (0,1] x [0,1)
    double u1 = 1.0 - next_uniform();
    double u2 = next_uniform();
    double rad = std::sqrt(-2.0 * std::log(u1));
    double ang = 2.0 * M_PI * u2;
    g1 = rad * std::cos(ang);
    g2 = rad * std::sin(ang);
}

std::complex<double> Rng::next_complex_gaussian() {
    double x, y;
    next_gaussian_pair(x, y);
    return std::complex<double>(x * M_SQRT1_2, y * M_SQRT1_2);
}

} // namespace lab
