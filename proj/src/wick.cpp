#include "lab/random_data.hpp"

#include <cmath>
#include <stdexcept>

#include "lab/rng.hpp"

namespace lab {

FourierField sample_initial_data(const PhysicalParams& params, const TorusGrid& grid,
                                 const DataProfile& profile, std::uint64_t seed) {
    if (profile.support_radius / params.eps > static_cast<double>(grid.keep))
        throw std::domain_error("profile support overflows the grid's dealias band");
    FourierField f(grid);
    Rng rng(seed);
    const int d = grid.d;
    const double amp = std::pow(params.eps, 0.5 * d);
    int k[8];
    double x[8];
    // scan the full lattice in row-major order; draw a Gaussian only where the
    // profile is nonzero so the stream is stable under grid enlargement
    for (std::size_t i = 0; i < f.c.size(); ++i) {
        grid.decode(i, k);
        for (int a = 0; a < d; ++a) x[a] = params.eps * k[a];
        const double A = profile(x, d);
        if (A != 0.0) f.c[i] = amp * A * rng.next_complex_gaussian();
    }
    return f;
}

namespace {

// Recursive exhaustive matcher: pair the first unused factor with every
// compatible later factor (opposite flag, equal frequency) and recurse.
std::uint64_t count_pairings(const std::vector<std::vector<int>>& ks,
                             const std::vector<bool>& conj, std::vector<bool>& used,
                             std::size_t remaining) {
    if (remaining == 0) return 1;
    std::size_t i = 0;
    while (used[i]) ++i;
    used[i] = true;
    std::uint64_t total = 0;
    for (std::size_t j = i + 1; j < ks.size(); ++j) {
        if (used[j] || conj[j] == conj[i] || ks[j] != ks[i]) continue;
        used[j] = true;
        total += count_pairings(ks, conj, used, remaining - 2);
        used[j] = false;
    }
    used[i] = false;
    return total;
}

} // namespace

std::uint64_t wick_expectation(const std::vector<std::vector<int>>& ks,
                               const std::vector<bool>& conjugated) {
    if (ks.size() != conjugated.size())
        throw std::domain_error("wick_expectation: list length mismatch");
    if (ks.size() % 2 != 0) return 0;
    std::size_t nconj = 0;
    for (bool b : conjugated) nconj += b ? 1 : 0;
    if (2 * nconj != ks.size()) return 0; // unequal conjugated/unconjugated counts
    std::vector<bool> used(ks.size(), false);
    return count_pairings(ks, conjugated, used, ks.size());
}

} // namespace lab
