// Gaussian random initial fields and the exact pairing oracle for moments of
// Gaussian monomials.
//
// Initial data: uhat0(k) = eps^{d/2} A(eps k) G(k), with G(k) iid standard
// centred complex Gaussians; so E|uhat0(k)|^2 = eps^d |A(eps k)|^2 and
// E||u0||_{L2}^2 = eps^d sum_k |A(eps k)|^2 (approximately ||A||_{L2(R^d)}^2).
#pragma once

#include <cstdint>
#include <vector>

#include "lab/grid.hpp"
#include "lab/params.hpp"
#include "lab/profile.hpp"

namespace lab {

// Draw one random initial field. Deterministic given the seed: Gaussians are
// consumed in row-major lattice order over the profile's support band.
FourierField sample_initial_data(const PhysicalParams& params, const TorusGrid& grid,
                                 const DataProfile& profile, std::uint64_t seed);

// Exact count of admissible pairings for E[prod G(k_i)^{(*)}]: partitions of
// the indices into pairs {i,j} with opposite conjugation flags and k_i = k_j.
// For standard complex Gaussians this count IS the expectation.
// ks[i] is the d-dimensional integer frequency of factor i.
std::uint64_t wick_expectation(const std::vector<std::vector<int>>& ks,
                               const std::vector<bool>& conjugated);

} // namespace lab
