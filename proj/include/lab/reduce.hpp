// Deterministic parallel ensemble reduction.
//
// Realizations are merged in index order into fixed-size chunks (chunk size
// is a constant, independent of worker count), and chunk partial sums are
// combined by pairwise summation in chunk order. The floating-point result
// is therefore identical for any number of workers.
#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace lab {

struct EnsembleStats {
    std::vector<double> mean;
    std::vector<double> std_error; // empty/NaN entries when n == 1
    std::size_t n = 0;
};

// Run fn(r, out) for r = 0..R-1 (out has length L), with `workers` threads,
// and return per-component mean and standard error of the mean. Exceptions in
// fn abort the run and are rethrown tagged with the realization index.
EnsembleStats run_ensemble_stats(std::size_t R, std::size_t L, int workers,
                                 const std::function<void(std::size_t, double*)>& fn);

// Pairwise (tree) summation in index order.
double pairwise_sum(const double* x, std::size_t n);

} // namespace lab
