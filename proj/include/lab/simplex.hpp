// Exact phase integrals over ordered time simplices. The integral of
// prod_v e^{-i omega_v t_v} over 0 <= t_1 <= ... <= t_n <= t reduces, after
// passing to layer durations, to a divided difference of z -> e^{-izt} over
// the partial-sum nodes b_j = sum_{v>j} omega_v. The divided difference is
// computed through the exponential of the bidiagonal node matrix, which
// agrees with the recursive definition at distinct nodes and stays stable at
// confluent ones (the matrix exponential's internal series takes over).
#pragma once

#include <complex>
#include <vector>

namespace lab {

// Divided difference of e^{-izt} over the (possibly repeated) real nodes b.
std::complex<double> exp_divided_difference(double t, const std::vector<double>& b);

// int over {0 <= t_1 <= ... <= t_n <= t} of prod_v e^{-i omega_v t_v} dt,
// omega listed in time order (omega[0] pairs with the earliest vertex).
std::complex<double> time_simplex_integral(double t, const std::vector<double>& omega);

// The same layer integral int_{s >= 0} delta(t - sum s_j) prod_j e^{-i e_j s_j}
// evaluated through the regularized contour representation
//     (e^{eta t}/2pi) int e^{-i alpha t} prod_j i/(alpha - e_j + i eta) d alpha,
// by adaptive Gauss-Kronrod quadrature on |alpha| <= alpha_max plus analytic
// tail corrections (large-alpha expansion of the resolvent product, each power
// integrated exactly by parts). Equals i^{m-1} times the divided difference of
// e^{-izt} over the nodes e; kept as an independent evaluation path.
// Throws numeric_error if the quadrature fails to converge within budget.
std::complex<double> resolvent_layer_integral(double t, const std::vector<double>& e, double eta,
                                              double tol = 1e-10);

} // namespace lab
