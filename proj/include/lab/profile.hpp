// Data profile A: smooth, real, compactly supported amplitude envelope on
// R^d. The initial spectrum is |A(eps*k)|^2 on the integer lattice.
#pragma once

#include <functional>

namespace lab {

struct DataProfile {
    std::function<double(const double* x, int d)> A; // real-valued
    double support_radius = 1.0;                     // A(x)=0 for |x| > support_radius

    double operator()(const double* x, int d) const { return A(x, d); }
};

// Default profile: radial bump exp(1/(|x|^2-1)) on |x|<1, scaled so A(0)=1.
DataProfile default_bump();

// Constant profile c on |x| < r (discontinuous; test helper only).
DataProfile plateau(double c, double r);

} // namespace lab
