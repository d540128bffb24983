// Physical parameter bundle: the high-frequency parameter eps, the coupling
// exponent gamma (lambda = eps^-gamma), and the derived time scales
//   t_lin    = eps^2            (linear/dispersive time)
//   t_nonlin = 1/lambda^2       (nonlinear time)
//   t_kin    = 1/(eps^2 lambda^4)  (kinetic transfer time)
// For 0 < gamma < 1/2 these are strictly ordered t_lin < t_nonlin < t_kin.
#pragma once

#include <stdexcept>

namespace lab {

struct PhysicalParams {
    int d = 2;           // spatial dimension, >= 2
    double eps = 1.0;    // high-frequency parameter in (0,1]
    double gamma = 0.0;  // coupling exponent in (0,1/2); NaN when built from lambda
    double lambda = 1.0; // coupling strength
    double t_kin = 1.0;
    double t_lin = 1.0;
    double t_nonlin = 1.0;
};

// Construct from (eps, gamma); lambda = eps^-gamma.
PhysicalParams make_params(int d, double eps, double gamma);

// Construct from (eps, lambda) directly (lambda >= 0 allowed; lambda = 0 is
// the free evolution and has infinite t_nonlin/t_kin).
PhysicalParams make_params_lambda(int d, double eps, double lambda);

} // namespace lab
