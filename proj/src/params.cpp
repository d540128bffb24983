#include "lab/params.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace lab {

static void check_common(int d, double eps) {
    if (d < 2) throw std::domain_error("d must be >= 2, got " + std::to_string(d));
    if (!(eps > 0.0) || !(eps <= 1.0))
        throw std::domain_error("eps must lie in (0,1], got " + std::to_string(eps));
}

PhysicalParams make_params(int d, double eps, double gamma) {
    check_common(d, eps);
    if (!(gamma > 0.0))
        throw std::domain_error("gamma must be > 0, got " + std::to_string(gamma));
    if (!(gamma < 0.5))
        throw std::domain_error("gamma must be < 1/2, got " + std::to_string(gamma));
    PhysicalParams p = make_params_lambda(d, eps, std::pow(eps, -gamma));
    p.gamma = gamma;
    return p;
}

PhysicalParams make_params_lambda(int d, double eps, double lambda) {
    check_common(d, eps);
    if (!(lambda >= 0.0))
        throw std::domain_error("lambda must be >= 0, got " + std::to_string(lambda));
    PhysicalParams p;
    p.d = d;
    p.eps = eps;
    p.gamma = std::numeric_limits<double>::quiet_NaN();
    p.lambda = lambda;
    p.t_lin = eps * eps;
    if (lambda > 0.0) {
        p.t_nonlin = 1.0 / (lambda * lambda);
        p.t_kin = 1.0 / (eps * eps * lambda * lambda * lambda * lambda);
    } else {
        p.t_nonlin = std::numeric_limits<double>::infinity();
        p.t_kin = std::numeric_limits<double>::infinity();
    }
    return p;
}

} // namespace lab
