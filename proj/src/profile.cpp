#include "lab/profile.hpp"

#include <cmath>

namespace lab {

DataProfile default_bump() {
    DataProfile p;
    p.support_radius = 1.0;
    p.A = [](const double* x, int d) {
        double r2 = 0;
        for (int a = 0; a < d; ++a) r2 += x[a] * x[a];
        if (r2 >= 1.0) return 0.0;
        // exp(1 + 1/(r2-1)): equals 1 at the origin, vanishes smoothly at |x|=1
        return std::exp(1.0 + 1.0 / (r2 - 1.0));
    };
    return p;
}

DataProfile plateau(double c, double r) {
    DataProfile p;
    p.support_radius = r;
    p.A = [c, r](const double* x, int d) {
        double r2 = 0;
        for (int a = 0; a < d; ++a) r2 += x[a] * x[a];
        return (r2 < r * r) ? c : 0.0;
    };
    return p;
}

} // namespace lab
