#include "lab/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "lab/errors.hpp"

namespace lab {

std::complex<double> exp_divided_difference(double t, const std::vector<double>& b) {
    const int m = static_cast<int>(b.size());
    if (m == 0) return 0.0;
    if (m == 1) return std::exp(std::complex<double>(0.0, -t * b[0]));
    // Opitz: f[b_0..b_{m-1}] is the (0, m-1) entry of f applied to the
    // bidiagonal matrix with diagonal b and unit superdiagonal.
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(m, m);
    const std::complex<double> mit(0.0, -t);
    for (int i = 0; i < m; ++i) {
        A(i, i) = mit * b[i];
        if (i + 1 < m) A(i, i + 1) = mit;
    }
    Eigen::MatrixXcd E = A.exp();
    return E(0, m - 1);
}

std::complex<double> time_simplex_integral(double t, const std::vector<double>& omega) {
    const int n = static_cast<int>(omega.size());
    // nodes b_j = sum of the omegas strictly above layer j (b_n = 0)
    std::vector<double> b(n + 1, 0.0);
    for (int j = n - 1; j >= 0; --j) b[j] = b[j + 1] + omega[j];
    std::complex<double> in(0.0, 1.0), pw(1.0, 0.0);
    for (int j = 0; j < n; ++j) pw *= in;
    return pw * exp_divided_difference(t, b);
}

namespace {

using cd = std::complex<double>;

// Gauss 7 / Kronrod 15 nodes and weights on [-1, 1].
const double kron_x[8] = {0.991455371120813, 0.949107912342759, 0.864864423359769,
                          0.741531185599394, 0.586087235467691, 0.405845151377397,
                          0.207784955007898, 0.0};
const double kron_w[8] = {0.022935322010529, 0.063092092629979, 0.104790010322250,
                          0.140653259715525, 0.169004726639267, 0.190350578064785,
                          0.204432940075298, 0.209482141084728};
const double gauss_w[4] = {0.129484966168870, 0.279705391489277, 0.381830050505119,
                           0.417959183673469};

template <typename F>
void gk15(const F& f, double a, double b, cd& kron, double& err) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    cd vals[15];
    for (int i = 0; i < 7; ++i) {
        vals[i] = f(c - h * kron_x[i]);
        vals[14 - i] = f(c + h * kron_x[i]);
    }
    vals[7] = f(c);
    cd k(0.0, 0.0), g(0.0, 0.0);
    for (int i = 0; i < 7; ++i) k += kron_w[i] * (vals[i] + vals[14 - i]);
    k += kron_w[7] * vals[7];
    for (int i = 0; i < 3; ++i) g += gauss_w[i] * (vals[2 * i + 1] + vals[13 - 2 * i]);
    g += gauss_w[3] * vals[7];
    kron = h * k;
    err = std::abs(h * (k - g));
}

// int_A^inf e^{-i alpha t} alpha^{-q} d alpha by repeated integration by parts;
// the step ratio is ~ q/(tA), kept small by the caller's choice of A.
cd tail_power_integral(double A, double t, int q) {
    const cd it(0.0, t);
    cd term = std::exp(cd(0.0, -A * t)) * std::pow(A, -q) / it;
    cd sum = term;
    for (int j = 0; j < 40; ++j) {
        term *= -double(q + j) / (it * A);
        sum += term;
        if (std::abs(term) < 1e-18 * (1.0 + std::abs(sum))) break;
    }
    return sum;
}

} // namespace

std::complex<double> resolvent_layer_integral(double t, const std::vector<double>& e, double eta,
                                              double tol) {
    if (t <= 0.0) throw std::domain_error("resolvent integral needs t > 0");
    if (eta <= 0.0) throw std::domain_error("resolvent integral needs eta > 0");
    const int m = static_cast<int>(e.size());
    if (m == 0) throw std::domain_error("resolvent integral needs at least one node");

    double maxe = 0.0;
    for (double x : e) maxe = std::max(maxe, std::abs(x));
    // Large enough that (a) every pole magnitude is <= alpha_max/10, so the
    // large-alpha expansion converges geometrically, and (b) t*alpha_max >= 400,
    // so the by-parts tail recursion contracts.
    const double A = std::max({10.0 * maxe + 10.0 / eta, 10.0 * (maxe + eta), 400.0 / t});

    auto f = [&](double a) {
        cd p(1.0, 0.0);
        for (double ej : e) p *= cd(0.0, 1.0) / cd(a - ej, eta);
        return cd(std::cos(a * t), -std::sin(a * t)) * p;
    };

    // adaptive Gauss-Kronrod over [-A, A]
    struct Seg {
        double a, b;
        cd val;
        double err;
    };
    std::vector<Seg> stack;
    auto push = [&](double a, double b) {
        Seg s{a, b, 0.0, 0.0};
        gk15(f, a, b, s.val, s.err);
        stack.push_back(s);
    };
    // seed with oscillation-scale panels so the error estimate is meaningful
    const int seed = std::max(16, std::min(1024, int(t * A / 4.0)));
    for (int i = 0; i < seed; ++i) push(-A + 2.0 * A * i / seed, -A + 2.0 * A * (i + 1) / seed);
    cd mid(0.0, 0.0);
    std::size_t work = 0;
    while (!stack.empty()) {
        Seg s = stack.back();
        stack.pop_back();
        if (s.err <= tol * (s.b - s.a) / (2.0 * A) || (s.b - s.a) < 1e-13 * A) {
            mid += s.val;
            continue;
        }
        if (++work > 200000)
            throw numeric_error("resolvent quadrature did not converge: interval budget "
                                "exceeded at tol " +
                                std::to_string(tol));
        const double c = 0.5 * (s.a + s.b);
        push(s.a, c);
        push(c, s.b);
    }

    // analytic tails: prod_j i/(alpha - z_j) = i^m sum_r h_r alpha^{-m-r} with
    // z_j = e_j - i eta and h_r the complete homogeneous symmetric polynomials
    std::vector<cd> h(17, cd(0.0, 0.0));
    h[0] = 1.0;
    for (double ej : e) {
        const cd z(ej, -eta);
        for (std::size_t r = 1; r < h.size(); ++r) h[r] += z * h[r - 1];
    }
    cd im(1.0, 0.0);
    for (int j = 0; j < m; ++j) im *= cd(0.0, 1.0);
    cd tail_r(0.0, 0.0), tail_l(0.0, 0.0);
    double sgn = (m % 2 == 0) ? 1.0 : -1.0;
    for (std::size_t r = 0; r < h.size(); ++r) {
        if (std::abs(h[r]) * std::pow(A, -double(m + int(r))) < 1e-18) continue;
        const cd Tq = tail_power_integral(A, t, m + static_cast<int>(r));
        tail_r += im * h[r] * Tq;
        // alpha -> -alpha: int_{-inf}^{-A} = (-1)^m i^m sum_r (-1)^r h_r conj(T_q)
        tail_l += sgn * (r % 2 == 0 ? 1.0 : -1.0) * im * h[r] * std::conj(Tq);
    }

    return (mid + tail_r + tail_l) * std::exp(eta * t) / (2.0 * M_PI);
}

} // namespace lab
