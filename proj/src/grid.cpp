#include "lab/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>

namespace lab {

std::size_t TorusGrid::size() const {
    std::size_t s = 1;
    for (int a = 0; a < d; ++a) s *= static_cast<std::size_t>(M);
    return s;
}

std::size_t TorusGrid::index(const int* k) const {
    std::size_t idx = 0;
    for (int a = 0; a < d; ++a) idx = idx * M + static_cast<std::size_t>(k[a] + K);
    return idx;
}

void TorusGrid::decode(std::size_t idx, int* k) const {
    for (int a = d - 1; a >= 0; --a) {
        k[a] = static_cast<int>(idx % M) - K;
        idx /= M;
    }
}

TorusGrid make_grid(int d, int M, double eps, double support_radius, int keep) {
    if (d < 2) throw std::domain_error("grid dimension must be >= 2");
    if (M < 3 || M % 2 == 0) throw std::domain_error("modes_per_dim must be odd and >= 3");
    TorusGrid g;
    g.d = d;
    g.M = M;
    g.K = (M - 1) / 2;
    g.keep = (keep < 0) ? (M - 1) / 4 : keep;
    if (g.keep > g.K) throw std::domain_error("keep band exceeds grid band");
    g.eps = eps;
    if (support_radius / eps > static_cast<double>(g.keep))
        throw std::domain_error("data profile band " + std::to_string(support_radius / eps) +
                                " does not fit the dealias band " + std::to_string(g.keep));
    return g;
}

int auto_modes(double eps, double support_radius, double margin) {
    int band = static_cast<int>(std::ceil(margin * support_radius / eps));
    if (band < 1) band = 1;
    int M = 4 * band + 1;
    // prefer 7-smooth odd sizes for FFT speed
    auto smooth = [](int n) {
        for (int p : {2, 3, 5, 7})
            while (n % p == 0) n /= p;
        return n == 1;
    };
    while (M % 2 == 0 || !smooth(M)) ++M;
    return M;
}

double FourierField::l2_norm_sq() const {
    double s = 0;
    for (const cd& z : c) s += std::norm(z);
    return s;
}

FourierField conjugate_field(const FourierField& f) {
    FourierField out(f.grid);
    const int d = f.grid.d;
    int k[8], mk[8];
    for (std::size_t i = 0; i < f.c.size(); ++i) {
        f.grid.decode(i, k);
        for (int a = 0; a < d; ++a) mk[a] = -k[a];
        out.c[f.grid.index(mk)] = std::conj(f.c[i]);
    }
    return out;
}

void project_band(FourierField& f, int band) {
    const int d = f.grid.d;
    int k[8];
    for (std::size_t i = 0; i < f.c.size(); ++i) {
        f.grid.decode(i, k);
        for (int a = 0; a < d; ++a)
            if (k[a] > band || k[a] < -band) {
                f.c[i] = 0.0;
                break;
            }
    }
}

// ---------------------------------------------------------------------------
// FFTW plumbing. Plans are cached per (dims, direction) with owned buffers;
// execution copies through the plan's buffers under a lock (plan execution on
// shared buffers is not thread-safe). Planning uses FFTW_ESTIMATE so plan
// choice, and hence bit-level output, is reproducible across runs.
// ---------------------------------------------------------------------------
namespace {

struct Plan {
    fftw_plan plan = nullptr;
    fftw_complex* buf = nullptr;
    std::size_t n = 0;
    std::mutex mtx;
};

std::mutex g_cache_mtx;
std::map<std::pair<std::vector<int>, int>, Plan*> g_cache;

Plan* get_plan(const std::vector<int>& dims, int sign) {
    std::lock_guard<std::mutex> lk(g_cache_mtx);
    auto key = std::make_pair(dims, sign);
    auto it = g_cache.find(key);
    if (it != g_cache.end()) return it->second;
    Plan* p = new Plan;
    p->n = 1;
    for (int m : dims) p->n *= static_cast<std::size_t>(m);
    p->buf = fftw_alloc_complex(p->n);
    p->plan = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), p->buf, p->buf,
                            sign, FFTW_ESTIMATE);
    g_cache[key] = p;
    return p;
}

// Execute an in-place DFT of `data` (size prod(dims)) with the given sign.
void run_dft(std::vector<cd>& data, const std::vector<int>& dims, int sign) {
    Plan* p = get_plan(dims, sign);
    std::lock_guard<std::mutex> lk(p->mtx);
    std::memcpy(p->buf, data.data(), sizeof(cd) * p->n);
    fftw_execute(p->plan);
    std::memcpy(data.data(), p->buf, sizeof(cd) * p->n);
}

// Scatter centered coefficients of f into the natural-order (0..P-1 per axis)
// layout of a P^d transform buffer; and the inverse gather.
void scatter_centered(const FourierField& f, std::vector<cd>& buf, int P) {
    const int d = f.grid.d;
    int k[8];
    for (std::size_t i = 0; i < f.c.size(); ++i) {
        if (f.c[i] == cd(0.0, 0.0)) continue;
        f.grid.decode(i, k);
        std::size_t j = 0;
        for (int a = 0; a < d; ++a) {
            int q = k[a] >= 0 ? k[a] : k[a] + P;
            j = j * P + static_cast<std::size_t>(q);
        }
        buf[j] = f.c[i];
    }
}

void gather_centered(const std::vector<cd>& buf, FourierField& f, int P) {
    const int d = f.grid.d;
    int k[8];
    for (std::size_t i = 0; i < f.c.size(); ++i) {
        f.grid.decode(i, k);
        std::size_t j = 0;
        for (int a = 0; a < d; ++a) {
            int q = k[a] >= 0 ? k[a] : k[a] + P;
            j = j * P + static_cast<std::size_t>(q);
        }
        f.c[i] = buf[j];
    }
}

} // namespace

FourierField forward_transform(const std::vector<cd>& samples, const TorusGrid& g) {
    if (samples.size() != g.size()) throw std::domain_error("sample array shape mismatch");
    std::vector<int> dims(g.d, g.M);
    std::vector<cd> buf = samples;
    run_dft(buf, dims, FFTW_FORWARD);
    const double scale = std::pow(2.0 * M_PI, 0.5 * g.d) / static_cast<double>(g.size());
    for (cd& z : buf) z *= scale;
    FourierField f(g);
    gather_centered(buf, f, g.M);
    return f;
}

std::vector<cd> inverse_transform(const FourierField& f) {
    return to_physical_padded(f, f.grid.M);
}

std::vector<cd> to_physical_padded(const FourierField& f, int P) {
    if (P < f.grid.M) throw std::domain_error("pad size smaller than grid");
    const int d = f.grid.d;
    std::vector<int> dims(d, P);
    std::size_t n = 1;
    for (int a = 0; a < d; ++a) n *= static_cast<std::size_t>(P);
    std::vector<cd> buf(n, cd(0.0, 0.0));
    scatter_centered(f, buf, P);
    run_dft(buf, dims, FFTW_BACKWARD);
    const double scale = std::pow(2.0 * M_PI, -0.5 * d);
    for (cd& z : buf) z *= scale;
    return buf;
}

FourierField from_physical_padded(const std::vector<cd>& samples, int P, const TorusGrid& target) {
    const int d = target.d;
    std::size_t n = 1;
    for (int a = 0; a < d; ++a) n *= static_cast<std::size_t>(P);
    if (samples.size() != n) throw std::domain_error("sample array shape mismatch");
    std::vector<int> dims(d, P);
    std::vector<cd> buf = samples;
    run_dft(buf, dims, FFTW_FORWARD);
    const double scale = std::pow(2.0 * M_PI, 0.5 * d) / static_cast<double>(n);
    for (cd& z : buf) z *= scale;
    FourierField f(target);
    gather_centered(buf, f, P);
    return f;
}

} // namespace lab
