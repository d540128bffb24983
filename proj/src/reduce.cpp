#include "lab/reduce.hpp"

#include <atomic>
#include <cmath>
#include <condition_variable>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

namespace lab {

double pairwise_sum(const double* x, std::size_t n) {
    if (n == 0) return 0.0;
    if (n == 1) return x[0];
    std::size_t half = n / 2;
    return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

namespace {

constexpr std::size_t kChunk = 8; // fixed; determinism requires independence from workers

void pairwise_combine(std::vector<std::vector<double>>& chunks, std::size_t lo, std::size_t hi,
                      std::vector<double>& out) {
    if (hi - lo == 1) {
        out = chunks[lo];
        return;
    }
    std::size_t mid = lo + (hi - lo) / 2;
    std::vector<double> left, right;
    pairwise_combine(chunks, lo, mid, left);
    pairwise_combine(chunks, mid, hi, right);
    out.resize(left.size());
    for (std::size_t i = 0; i < left.size(); ++i) out[i] = left[i] + right[i];
}

} // namespace

EnsembleStats run_ensemble_stats(std::size_t R, std::size_t L, int workers,
                                 const std::function<void(std::size_t, double*)>& fn) {
    if (R == 0) throw std::domain_error("ensemble size must be >= 1");
    if (workers < 1) workers = 1;

    std::vector<std::vector<double>> chunk_sum, chunk_sumsq;
    std::mutex mtx;
    std::condition_variable cv;
    std::map<std::size_t, std::vector<double>> pending;
    std::size_t cursor = 0; // next realization index to merge
    std::vector<double> cur_sum(L, 0.0), cur_sumsq(L, 0.0);
    std::size_t cur_count = 0;
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::string fail_msg;

    auto merge_ready = [&](std::unique_lock<std::mutex>&) {
        auto it = pending.find(cursor);
        while (it != pending.end()) {
            const std::vector<double>& v = it->second;
            for (std::size_t i = 0; i < L; ++i) {
                cur_sum[i] += v[i];
                cur_sumsq[i] += v[i] * v[i];
            }
            pending.erase(it);
            ++cursor;
            if (++cur_count == kChunk || cursor == R) {
                chunk_sum.push_back(cur_sum);
                chunk_sumsq.push_back(cur_sumsq);
                std::fill(cur_sum.begin(), cur_sum.end(), 0.0);
                std::fill(cur_sumsq.begin(), cur_sumsq.end(), 0.0);
                cur_count = 0;
            }
            it = pending.find(cursor);
        }
    };

    auto work = [&]() {
        std::vector<double> buf(L);
        for (;;) {
            if (failed.load()) return;
            std::size_t r = next.fetch_add(1);
            if (r >= R) return;
            try {
                fn(r, buf.data());
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lk(mtx);
                if (!failed.exchange(true))
                    fail_msg = "realization " + std::to_string(r) + " failed: " + e.what();
                cv.notify_all();
                return;
            }
            std::unique_lock<std::mutex> lk(mtx);
            // bound memory: wait until we are close to the merge cursor
            cv.wait(lk, [&] { return failed.load() || r < cursor + 4 * kChunk * static_cast<std::size_t>(workers) + kChunk; });
            if (failed.load()) return;
            pending.emplace(r, buf);
            merge_ready(lk);
            cv.notify_all();
        }
    };

    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (failed.load()) throw std::runtime_error(fail_msg);

    std::vector<double> total_sum, total_sumsq;
    pairwise_combine(chunk_sum, 0, chunk_sum.size(), total_sum);
    pairwise_combine(chunk_sumsq, 0, chunk_sumsq.size(), total_sumsq);

    EnsembleStats st;
    st.n = R;
    st.mean.resize(L);
    st.std_error.resize(L);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < L; ++i) {
        st.mean[i] = total_sum[i] / static_cast<double>(R);
        if (R > 1) {
            double var = (total_sumsq[i] - R * st.mean[i] * st.mean[i]) / static_cast<double>(R - 1);
            if (var < 0) var = 0;
            st.std_error[i] = std::sqrt(var / static_cast<double>(R));
        } else {
            st.std_error[i] = nan;
        }
    }
    return st;
}

} // namespace lab
