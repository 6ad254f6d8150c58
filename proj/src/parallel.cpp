#include "heisenvar/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>

namespace heisenvar {

namespace {
std::atomic<int> g_threads{-1};  // -1 = uninitialized

constexpr std::size_t kBlock = 4096;

int resolve_threads() {
    int t = g_threads.load();
    if (t > 0) return t;
    if (const char* env = std::getenv("HEISENVAR_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

double pairwise_block(const double* data, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += data[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_block(data, half) + pairwise_block(data + half, n - half);
}

double pairwise_block_indexed(std::size_t lo, std::size_t n,
                              const std::function<double(std::size_t)>& f) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += f(lo + i);
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_block_indexed(lo, half, f) + pairwise_block_indexed(lo + half, n - half, f);
}
}  // namespace

void set_thread_count(int n) { g_threads.store(n > 0 ? n : -1); }

int thread_count() { return resolve_threads(); }

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
    const int nt = resolve_threads();
    if (nt <= 1 || n < 2 * kBlock) {
        fn(0, n);
        return;
    }
    const std::size_t workers = static_cast<std::size_t>(nt);
    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t b = w * chunk;
        const std::size_t e = std::min(n, b + chunk);
        if (b >= e) break;
        pool.emplace_back([&fn, b, e] { fn(b, e); });
    }
    for (auto& th : pool) th.join();
}

double pairwise_sum(const double* data, std::size_t n) {
    return pairwise_sum_indexed(n, [data](std::size_t i) { return data[i]; });
}

double pairwise_sum_indexed(std::size_t n, const std::function<double(std::size_t)>& f) {
    const std::size_t nblocks = (n + kBlock - 1) / kBlock;
    if (nblocks <= 1) return pairwise_block_indexed(0, n, f);
    std::vector<double> block_sums(nblocks, 0.0);
    for (std::size_t b = 0; b < nblocks; ++b) {
        const std::size_t lo = b * kBlock;
        block_sums[b] = pairwise_block_indexed(lo, std::min(kBlock, n - lo), f);
    }
    return pairwise_block(block_sums.data(), nblocks);
}

// Identical block/combination structure to pairwise_sum_indexed, so the result
// is bit-identical for every thread count.
double parallel_sum(std::size_t n, const std::function<double(std::size_t)>& f) {
    const int nt = resolve_threads();
    const std::size_t nblocks = (n + kBlock - 1) / kBlock;
    if (nt <= 1 || nblocks < 4) return pairwise_sum_indexed(n, f);

    std::vector<double> block_sums(nblocks, 0.0);
    const std::size_t workers = static_cast<std::size_t>(nt);
    const std::size_t chunk = (nblocks + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t b0 = w * chunk;
        const std::size_t b1 = std::min(nblocks, b0 + chunk);
        if (b0 >= b1) break;
        pool.emplace_back([&, b0, b1] {
            for (std::size_t b = b0; b < b1; ++b) {
                const std::size_t lo = b * kBlock;
                block_sums[b] = pairwise_block_indexed(lo, std::min(kBlock, n - lo), f);
            }
        });
    }
    for (auto& th : pool) th.join();
    return pairwise_block(block_sums.data(), nblocks);
}

}  // namespace heisenvar
