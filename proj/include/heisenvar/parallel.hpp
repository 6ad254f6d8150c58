#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace heisenvar {

// Global worker count.  0 = hardware concurrency.  The HEISENVAR_THREADS
// environment variable is the fallback when nothing was set explicitly.
void set_thread_count(int n);
int thread_count();

// Static partition of [0, n) into contiguous chunks, one per worker.
// fn(begin, end) must be safe to run concurrently on disjoint ranges.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

// Deterministic blocked pairwise sum: the result depends only on the data,
// not on the thread count.  Blocks of 4096 are reduced pairwise and the block
// sums are combined in index order.
double pairwise_sum(const double* data, std::size_t n);

// Same reduction over f(i) without materializing the array per call site.
double pairwise_sum_indexed(std::size_t n, const std::function<double(std::size_t)>& f);

// Parallel deterministic sum of f(i) over [0, n): each worker reduces whole
// blocks; block sums are combined sequentially.
double parallel_sum(std::size_t n, const std::function<double(std::size_t)>& f);

}  // namespace heisenvar
