// parallel.hpp — Data-parallel loops and order-stable reductions

#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <thread>
#include <vector>

namespace zeno {

// Worker count: explicit request, else ZENO_THREADS, else hardware concurrency.
unsigned resolve_thread_count(unsigned requested = 0);

// Runs body(begin, end) over contiguous chunks of [0, n). Chunks are
// independent; results must not depend on the partition.
template <typename Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body) {
    if (n == 0) return;
    const std::size_t workers = std::min<std::size_t>(threads == 0 ? 1 : threads, n);
    if (workers <= 1) {
        body(std::size_t{0}, n);
        return;
    }
    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&body, begin, end] { body(begin, end); });
    }
    body(std::size_t{0}, std::min(n, chunk));
}

// Pairwise (tree) summation. The association order depends only on the
// length of the input, so sums are bit-identical for any thread count.
double pairwise_sum(std::span<const double> values) noexcept;

}  // namespace zeno
