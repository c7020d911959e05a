#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace sar3d {

// Deterministic data parallelism: work is cut into fixed-size chunks that do
// not depend on the worker count, and each output element is written by
// exactly one chunk. Reductions combine per-chunk partials in chunk order, so
// results are bit-identical for any number of threads.

std::size_t num_threads();
void set_num_threads(std::size_t n);

namespace detail {
constexpr std::size_t kChunk = 1024;

void run_chunks(std::size_t n_chunks, const std::function<void(std::size_t)>& body);
} // namespace detail

/// Applies fn(i) for i in [0, n); partitioning is independent of thread count.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    if (n == 0) return;
    const std::size_t n_chunks = (n + detail::kChunk - 1) / detail::kChunk;
    detail::run_chunks(n_chunks, [&](std::size_t c) {
        const std::size_t lo = c * detail::kChunk;
        const std::size_t hi = std::min(n, lo + detail::kChunk);
        for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
}

/// Chunked reduction; partials are accumulated sequentially in chunk order.
template <typename T, typename ChunkFn>
T parallel_reduce_chunks(std::size_t n, T init, ChunkFn&& chunk_fn) {
    if (n == 0) return init;
    const std::size_t n_chunks = (n + detail::kChunk - 1) / detail::kChunk;
    std::vector<T> partials(n_chunks, init);
    detail::run_chunks(n_chunks, [&](std::size_t c) {
        const std::size_t lo = c * detail::kChunk;
        const std::size_t hi = std::min(n, lo + detail::kChunk);
        partials[c] = chunk_fn(lo, hi);
    });
    T total = init;
    for (const T& p : partials) total += p;
    return total;
}

} // namespace sar3d
