#include "sar3d/parallel.hpp"

#include <algorithm>

namespace sar3d {

namespace {
std::size_t g_threads = std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

std::size_t num_threads() { return g_threads; }

void set_num_threads(std::size_t n) { g_threads = std::max<std::size_t>(1, n); }

namespace detail {

void run_chunks(std::size_t n_chunks, const std::function<void(std::size_t)>& body) {
    const std::size_t workers = std::min(g_threads, n_chunks);
    if (workers <= 1) {
        for (std::size_t c = 0; c < n_chunks; ++c) body(c);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t c = next.fetch_add(1);
            if (c >= n_chunks) return;
            body(c);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
}

} // namespace detail
} // namespace sar3d
