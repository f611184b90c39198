#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace fgradar {

/// Splits [0, n) into at most `threads` contiguous chunks and calls body(chunk, begin, end)
/// for each. Chunk boundaries depend only on n and threads.
template <typename Body>
void parallel_chunks(std::size_t n, unsigned threads, Body&& body) {
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, n));
    if (workers <= 1) {
        body(std::size_t{0}, std::size_t{0}, n);
        return;
    }
    const std::size_t step = (n + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t b = w * step;
        const std::size_t e = std::min(n, b + step);
        if (b >= e) break;
        pool.emplace_back([&body, w, b, e] { body(w, b, e); });
    }
    for (auto& t : pool) t.join();
}

/// Number of chunks parallel_chunks will use.
inline std::size_t chunk_count(std::size_t n, unsigned threads) {
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, n));
    if (workers <= 1) return 1;
    const std::size_t step = (n + workers - 1) / workers;
    return (n + step - 1) / step;
}

}  // namespace fgradar
