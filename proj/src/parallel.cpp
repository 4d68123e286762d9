#include "pimsim/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace pimsim {

unsigned default_thread_count() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* cap = std::getenv("PIMSIM_THREADS")) {
        try {
            long v = std::stol(cap);
            if (v >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(v));
        } catch (const std::exception&) {
            // ignore malformed caps
        }
    }
    return n;
}

void parallel_chunks(std::size_t count, unsigned threads,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
    threads = std::max(1u, threads);
    if (threads == 1 || count < 2) {
        fn(0, 0, count);
        return;
    }
    const std::size_t chunks = std::min<std::size_t>(threads, count);
    const std::size_t step = (count + chunks - 1) / chunks;
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(chunks);
    pool.reserve(chunks);
    for (std::size_t c = 0; c < chunks; ++c) {
        std::size_t begin = c * step;
        std::size_t end = std::min(count, begin + step);
        if (begin >= end) break;
        pool.emplace_back([&fn, &errors, c, begin, end] {
            try {
                fn(c, begin, end);
            } catch (...) {
                errors[c] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    // First failing chunk wins so the reported error does not depend on timing.
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace pimsim
