#pragma once

#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace polaffini {

// Resolve a thread-count request: values < 1 mean "use all hardware threads".
inline int resolve_threads(int requested) {
    if (requested >= 1)
        return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

// Run fn(i) for i in [0, count), split into contiguous chunks, one per
// worker. Each index is visited exactly once and by exactly one worker, so
// as long as fn(i) only writes to slot i the result is independent of the
// thread count. The first exception thrown by any worker is rethrown.
template <class Fn>
void parallel_for(std::int64_t count, int threads, Fn&& fn) {
    threads = resolve_threads(threads);
    if (count <= 0)
        return;
    if (threads == 1 || count < 2 * threads) {
        for (std::int64_t i = 0; i < count; ++i)
            fn(i);
        return;
    }

    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
    const std::int64_t chunk = (count + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const std::int64_t begin = t * chunk;
        const std::int64_t end = std::min(count, begin + chunk);
        if (begin >= end)
            break;
        workers.emplace_back([&fn, &errors, t, begin, end]() {
            try {
                for (std::int64_t i = begin; i < end; ++i)
                    fn(i);
            } catch (...) {
                errors[static_cast<std::size_t>(t)] = std::current_exception();
            }
        });
    }
    for (auto& w : workers)
        w.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

}  // namespace polaffini
