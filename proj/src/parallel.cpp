#include "diolab/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace diolab {

namespace {
std::atomic<int> g_threads{0};
}

int default_threads() {
    if (int t = g_threads.load(); t > 0) return t;
    if (const char* env = std::getenv("DIOLAB_THREADS")) {
        try {
            int t = std::stoi(env);
            if (t > 0) return t;
        } catch (...) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void set_default_threads(int threads) { g_threads.store(std::max(0, threads)); }

int resolve_threads(int requested) { return requested > 0 ? requested : default_threads(); }

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
    int t = std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(count, 1));
    if (t <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lk(err_mu);
                if (!err) err = std::current_exception();
                next.store(count);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int k = 0; k < t; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace diolab
