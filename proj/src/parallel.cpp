#include "irt/parallel.hpp"

#include <atomic>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace irt {

namespace {

std::atomic<int> g_thread_override{0};

int env_cap() {
    static const int cap = [] {
        if (const char* env = std::getenv("IRT_ARENA_THREADS")) {
            const int n = std::atoi(env);
            if (n > 0) return n;
        }
        return 0;
    }();
    return cap;
}

} // namespace

int thread_count() {
    const int forced = g_thread_override.load(std::memory_order_relaxed);
    if (forced > 0) return forced;
    const int cap = env_cap();
#ifdef _OPENMP
    const int hw = omp_get_max_threads();
#else
    const int hw = 1;
#endif
    if (cap > 0 && cap < hw) return cap;
    return hw > 0 ? hw : 1;
}

void set_thread_count(int n) {
    g_thread_override.store(n > 0 ? n : 0, std::memory_order_relaxed);
}

} // namespace irt
