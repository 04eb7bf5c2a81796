#include "sgst/parallel.hpp"

#include <omp.h>

#include <algorithm>

namespace sgst {

namespace {
int g_cap = 0;
}

void set_thread_cap(int n) { g_cap = std::max(0, n); }

int thread_cap() { return g_cap; }

void parallel_for(int64_t begin, int64_t end, const void* tag, void (*fn)(int64_t, const void*)) {
    const int64_t n = end - begin;
    if (n <= 0) return;
    int threads = g_cap > 0 ? g_cap : omp_get_max_threads();
    threads = static_cast<int>(std::min<int64_t>(threads, n));
    if (threads <= 1 || n == 1) {
        for (int64_t i = begin; i < end; ++i) fn(i, tag);
        return;
    }
#pragma omp parallel for num_threads(threads) schedule(static)
    for (int64_t i = begin; i < end; ++i) fn(i, tag);
}

}  // namespace sgst
