#pragma once

#include <cstdint>

namespace sgst {

// Global worker cap (0 = hardware default). Applied to the OpenMP regions
// below. Every parallel loop in the engine writes disjoint outputs with a
// fixed per-element accumulation order, so results do not depend on the
// thread count.
void set_thread_cap(int n);
int thread_cap();

// parallel_for(begin, end, fn): fn(i) for i in [begin, end), any order.
void parallel_for(int64_t begin, int64_t end, const void* tag, void (*fn)(int64_t, const void*));

template <typename F>
void parallel_for(int64_t begin, int64_t end, const F& fn) {
    parallel_for(begin, end, static_cast<const void*>(&fn),
                 [](int64_t i, const void* f) { (*static_cast<const F*>(f))(i); });
}

}  // namespace sgst
