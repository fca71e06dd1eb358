#pragma once

#include <cstdint>

namespace auricle {

// Global worker count for batch-level loops. 1 (the default) is the serial
// mode used by the determinism tests. Parallel regions only ever write
// disjoint output ranges and all floating-point reductions stay serial, so
// results are identical for any thread count.
void set_threads(int n);
int threads();

namespace detail {

template <typename Fn>
void parallel_for_impl(std::int64_t n, int nthreads, const Fn& fn);

}  // namespace detail

template <typename Fn>
void parallel_for(std::int64_t n, const Fn& fn) {
    const int nthreads = threads();
    if (nthreads <= 1 || n <= 1) {
        for (std::int64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    detail::parallel_for_impl(n, nthreads, fn);
}

}  // namespace auricle

#ifdef _OPENMP
#include <omp.h>

namespace auricle::detail {

template <typename Fn>
void parallel_for_impl(std::int64_t n, int nthreads, const Fn& fn) {
#pragma omp parallel for schedule(static) num_threads(nthreads)
    for (std::int64_t i = 0; i < n; ++i) fn(i);
}

}  // namespace auricle::detail

#else

namespace auricle::detail {

template <typename Fn>
void parallel_for_impl(std::int64_t n, int /*nthreads*/, const Fn& fn) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
}

}  // namespace auricle::detail

#endif
