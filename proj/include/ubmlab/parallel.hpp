#pragma once

// Sample-parallel building blocks.
//
// Every parallel kernel here has a serial twin with identical arithmetic. The
// parallel versions distribute independent indices over OpenMP threads and
// write results by index; reductions happen afterwards with a fixed pairwise
// topology, so the output does not depend on the number of workers.

#include <cstddef>
#include <exception>
#include <mutex>
#include <span>
#include <type_traits>
#include <vector>

#include <omp.h>

namespace ubmlab::parallel {

/// Worker count: UBMLAB_WORKERS if set, otherwise the OpenMP default.
int worker_count();

/// Override the worker count for the current process (0 restores the default).
void set_worker_count(int workers);

/// Pairwise sum with a topology fixed by the length alone.
double tree_sum(std::span<const double> values);

template <class F>
auto map_indexed(std::size_t n, F&& f) -> std::vector<std::invoke_result_t<F&, std::size_t>> {
    using R = std::invoke_result_t<F&, std::size_t>;
    std::vector<R> out(n);
    std::exception_ptr first_error;
    std::size_t first_index = n;
    std::mutex guard;
    const long long count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(worker_count())
    for (long long i = 0; i < count; ++i) {
        try {
            out[static_cast<std::size_t>(i)] = f(static_cast<std::size_t>(i));
        } catch (...) {
            std::lock_guard lock(guard);
            // keep the lowest failing index so the reported error is schedule independent
            if (static_cast<std::size_t>(i) < first_index) {
                first_index = static_cast<std::size_t>(i);
                first_error = std::current_exception();
            }
        }
    }
    if (first_error) std::rethrow_exception(first_error);
    return out;
}

}  // namespace ubmlab::parallel

namespace ubmlab::serial {

template <class F>
auto map_indexed(std::size_t n, F&& f) -> std::vector<std::invoke_result_t<F&, std::size_t>> {
    std::vector<std::invoke_result_t<F&, std::size_t>> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(f(i));
    return out;
}

}  // namespace ubmlab::serial
