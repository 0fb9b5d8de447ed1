// Index-parallel loop over independent work items, with a serial path kept
// as the reference implementation.
#pragma once

#include <cstddef>
#include <exception>

namespace ehsc {

/// Calls fn(i) for i in [0, n). Exceptions thrown by fn are rethrown on the
/// calling thread (the first one by index wins in the serial path).
template <class Fn> void for_each_index(std::size_t n, bool parallel, Fn&& fn) {
    if (!parallel) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::exception_ptr error;
    const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        try {
            fn(static_cast<std::size_t>(i));
        } catch (...) {
#pragma omp critical(ehsc_for_each_index)
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
}

} // namespace ehsc
