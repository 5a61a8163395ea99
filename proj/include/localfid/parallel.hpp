#pragma once

#include <cstddef>
#include <exception>
#include <utility>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace localfid {

// Execution policy for the data-parallel kernels. Every kernel writes
// per-task results into its own slot and reduces in index order, so the two
// policies produce bitwise-identical results; the serial path is kept as the
// reference implementation for the consistency tests and the benchmark.
enum class Exec { serial, openmp };

Exec default_exec();
void set_default_exec(Exec exec);

int hardware_threads();

// Runs body(0), ..., body(n-1). Under openmp the iterations run on all
// available threads; exceptions are captured per task and the first one (in
// index order) is rethrown after the parallel region ends.
template <class F>
void for_each_index(Exec exec, std::size_t n, F&& body) {
#ifdef _OPENMP
  if (exec == Exec::openmp && n > 1) {
    std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (errors[i]) std::rethrow_exception(errors[i]);
    }
    return;
  }
#else
  (void)exec;
#endif
  for (std::size_t i = 0; i < n; ++i) body(i);
}

}  // namespace localfid
