#include "localfid/parallel.hpp"

#include <atomic>

namespace localfid {

namespace {
std::atomic<Exec> g_exec{Exec::openmp};
}

Exec default_exec() { return g_exec.load(); }

void set_default_exec(Exec exec) { g_exec.store(exec); }

int hardware_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace localfid
