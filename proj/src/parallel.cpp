#include "dissipnet/parallel.hpp"

#include <omp.h>

#include <algorithm>
#include <cstdlib>

namespace dn {

int max_threads() {
  if (const char* env = std::getenv("DISSIPNET_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1, omp_get_max_threads());
}

namespace detail {

void run_parallel(int n, int n_threads, void* ctx, void (*call)(void*, int),
                  std::exception_ptr& err) {
#pragma omp parallel for num_threads(n_threads) schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    try {
      call(ctx, i);
    } catch (...) {
#pragma omp critical
      if (!err) err = std::current_exception();
    }
  }
}

}  // namespace detail

}  // namespace dn
