#pragma once

#include <exception>
#include <utility>

namespace dn {

// worker cap: DISSIPNET_THREADS if set, else hardware parallelism
int max_threads();

enum class Exec { Serial, Parallel };

// f(i) over i in [0, n); Parallel runs on OpenMP threads. Exceptions are
// captured and rethrown on the calling thread (first one wins).
template <class F>
void parallel_for(int n, Exec exec, F&& f);

namespace detail {
void run_parallel(int n, int n_threads, void* ctx, void (*call)(void*, int),
                  std::exception_ptr& err);
}

template <class F>
void parallel_for(int n, Exec exec, F&& f) {
  int nt = exec == Exec::Parallel ? max_threads() : 1;
  if (nt <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::exception_ptr err;
  auto call = [](void* ctx, int i) { (*static_cast<F*>(ctx))(i); };
  detail::run_parallel(n, nt, &f, call, err);
  if (err) std::rethrow_exception(err);
}

}  // namespace dn
