#include "wedgeheat/parallel.hpp"

#include <cmath>
#include <exception>
#include <mutex>

#include <omp.h>

namespace wedgeheat {

namespace {
Exec g_default_exec{};
}

Exec default_exec() { return g_default_exec; }
void set_default_exec(Exec ex) { g_default_exec = ex; }

int resolved_jobs(Exec ex) {
  if (ex.jobs > 0) return ex.jobs;
  return omp_get_max_threads();
}

namespace detail {

void omp_for(std::size_t n, int jobs, void* ctx, void (*body)(void*, std::size_t)) {
  // Exceptions must not escape an OpenMP region; keep the one from the
  // lowest index so the surfaced error is deterministic.
  std::exception_ptr first_error;
  std::size_t first_index = n;
  std::mutex guard;
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs)
  for (long long i = 0; i < count; ++i) {
    try {
      body(ctx, static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(guard);
      if (static_cast<std::size_t>(i) < first_index) {
        first_index = static_cast<std::size_t>(i);
        first_error = std::current_exception();
      }
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace detail

void KahanSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    comp_ += (sum_ - t) + x;
  } else {
    comp_ += (x - t) + sum_;
  }
  sum_ = t;
}

double ordered_sum(std::span<const double> xs) {
  KahanSum acc;
  for (double x : xs) acc.add(x);
  return acc.value();
}

}  // namespace wedgeheat
