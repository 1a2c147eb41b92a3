#pragma once

#include <cstddef>
#include <span>

namespace wedgeheat {

/// Execution policy for the data-parallel maps.
///
/// `jobs == 1` selects the serial reference loop; any other value runs the
/// same body under OpenMP (`jobs == 0` means "use the OpenMP default").
/// Every reduction in the library is performed after the map, serially and
/// in index order, so results never depend on `jobs`.
struct Exec {
  int jobs = 0;

  static constexpr Exec serial() { return Exec{1}; }
  static constexpr Exec with_jobs(int n) { return Exec{n}; }
  bool is_serial() const { return jobs == 1; }
};

/// Process-wide default used when callers do not pass an Exec explicitly.
/// Set once by the CLI from `--jobs` / `WEDGEHEAT_JOBS`.
Exec default_exec();
void set_default_exec(Exec ex);

/// Number of threads the policy resolves to.
int resolved_jobs(Exec ex);

namespace detail {
// Type-erased OpenMP loop; defined in parallel.cpp so that only one TU
// carries the pragma.
void omp_for(std::size_t n, int jobs, void* ctx, void (*body)(void*, std::size_t));
}  // namespace detail

/// Calls `fn(i)` for i in [0, n). `fn` must only write to slot i of its
/// outputs.
template <class Fn>
void for_each_index(std::size_t n, Exec ex, Fn&& fn) {
  if (ex.is_serial() || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  auto trampoline = [](void* ctx, std::size_t i) { (*static_cast<Fn*>(ctx))(i); };
  detail::omp_for(n, resolved_jobs(ex), static_cast<void*>(&fn), trampoline);
}

/// Neumaier-compensated sum in index order.
double ordered_sum(std::span<const double> xs);

/// Compensated accumulator for ad-hoc serial sums.
class KahanSum {
 public:
  void add(double x);
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace wedgeheat
