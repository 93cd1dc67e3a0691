#include "p2ps/batch.hpp"

#include <exception>

#include <omp.h>

namespace p2ps {

std::vector<RunResult> run_batch(const std::vector<SimConfig>& configs, Exec exec, int jobs) {
  for (const auto& c : configs) c.validate();
  std::vector<RunResult> out(configs.size());
  if (exec == Exec::Serial || configs.size() < 2) {
    for (std::size_t i = 0; i < configs.size(); ++i) out[i] = run_experiment(configs[i]);
    return out;
  }
  const int threads = jobs > 0 ? jobs : omp_get_max_threads();
  std::vector<std::exception_ptr> errors(configs.size());
  const auto n = static_cast<std::ptrdiff_t>(configs.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = run_experiment(configs[static_cast<std::size_t>(i)]);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace p2ps
