#pragma once

#include <vector>

#include "p2ps/config.hpp"
#include "p2ps/kernels.hpp"
#include "p2ps/simulator.hpp"

namespace p2ps {

// Runs independent experiments. Runs share nothing, so the parallel path only
// changes wall time; results come back in input order either way.
std::vector<RunResult> run_batch(const std::vector<SimConfig>& configs, Exec exec, int jobs = 0);

}  // namespace p2ps
