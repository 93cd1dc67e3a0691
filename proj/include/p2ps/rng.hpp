#pragma once

#include <cstdint>
#include <random>

namespace p2ps {

using Rng = std::mt19937_64;

// Independent sub-streams all derived from the run's single master seed, so
// e.g. changing the routing algorithm never perturbs topology or workload.
enum class Stream : std::uint64_t {
  Topology = 1,
  FreeRiders = 2,
  Objects = 3,
  Capacity = 4,
  Liveness = 5,
  Workload = 6,
  Churn = 7,
  Routing = 8,
  Queues = 9,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline Rng make_rng(std::uint64_t master_seed, Stream stream) {
  return Rng{splitmix64(master_seed ^ splitmix64(static_cast<std::uint64_t>(stream)))};
}

}  // namespace p2ps
