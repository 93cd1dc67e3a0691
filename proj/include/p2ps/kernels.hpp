#pragma once

#include <cstdint>

#include "p2ps/network.hpp"

namespace p2ps {

enum class Exec : std::uint8_t { Serial, Parallel };

// Table initialisation at network start-up.
//
// The serial path is the reference: neighbour tables are built peer by peer and
// every power peer pushes its broadcast in id order. The parallel path computes
// the same tables with OpenMP, each peer pulling the power peers within n_hops
// of itself, so every thread only writes the tables of the peer it owns.
void init_tables(Network& net, const Thresholds& t, std::uint32_t broadcast_hops, Exec exec);

void init_neighbour_tables_parallel(Network& net, const Thresholds& t);
void init_power_tables_serial(Network& net, const Thresholds& t, std::uint32_t broadcast_hops);
void init_power_tables_parallel(Network& net, const Thresholds& t, std::uint32_t broadcast_hops);

}  // namespace p2ps
