#pragma once

#include "epd/rcs_data.hpp"

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace epd {

/// Picks one pooled observation per time point, uniformly and independently,
/// so any given combination has probability prod_i 1/J_i.
ArtificialTrajectory sample_trajectory(const RcsDataset& data, std::mt19937_64& rng);

/// n independent artificial trajectories; trajectory k is drawn from
/// substream(seed, k) and therefore does not depend on n or on thread count.
std::vector<ArtificialTrajectory> sample_trajectories(const RcsDataset& data, std::size_t n,
                                                      std::uint64_t seed);

} // namespace epd
