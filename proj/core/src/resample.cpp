#include "epd/resample.hpp"

#include "epd/errors.hpp"
#include "epd/random.hpp"

namespace epd {

ArtificialTrajectory sample_trajectory(const RcsDataset& data, std::mt19937_64& rng)
{
  ArtificialTrajectory traj;
  traj.times = data.times;
  traj.values.reserve(data.n_times());
  traj.source_indices.reserve(data.n_times());
  for (const auto& pool : data.pools) {
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    const std::size_t j = pick(rng);
    traj.values.push_back(pool[j]);
    traj.source_indices.push_back(static_cast<std::int64_t>(j));
  }
  return traj;
}

std::vector<ArtificialTrajectory> sample_trajectories(const RcsDataset& data, std::size_t n,
                                                      std::uint64_t seed)
{
  if (n == 0) {
    throw ConfigError("number of artificial trajectories must be at least 1");
  }
  data.validate();
  std::vector<ArtificialTrajectory> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    auto rng = substream(seed, k);
    out.push_back(sample_trajectory(data, rng));
  }
  return out;
}

} // namespace epd
