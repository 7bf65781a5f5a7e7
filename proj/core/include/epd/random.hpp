#pragma once

#include <cstdint>
#include <random>

namespace epd {

/// Independent generator for stream `index` of a master seed. Stream k depends
/// only on (seed, k), so work can be distributed across threads in any order.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t index)
{
  auto splitmix = [](std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  };
  const std::uint64_t a = splitmix(seed);
  const std::uint64_t b = splitmix(a ^ splitmix(index + 0x632be59bd9b4e019ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

/// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double uniform01(std::mt19937_64& rng)
{
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace epd
