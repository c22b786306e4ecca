#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace mgare {

/// splitmix64 step, used to derive independent substreams from (seed, path).
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Engine for the substream identified by (seed, path...). Sample i of a
/// pool, or (run, slot) of a simulation, map to distinct paths, so draws are
/// reproducible and independent of evaluation order.
inline std::mt19937_64 substream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = splitmix64(seed);
  for (std::uint64_t p : path) s = splitmix64(s ^ splitmix64(p + 0x632be59bd9b4e019ULL));
  return std::mt19937_64(s);
}

}  // namespace mgare
