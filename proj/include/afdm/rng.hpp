#pragma once

#include <cstdint>
#include <random>

namespace afdm {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to derive independent stream seeds.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Generator for the stream identified by (master_seed, trial, substream).
/// Same key, same sequence, regardless of which thread runs the trial.
inline Rng make_stream(std::uint64_t master_seed, std::uint64_t trial, std::uint64_t substream = 0) {
  const std::uint64_t s = mix64(mix64(mix64(master_seed) ^ trial) ^ (substream * 0xd6e8feb86659fd93ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32)};
  return Rng(seq);
}

}  // namespace afdm
