#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace wfboot {

/// Engine used for all simulation and resampling randomness.
using Rng = std::mt19937_64;

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Derives an independent stream seed from a master seed and a path of
/// counters (draw index, replication index, stream tag, ...). The result
/// depends only on its arguments, so work items can run in any order.
std::uint64_t derive_seed(std::uint64_t master,
                          std::initializer_list<std::uint64_t> path) noexcept;

/// Engine seeded from derive_seed(master, path).
Rng make_stream(std::uint64_t master, std::initializer_list<std::uint64_t> path);

/// Stream tags used for sub-streams inside one replication.
enum class StreamTag : std::uint64_t {
  Signals = 0x51,
  Panel = 0x52,
  Regression = 0x53,
  Bootstrap = 0x54,
  Jackknife = 0x55,
};

}  // namespace wfboot
