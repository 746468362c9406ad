#pragma once

#include <cstdint>
#include <random>

namespace fedepm {

/// Per-client (or per-server) seeded stream. Callers own it; nothing is shared.
using RandomStream = std::mt19937_64;

/// splitmix64 finalizer, used to fan one seed out into independent streams.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt);

/// Uniform draw strictly inside (0, 1) from the top 53 bits of the stream.
double uniform_open(RandomStream& rng);

/// Exactly uniform integer in [0, bound) by rejection.
std::uint64_t uniform_index(RandomStream& rng, std::uint64_t bound);

} // namespace fedepm
