#pragma once

#include <cstdint>
#include <string_view>

namespace echoscore {

/// 64-bit FNV-1a. Stable across platforms; used for token hashing and config hashes.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);

/// SplitMix64 finalizer: a bijective avalanche mix of one 64-bit word.
std::uint64_t mix64(std::uint64_t x);

/// Derives an independent seed for a named pipeline stage from the global seed.
std::uint64_t stage_seed(std::uint64_t global_seed, std::string_view stage);

/// Derives the seed of the i-th stream (e.g. one random walk) under a parent seed.
std::uint64_t stream_seed(std::uint64_t parent_seed, std::uint64_t index);

}  // namespace echoscore
