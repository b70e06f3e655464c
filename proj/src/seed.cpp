#include "echoscore/seed.hpp"

namespace echoscore {

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stage_seed(std::uint64_t global_seed, std::string_view stage) {
  return mix64(global_seed ^ fnv1a64(stage));
}

std::uint64_t stream_seed(std::uint64_t parent_seed, std::uint64_t index) {
  return mix64(mix64(parent_seed) + index);
}

}  // namespace echoscore
