#include "cphbl/rng.hpp"

#include <limits>

namespace cphbl {

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt) noexcept {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::size_t RngStream::uniform_index(std::size_t n) {
  const auto range = static_cast<std::uint64_t>(n);
  // Largest multiple of `range` representable; draws above it are rejected.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return static_cast<std::size_t>(x % range);
}

}  // namespace cphbl
