#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace cphbl {

/// SplitMix64 finalizer applied to (base, salt). Used to derive independent
/// stream seeds from user-facing seeds.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt) noexcept;

enum class StreamTag : std::uint64_t {
  demand = 0x64656d616e64ULL,   // "demand"
  history = 0x686973746f7279ULL,  // "history"
  policy = 0x706f6c696379ULL,   // "policy"
  skew = 0x736b6577ULL,        // "skew"
};

/// Seeded random stream. The engine is std::mt19937_64, whose output
/// sequence is fixed by the standard; all derived variates are computed
/// here rather than through <random> distributions (which are
/// implementation-defined), so traces are identical across platforms.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}
  RngStream(std::uint64_t seed, StreamTag tag)
      : engine_(mix_seed(seed, static_cast<std::uint64_t>(tag))) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on {0, ..., n-1}; n must be positive. Unbiased (rejection).
  std::size_t uniform_index(std::size_t n);

  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace cphbl
