#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace rmab {

/// Key of the child stream (seed, tag, index). Every consumer of randomness
/// derives its own stream from the run seed through this function, so a
/// result never depends on how many draws some unrelated component made.
///
/// key = mix(mix(seed ^ mix(fnv1a(tag))) + golden * (index + 1))
/// where mix is the splitmix64 finalizer and fnv1a the 64-bit FNV-1a hash.
std::uint64_t stream_key(std::uint64_t seed, std::string_view tag, std::uint64_t index);

/// A deterministic random stream. All derived quantities (uniforms, bounded
/// integers, categorical draws) are computed here from raw 64-bit engine
/// output, so sequences are identical across standard library vendors.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t key) : engine_(key) {}

  static RandomStream child(std::uint64_t seed, std::string_view tag, std::uint64_t index) {
    return RandomStream(stream_key(seed, tag, index));
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n), unbiased (rejection on the low tail).
  std::size_t uniform_index(std::size_t n);

  /// Standard exponential variate.
  double exponential();

  /// Index i drawn with probability weights[i] / sum(weights). Weights must be
  /// nonnegative with a positive sum.
  std::size_t categorical(std::span<const double> weights);

  /// Fisher-Yates shuffle driven by uniform_index.
  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace rmab
