#include "rmab/rng.hpp"

#include <cmath>

#include "rmab/errors.hpp"

namespace rmab {

namespace {

std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t stream_key(std::uint64_t seed, std::string_view tag, std::uint64_t index) {
  std::uint64_t base = splitmix(seed ^ splitmix(fnv1a(tag)));
  return splitmix(base + 0x9e3779b97f4a7c15ULL * (index + 1));
}

std::size_t RandomStream::uniform_index(std::size_t n) {
  if (n == 0) throw UsageError("uniform_index: empty range");
  const std::uint64_t bound = n;
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    std::uint64_t r = engine_();
    if (r >= threshold) return static_cast<std::size_t>(r % bound);
  }
}

double RandomStream::exponential() { return -std::log1p(-uniform01()); }

std::size_t RandomStream::categorical(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) throw UsageError("categorical: weights must have a positive sum");
  const double u = uniform01() * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last_positive = i;
    if (u < acc) return i;
  }
  // u landed in the rounding gap above the accumulated sum.
  return last_positive;
}

}  // namespace rmab
