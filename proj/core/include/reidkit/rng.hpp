#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace reidkit {

/// splitmix64 stream.
///
/// The state is the seed itself; every call to next() advances the state by
/// the golden-ratio increment 0x9E3779B97F4A7C15 and returns the scrambled
/// value
///
///   z = state
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   return z ^ (z >> 31)
///
/// All arithmetic is modulo 2^64. Rng(0).next() == 0xE220A8397B1DCDAF. Ports to
/// other languages must reproduce tests/data/splitmix64_golden.txt.
///
/// A stream is single-owner. Code that needs an independent stream derives a
/// child with `Rng child = parent.split();` (seeded from one parent draw).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// next() mod bound. Modulo bias is accepted and identical across ports.
  std::uint64_t below(std::uint64_t bound) noexcept { return next() % bound; }

  /// Uniform double in [0, 1) from the top 53 bits of one draw.
  double uniform() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  Rng split() noexcept { return Rng(next()); }

  std::uint64_t state() const noexcept { return state_; }

 private:
  std::uint64_t state_;
};

/// Fisher-Yates permutation of 0..n-1: for i = n-1 down to 1, swap
/// positions i and next() % (i + 1). Throws ErrorCode::kEmptyDomain for n = 0.
std::vector<std::size_t> shuffle(Rng& rng, std::size_t n);

/// Shuffles `items` in place with the same draw sequence as shuffle().
template <typename T>
void shuffle_in_place(Rng& rng, std::vector<T>& items) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(items[i - 1], items[j]);
  }
}

/// Standard normal draw (Box-Muller, two uniforms per call, no caching).
double normal(Rng& rng);

}  // namespace reidkit
