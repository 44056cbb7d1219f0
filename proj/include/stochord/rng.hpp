#ifndef STOCHORD_RNG_HPP
#define STOCHORD_RNG_HPP

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace stochord {

// Counter-based pseudorandom stream (splitmix64 output function applied to an
// incrementing counter). Substreams are addressed by integer ids, so a whole
// simulation can be keyed as seed -> replication -> observation without any
// shared state between workers.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed)
      : base_(mix64(seed ^ 0x5bf0'3635'dea5'39e3ULL)), counter_(0) {}

  // Independent stream derived from this one; never advances the parent.
  RandomStream substream(std::uint64_t id) const {
    RandomStream child(0);
    child.base_ = mix64(base_ ^ mix64(id + 0x9e37'79b9'7f4a'7c15ULL));
    child.counter_ = 0;
    return child;
  }

  std::uint64_t next_u64() {
    counter_ += 0x9e37'79b9'7f4a'7c15ULL;
    return mix64(base_ + counter_);
  }

  // Uniform on [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1]; safe as a log() argument.
  double next_positive_double() { return 1.0 - next_double(); }

  // Uniform integer in [0, n), unbiased via rejection.
  std::uint64_t next_below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("next_below: n must be positive");
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  static std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58'476d'1ce4'e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d0'49bb'1331'11ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t base_;
  std::uint64_t counter_;
};

// First `take` entries of a Fisher-Yates shuffle of {0, ..., n-1}: a uniform
// draw without replacement. take == n gives a full random permutation.
inline std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t take,
                                                           RandomStream& stream) {
  if (take > n) throw std::invalid_argument("sample_without_replacement: take > n");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(stream.next_below(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(take);
  return idx;
}

}  // namespace stochord

#endif  // STOCHORD_RNG_HPP
