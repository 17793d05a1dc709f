#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace sbmlab {

/// SplitMix64 finalizer: a cheap, well-mixed 64-bit hash.
uint64_t mix64(uint64_t x);

/// Order-sensitive combination of two 64-bit values (for counter-based seeding).
uint64_t hash_combine(uint64_t seed, uint64_t value);

/// A reproducible random stream addressed by a 64-bit key.
///
/// Streams are *counter-based*: substream(tag) derives an independent stream
/// from (key, tag) without consuming state, so logically parallel units of
/// work (trials, blocks, vertices) can each own a stream whose output does
/// not depend on scheduling or call order. The underlying generator is
/// std::mt19937_64, which the standard pins bit-for-bit.
class RngStream {
 public:
  explicit RngStream(uint64_t key);

  /// Independent stream derived from this stream's key and a tag.
  RngStream substream(uint64_t tag) const;

  uint64_t key() const { return key_; }

  uint64_t next_u64();

  /// Uniform double in [0, 1) with 53 random bits.
  double next_unit();

  /// Uniform integer in [0, n). Unbiased (rejection sampling). n >= 1.
  uint64_t uniform_below(uint64_t n);

  /// Bernoulli(p) draw.
  bool bernoulli(double p);

  /// Number of independent Bernoulli(p) failures before the next success
  /// (a geometric skip for iterating sparse random subsets). p in (0, 1].
  /// Returns a saturating large value when the skip exceeds 2^62.
  int64_t skip_geometric(double p);

  /// Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(uniform_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  uint64_t key_;
  std::mt19937_64 eng_;
};

}  // namespace sbmlab
