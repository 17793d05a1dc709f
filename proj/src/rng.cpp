#include "sbmlab/rng.hpp"

#include <cmath>
#include <limits>

#include "sbmlab/errors.hpp"

namespace sbmlab {

uint64_t mix64(uint64_t x) {
  // SplitMix64 finalizer (Steele, Lea, Flood 2014).
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

uint64_t hash_combine(uint64_t seed, uint64_t value) {
  return mix64(seed ^ (mix64(value) + 0x9e3779b97f4a7c15ull + (seed << 6) + (seed >> 2)));
}

RngStream::RngStream(uint64_t key) : key_(key), eng_(mix64(key)) {}

RngStream RngStream::substream(uint64_t tag) const {
  return RngStream(hash_combine(key_, tag));
}

uint64_t RngStream::next_u64() { return eng_(); }

double RngStream::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

uint64_t RngStream::uniform_below(uint64_t n) {
  if (n == 0) throw RangeError("uniform_below: n must be >= 1");
  if ((n & (n - 1)) == 0) return next_u64() & (n - 1);  // power of two
  // Rejection from the largest multiple of n below 2^64.
  const uint64_t limit = std::numeric_limits<uint64_t>::max() - std::numeric_limits<uint64_t>::max() % n;
  uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

bool RngStream::bernoulli(double p) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return next_unit() < p;
}

int64_t RngStream::skip_geometric(double p) {
  if (!(p > 0.0) || p > 1.0) throw RangeError("skip_geometric: p must lie in (0, 1]");
  if (p >= 1.0) return 0;
  const double u = next_unit();
  // #failures before first success: floor(log(1-u) / log(1-p)).
  const double g = std::floor(std::log1p(-u) / std::log1p(-p));
  if (!(g < 0x1.0p62)) return int64_t{1} << 62;
  return static_cast<int64_t>(g);
}

}  // namespace sbmlab
