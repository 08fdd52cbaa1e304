// Counter-based random numbers (Philox4x32-10) for reproducible parallel
// Monte Carlo. Streams are keyed by (seed, stream); the counter carries the
// step index, so any (seed, path, step) triple maps to the same draw
// regardless of thread count or execution order.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace logldp {

namespace detail {

inline void philox_round(std::array<std::uint32_t, 4>& ctr,
                         std::array<std::uint32_t, 2>& key) {
  constexpr std::uint64_t M0 = 0xD2511F53ull;
  constexpr std::uint64_t M1 = 0xCD9E8D57ull;
  const std::uint64_t p0 = M0 * ctr[0];
  const std::uint64_t p1 = M1 * ctr[2];
  const std::array<std::uint32_t, 4> out = {
      static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
      static_cast<std::uint32_t>(p1),
      static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
      static_cast<std::uint32_t>(p0)};
  ctr = out;
  key[0] += 0x9E3779B9u;  // golden ratio
  key[1] += 0xBB67AE85u;  // sqrt(3)-1
}

}  // namespace detail

// One 128-bit block of the Philox4x32-10 keyed permutation.
inline std::array<std::uint32_t, 4> philox4x32(std::uint64_t key,
                                               std::uint64_t ctr_lo,
                                               std::uint64_t ctr_hi = 0) {
  std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(ctr_lo), static_cast<std::uint32_t>(ctr_lo >> 32),
      static_cast<std::uint32_t>(ctr_hi), static_cast<std::uint32_t>(ctr_hi >> 32)};
  std::array<std::uint32_t, 2> k = {static_cast<std::uint32_t>(key),
                                    static_cast<std::uint32_t>(key >> 32)};
  for (int r = 0; r < 10; ++r) detail::philox_round(ctr, k);
  return ctr;
}

// Uniform double in (0, 1], 53-bit resolution.
inline double u64_to_unit(std::uint64_t x) {
  return (static_cast<double>(x >> 11) + 1.0) * 0x1p-53;
}

// Stateless counter-based stream: normal(step) is a pure function of
// (seed, stream, step).
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream) {}

  // Standard normal draw for the given counter value (Box-Muller, cosine leg).
  double normal(std::uint64_t step) const {
    const auto w = philox4x32(seed_, step, stream_);
    const std::uint64_t a = (static_cast<std::uint64_t>(w[0]) << 32) | w[1];
    const std::uint64_t b = (static_cast<std::uint64_t>(w[2]) << 32) | w[3];
    const double u1 = u64_to_unit(a);
    const double u2 = u64_to_unit(b);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  // Uniform in (0, 1].
  double uniform(std::uint64_t step) const {
    const auto w = philox4x32(seed_, step, stream_ ^ 0x5DEECE66Dull);
    return u64_to_unit((static_cast<std::uint64_t>(w[0]) << 32) | w[1]);
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
};

}  // namespace logldp
