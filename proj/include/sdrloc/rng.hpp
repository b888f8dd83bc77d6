#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace sdrloc {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// xoshiro256++ stream seeded from (seed, key). Streams with distinct keys
/// are independent, and every draw is reproducible across platforms since
/// no library distributions are involved.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t key = 0) {
    std::uint64_t sm = seed ^ (0xD1B54A32D192ED03ull * (key + 1));
    for (auto& word : state_) word = splitmix64_next(sm);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in (0, 1].
  double uniform_pos() { return 1.0 - uniform01(); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Standard normal via Box-Muller; the sine branch is discarded so the
  /// stream position does not depend on call parity.
  double normal() {
    const double u1 = uniform_pos();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  double normal(double sigma) { return sigma * normal(); }

  /// Zero-mean Laplace draw with standard deviation sigma (scale sigma/sqrt(2)).
  double laplace(double sigma) {
    const double b = sigma / std::sqrt(2.0);
    const double u = uniform01() - 0.5;
    double core = 1.0 - 2.0 * std::abs(u);
    if (core < 1e-300) core = 1e-300;
    const double mag = -b * std::log(core);
    return u < 0 ? -mag : mag;
  }

  /// Uniform integer in {0, ..., n-1}.
  int uniform_index(int n) {
    int idx = static_cast<int>(uniform01() * n);
    return idx >= n ? n - 1 : idx;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::array<std::uint64_t, 4> state_;
};

/// Stream for Monte Carlo run `key` of experiment `seed`; reproducible and
/// order-independent so runs can execute on any worker.
inline RngStream derive_stream(std::uint64_t seed, std::uint64_t key) {
  return RngStream(seed, key);
}

}  // namespace sdrloc
