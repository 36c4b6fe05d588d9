#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "error.hpp"
#include "numerics.hpp"

namespace fdatest {

// Identifies one reproducible stream: (seed, stream_id) -> fixed sequence,
// identical on every platform. Distinct stream ids give decorrelated streams.
struct RandomStream {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
};

namespace detail {

inline std::uint64_t mix64(std::uint64_t z) {
  // splitmix64 finalizer
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl64(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

// xoshiro256++ with state words drawn from a splitmix64 chain over (seed, stream_id).
// Normal deviates via Box-Muller with u1 in (0,1], fully specified (no library
// normal_distribution, whose algorithm is implementation-defined).
class Rng {
 public:
  explicit Rng(RandomStream stream) {
    std::uint64_t z = stream.seed + 0x9E3779B97F4A7C15ull * (stream.stream_id + 1);
    for (auto& w : s_) {
      z += 0x9E3779B97F4A7C15ull;
      std::uint64_t t = z;
      t = (t ^ (t >> 30)) * 0xBF58476D1CE4E5B9ull;
      t = (t ^ (t >> 27)) * 0x94D049BB133111EBull;
      w = t ^ (t >> 31);
    }
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;  // all-zero state is invalid
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = detail::rotl64(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = detail::rotl64(s_[3], 45);
    return result;
  }

  // uniform on [0,1) with 53-bit resolution
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform on (0,1]; safe as a log argument
  double next_unit_pos() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  double next_gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = next_unit_pos();
    const double u2 = next_unit();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * kPi * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool have_spare_ = false;
};

inline std::vector<double> gaussian_vector(RandomStream stream, std::size_t len) {
  Rng rng(stream);
  std::vector<double> out(len);
  for (auto& v : out) v = rng.next_gaussian();
  return out;
}

// Gamma(shape, 1) by Marsaglia-Tsang squeeze-rejection; shapes below one are
// boosted through the Gamma(shape+1) identity.
inline double gamma_draw(Rng& rng, double shape) {
  if (!(shape > 0.0)) fail(ErrorKind::InvalidParameter, "gamma_draw: shape must be positive");
  if (shape < 1.0) {
    const double u = rng.next_unit_pos();
    return gamma_draw(rng, shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.next_gaussian();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.next_unit_pos();
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
  }
}

inline double chisq_draw(Rng& rng, double df) { return 2.0 * gamma_draw(rng, 0.5 * df); }

}  // namespace fdatest
