#include "sbfa/rng.hpp"

#include <cmath>

namespace sbfa {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

inline std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

inline std::uint64_t combine(std::uint64_t a, std::uint64_t b) {
  return mix64(a + kGolden + (b ^ (b >> 17)) * 0xC2B2AE3D27D4EB4FULL);
}

}  // namespace

RngStream RngStream::seeded(std::uint64_t seed, std::uint64_t stream_id) {
  RngStream s;
  s.seed = seed;
  s.stream_id = stream_id;
  s.counter = 0;
  return s;
}

RngStream RngStream::substream(std::uint64_t tag) const {
  // Children get a fresh seed derived from the parent identity and the tag;
  // the parent's counter is irrelevant so derivation is reproducible.
  return RngStream::seeded(combine(combine(seed, stream_id), mix64(tag + 0x632BE59BD9B4E019ULL)), tag);
}

std::uint64_t RngStream::base() {
  if (!base_ready_) {
    base_ = combine(mix64(seed), mix64(stream_id * 0xD6E8FEB86659FD93ULL + 1));
    base_ready_ = true;
  }
  return base_;
}

std::uint64_t RngStream::next_u64() {
  std::uint64_t x = base() + (counter++) * kGolden;
  return mix64(x);
}

double RngStream::next_uniform() {
  // 53-bit mantissa, strictly inside (0, 1).
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::next_normal() {
  const double u1 = next_uniform();
  const double u2 = next_uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

double RngStream::next_gamma(double shape) {
  if (shape < 1.0) {
    // Boost to shape+1 and scale back (Marsaglia-Tsang remark).
    const double u = next_uniform();
    return next_gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = next_normal();
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = next_uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double RngStream::next_symmetric_beta(double a) {
  const double g1 = next_gamma(a);
  const double g2 = next_gamma(a);
  return g1 / (g1 + g2);
}

}  // namespace sbfa
