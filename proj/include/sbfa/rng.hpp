#pragma once

#include <cstdint>

namespace sbfa {

// Counter-based random stream. Output at position `counter` is a pure function
// of (seed, stream_id, counter), so a stream can be replayed exactly from a
// stored counter and distinct (seed, stream_id) pairs give independent streams.
// The generator is a SplitMix64-style avalanche over a per-stream base state.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  std::uint64_t counter = 0;

  static RngStream seeded(std::uint64_t seed, std::uint64_t stream_id);

  // Derive an independent child stream; deterministic in (seed, stream_id, tag).
  RngStream substream(std::uint64_t tag) const;

  std::uint64_t next_u64();
  double next_uniform();  // open interval (0, 1)
  double next_normal();   // standard normal, consumes two uniforms
  double next_gamma(double shape);  // Gamma(shape, rate=1), Marsaglia-Tsang
  double next_chi2(double df) { return 2.0 * next_gamma(0.5 * df); }
  // Beta(a, a) via two gammas; used by the LKJ sampler.
  double next_symmetric_beta(double a);

 private:
  std::uint64_t base_ = 0;  // cached mix of (seed, stream_id)
  bool base_ready_ = false;
  std::uint64_t base();
};

}  // namespace sbfa
