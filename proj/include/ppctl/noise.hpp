#pragma once

#include <cstdint>
#include <utility>

namespace ppctl {

/// Environmental noise specification: white-noise intensities, jump
/// intensity, and multiplicative jump sizes. Jump sizes must stay above -1
/// so a jump can never drive a positive state through zero.
struct NoiseParams {
  double sigma1 = 0.02;  ///< prey white-noise intensity
  double sigma2 = 0.02;  ///< predator white-noise intensity
  double lambda = 1.0;   ///< jump intensity (events per unit time)
  double jump1 = 1.0;    ///< prey jump size gamma1
  double jump2 = 1.0;    ///< predator jump size gamma2

  void validate() const;  // throws InvalidInput
};

/// Counter-based random stream. The draw sequence is a keyed hash of an
/// incrementing counter, so identical (master_seed, stream_id) pairs give
/// bit-identical sequences no matter how work is scheduled across threads.
struct RandomStream {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;
  std::uint64_t key1 = 0;
  std::uint64_t key2 = 0;
  std::uint64_t counter = 0;

  std::uint64_t next_u64();
  /// Uniform on (0, 1]: zero is mapped to the smallest positive double.
  double next_open_unit();
  /// Uniform on [0, 1).
  double next_unit();
};

/// One step's worth of driving noise.
struct NoiseIncrement {
  double dW1 = 0.0;
  double dW2 = 0.0;
  std::int64_t dN1 = 0;
  std::int64_t dN2 = 0;
};

/// Derive the stream for one simulation path. Injective in
/// (master_seed, path_index); distinct indices give statistically
/// independent sequences.
RandomStream derive_stream(std::uint64_t master_seed, std::uint64_t path_index);

/// Box-Muller transform of two uniforms u1 in (0,1], u2 in [0,1):
/// z1 = sqrt(-2 ln u1) cos(2 pi u2), z2 = sqrt(-2 ln u1) sin(2 pi u2).
std::pair<double, double> box_muller(double u1, double u2);

/// Standard normal pair drawn from the stream via Box-Muller.
std::pair<double, double> gaussian_pair(RandomStream& stream);

/// Brownian increment z * sqrt(dt); consumes one Box-Muller pair and uses
/// its first component.
double brownian_increment(RandomStream& stream, double dt);

/// Exact Poisson count with mean lambda * dt (CDF inversion; means above 30
/// are split into independent halves, which preserves the distribution).
std::int64_t poisson_count(RandomStream& stream, double lambda, double dt);

/// Gaussian pair scaled by sqrt(dt) plus two jump counts.
NoiseIncrement draw_increment(RandomStream& stream, const NoiseParams& np, double dt);

}  // namespace ppctl
