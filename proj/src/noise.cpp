#include "ppctl/noise.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "ppctl/errors.hpp"

namespace ppctl {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// 64-bit finalizer with full avalanche (splitmix64 / murmur3 style).
std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

}  // namespace

void NoiseParams::validate() const {
  for (double v : {sigma1, sigma2, lambda, jump1, jump2}) {
    if (!std::isfinite(v)) throw InvalidInput("NoiseParams: non-finite field");
  }
  if (sigma1 < 0 || sigma2 < 0 || lambda < 0) {
    throw InvalidInput("NoiseParams: sigma1, sigma2, lambda must be nonnegative");
  }
  if (jump1 <= -1.0 || jump2 <= -1.0) {
    throw InvalidInput("NoiseParams: jump sizes must be > -1");
  }
}

std::uint64_t RandomStream::next_u64() {
  std::uint64_t z = (++counter) * kGolden;
  z = mix64(z ^ key1);
  z = mix64(z ^ key2);
  return z;
}

double RandomStream::next_open_unit() {
  double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  if (u == 0.0) u = std::numeric_limits<double>::denorm_min();
  return u;
}

double RandomStream::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

RandomStream derive_stream(std::uint64_t master_seed, std::uint64_t path_index) {
  RandomStream s;
  s.master_seed = master_seed;
  s.stream_id = path_index;
  // mix64 is a bijection, so (key1, key2) is injective in (seed, index).
  s.key1 = mix64(master_seed + kGolden);
  s.key2 = mix64(path_index ^ 0x5851f42d4c957f2dULL);
  s.counter = 0;
  return s;
}

std::pair<double, double> box_muller(double u1, double u2) {
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

std::pair<double, double> gaussian_pair(RandomStream& stream) {
  const double u1 = stream.next_open_unit();
  const double u2 = stream.next_unit();
  return box_muller(u1, u2);
}

double brownian_increment(RandomStream& stream, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidInput("brownian_increment: dt must be positive");
  return gaussian_pair(stream).first * std::sqrt(dt);
}

namespace {

std::int64_t poisson_inversion(RandomStream& stream, double mean) {
  if (mean <= 0.0) return 0;
  if (mean > 30.0) {
    // Sum of independent Poisson halves is Poisson with the full mean.
    const double half = 0.5 * mean;
    return poisson_inversion(stream, half) + poisson_inversion(stream, half);
  }
  const double u = stream.next_unit();
  double p = std::exp(-mean);
  double cdf = p;
  std::int64_t k = 0;
  while (u >= cdf && k < 10000) {
    ++k;
    p *= mean / static_cast<double>(k);
    cdf += p;
  }
  return k;
}

}  // namespace

std::int64_t poisson_count(RandomStream& stream, double lambda, double dt) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw InvalidInput("poisson_count: lambda must be finite and >= 0");
  }
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidInput("poisson_count: dt must be positive");
  return poisson_inversion(stream, lambda * dt);
}

NoiseIncrement draw_increment(RandomStream& stream, const NoiseParams& np, double dt) {
  if (!(dt > 0.0)) throw InvalidInput("draw_increment: dt must be positive");
  NoiseIncrement inc;
  const auto [z1, z2] = gaussian_pair(stream);
  const double root_dt = std::sqrt(dt);
  inc.dW1 = z1 * root_dt;
  inc.dW2 = z2 * root_dt;
  inc.dN1 = poisson_count(stream, np.lambda, dt);
  inc.dN2 = poisson_count(stream, np.lambda, dt);
  return inc;
}

}  // namespace ppctl
