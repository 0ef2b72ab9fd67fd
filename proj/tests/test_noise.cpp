#include <cmath>
#include <vector>

#include <doctest.h>

#include "ppctl/errors.hpp"
#include "ppctl/noise.hpp"

using namespace ppctl;

TEST_CASE("box-muller: quarter-turn symmetry and closed form") {
  const auto [z1, z2] = box_muller(0.5, 0.25);
  // cos(pi/2) rounds to ~6e-17, so z1 is zero up to one rounding of the angle.
  CHECK(std::abs(z1) < 1e-15);
  CHECK(z2 == doctest::Approx(std::sqrt(2.0 * std::log(2.0))).epsilon(1e-12));
}

TEST_CASE("streams are deterministic and distinct") {
  auto a = derive_stream(42, 0);
  auto b = derive_stream(42, 0);
  bool identical = true;
  for (int i = 0; i < 10000; ++i) {
    const auto pa = gaussian_pair(a);
    const auto pb = gaussian_pair(b);
    if (pa != pb) identical = false;
  }
  CHECK(identical);

  auto c = derive_stream(42, 0);
  auto d = derive_stream(42, 1);
  bool differs = false;
  for (int i = 0; i < 10000 && !differs; ++i) {
    if (gaussian_pair(c) != gaussian_pair(d)) differs = true;
  }
  CHECK(differs);
}

TEST_CASE("streams 0 and 1 are uncorrelated") {
  auto a = derive_stream(42, 0);
  auto b = derive_stream(42, 1);
  const int n = 10000;
  double sab = 0, sa = 0, sb = 0, saa = 0, sbb = 0;
  for (int i = 0; i < n; ++i) {
    const double x = gaussian_pair(a).first;
    const double y = gaussian_pair(b).first;
    sab += x * y;
    sa += x;
    sb += y;
    saa += x * x;
    sbb += y * y;
  }
  const double cov = sab / n - (sa / n) * (sb / n);
  const double va = saa / n - (sa / n) * (sa / n);
  const double vb = sbb / n - (sb / n) * (sb / n);
  CHECK(std::abs(cov / std::sqrt(va * vb)) < 0.05);
}

TEST_CASE("box-muller moments on 1e7 draws") {
  auto rs = derive_stream(1234, 0);
  const long long n = 10'000'000;
  double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
  for (long long i = 0; i < n / 2; ++i) {
    const auto [z1, z2] = gaussian_pair(rs);
    for (double z : {z1, z2}) {
      s1 += z;
      s2 += z * z;
      s3 += z * z * z;
      s4 += z * z * z * z;
    }
  }
  const double mean = s1 / n;
  const double var = s2 / n - mean * mean;
  const double skew = (s3 / n - 3 * mean * var - mean * mean * mean) / std::pow(var, 1.5);
  const double kurt = s4 / n / (var * var) - 3.0;
  CHECK(std::abs(mean) < 0.002);
  CHECK(var == doctest::Approx(1.0).epsilon(0.002));
  CHECK(std::abs(skew) < 0.01);
  CHECK(std::abs(kurt) < 0.02);
}

TEST_CASE("brownian increment: moment checks") {
  auto rs = derive_stream(99, 5);
  const int n = 1'000'000;
  const double dt = 0.01;
  double sum = 0, sumsq = 0;
  for (int i = 0; i < n; ++i) {
    const double dw = brownian_increment(rs, dt);
    sum += dw;
    sumsq += dw * dw;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::abs(mean) < 3.0 * std::sqrt(dt / n));
  CHECK(var == doctest::Approx(dt).epsilon(0.01));
  CHECK_THROWS_AS(brownian_increment(rs, 0.0), InvalidInput);
  CHECK_THROWS_AS(brownian_increment(rs, -1.0), InvalidInput);
}

TEST_CASE("poisson counts: zero intensity, mean, tail") {
  auto rs = derive_stream(7, 7);
  for (int i = 0; i < 1000; ++i) CHECK(poisson_count(rs, 0.0, 0.5) == 0);

  const int n = 1'000'000;
  const double lambda = 1.0, dt = 0.1;
  long long total = 0, at_least_one = 0;
  for (int i = 0; i < n; ++i) {
    const auto k = poisson_count(rs, lambda, dt);
    total += k;
    if (k >= 1) ++at_least_one;
  }
  const double mean = static_cast<double>(total) / n;
  CHECK(std::abs(mean - 0.1) < 3.0 * std::sqrt(0.1 / n));
  const double p1 = static_cast<double>(at_least_one) / n;
  const double expect = 1.0 - std::exp(-0.1);
  CHECK(std::abs(p1 - expect) < 3.0 * std::sqrt(expect * (1 - expect) / n));

  CHECK_THROWS_AS(poisson_count(rs, -1.0, 0.1), InvalidInput);
  CHECK_THROWS_AS(poisson_count(rs, 1.0, 0.0), InvalidInput);
}

TEST_CASE("poisson counts: large mean splits stay exact in the mean") {
  auto rs = derive_stream(21, 0);
  const int n = 20000;
  const double mean_target = 80.0;  // exercises the splitting branch
  double total = 0;
  for (int i = 0; i < n; ++i) total += static_cast<double>(poisson_count(rs, mean_target, 1.0));
  const double mean = total / n;
  CHECK(std::abs(mean - mean_target) < 3.0 * std::sqrt(mean_target / n));
}

TEST_CASE("compensated jump increments have zero sample mean") {
  auto rs = derive_stream(3, 9);
  NoiseParams np;
  np.lambda = 1.0;
  const int n = 1'000'000;
  const double dt = 0.001;
  double sum = 0, sumsq = 0;
  for (int i = 0; i < n; ++i) {
    const auto inc = draw_increment(rs, np, dt);
    const double c = static_cast<double>(inc.dN1) - np.lambda * dt;
    sum += c;
    sumsq += c * c;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sumsq / n - mean * mean) / n);
  CHECK(std::abs(mean) < 3.0 * se);
}

TEST_CASE("noise params validation") {
  NoiseParams np;
  np.jump1 = -1.0;
  CHECK_THROWS_AS(np.validate(), InvalidInput);
  np = NoiseParams{};
  np.sigma1 = -0.1;
  CHECK_THROWS_AS(np.validate(), InvalidInput);
  np = NoiseParams{};
  np.lambda = -2.0;
  CHECK_THROWS_AS(np.validate(), InvalidInput);
}
