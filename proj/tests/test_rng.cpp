#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "isocal/mathutil.hpp"
#include "isocal/rng.hpp"

using isocal::normal_cdf;
using isocal::normal_quantile;
using isocal::SplitMix64;
using isocal::substream;

TEST_SUITE_BEGIN("rng");

TEST_CASE("normal quantile matches published values") {
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(normal_quantile(0.975) ==
        doctest::Approx(1.9599639845400545).epsilon(1e-12));
  CHECK(normal_quantile(0.01) ==
        doctest::Approx(-2.3263478740408408).epsilon(1e-12));
  CHECK(normal_quantile(1e-9) ==
        doctest::Approx(-5.9978070150076865).epsilon(1e-10));
  CHECK_THROWS_AS(normal_quantile(0.0), std::domain_error);
  CHECK_THROWS_AS(normal_quantile(1.0), std::domain_error);
}

TEST_CASE("normal cdf and quantile are mutual inverses") {
  // normal_cdf goes through erfc, normal_quantile through the AS241
  // rational fit, so agreement cross-checks both routes.
  for (double p : {1e-12, 1e-8, 1e-4, 0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99,
                   0.9999, 1.0 - 1e-9}) {
    CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-11));
  }
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(normal_cdf(-1e9) == 0.0);
  CHECK(normal_cdf(40.0) == 1.0);
}

TEST_CASE("substreams are reproducible and order-independent") {
  SplitMix64 a = substream(123, 7);
  SplitMix64 b = substream(123, 7);
  for (int i = 0; i < 10; ++i) CHECK(a.next() == b.next());

  // Drawing row 8 first must not change row 7's stream.
  SplitMix64 other = substream(123, 8);
  (void)other.next();
  SplitMix64 c = substream(123, 7);
  SplitMix64 d = substream(123, 7);
  (void)d.uniform01();
  (void)c.uniform01();
  CHECK(c.next() == d.next());

  CHECK(substream(123, 7).next() != substream(124, 7).next());
  CHECK(substream(123, 7).next() != substream(123, 6).next());
}

TEST_CASE("draw distributions have the right moments") {
  SplitMix64 g = substream(2024, 0);
  const int n = 200000;
  double su = 0, su2 = 0, sn = 0, sn2 = 0, se = 0;
  for (int i = 0; i < n; ++i) {
    double u = g.uniform01();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
    su += u;
    su2 += u * u;
    double z = g.normal();
    sn += z;
    sn2 += z * z;
    se += g.exponential(0.5);
  }
  double mu = su / n, vu = su2 / n - mu * mu;
  CHECK(mu == doctest::Approx(0.5).epsilon(0.005));
  CHECK(vu == doctest::Approx(1.0 / 12).epsilon(0.02));
  CHECK(sn / n == doctest::Approx(0.0).scale(1).epsilon(0.01));
  CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.02));
  CHECK(se / n == doctest::Approx(2.0).epsilon(0.03));
}

TEST_SUITE_END();
