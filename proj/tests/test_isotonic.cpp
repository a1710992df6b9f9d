#include <doctest.h>

#include <cmath>
#include <vector>

#include "isocal/isotonic.hpp"
#include "isocal/rng.hpp"
#include "oracles.hpp"

using isocal::DoublyMonotoneOptions;
using isocal::max_column_violation;
using isocal::max_row_violation;
using isocal::pava_nonincreasing;
using isocal::project_doubly_monotone;

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

bool nonincreasing(const std::vector<double>& v, double tol = 0.0) {
  for (size_t i = 0; i + 1 < v.size(); ++i) {
    if (v[i + 1] > v[i] + tol) return false;
  }
  return true;
}

std::vector<double> transpose(const std::vector<double>& M, int r, int c) {
  std::vector<double> T(M.size());
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < c; ++j) T[static_cast<size_t>(j) * r + i] = M[static_cast<size_t>(i) * c + j];
  }
  return T;
}

}  // namespace

TEST_SUITE_BEGIN("isotonic");

TEST_CASE("pava pools the classic violation") {
  CHECK(pava_nonincreasing({1, 3, 2}) == std::vector<double>{2, 2, 2});
  CHECK(pava_nonincreasing({3, 2, 1}) == std::vector<double>{3, 2, 1});
  CHECK(pava_nonincreasing({5}) == std::vector<double>{5});
}

TEST_CASE("zero-weight entries follow their block without influencing it") {
  // Expected vector computed with the brute-force partition oracle before
  // the sweep existed: the corridor is pinched, so the fit is unique.
  auto fit = pava_nonincreasing({1, 3, 2}, {1, 0, 1});
  CHECK(fit == std::vector<double>{1.5, 1.5, 1.5});
  auto oracle = oracles::pava_nonincreasing({1, 3, 2}, {1, 0, 1});
  CHECK(sq_dist(fit, oracle.fit) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("all-zero weights are rejected") {
  CHECK_THROWS_AS(pava_nonincreasing({1, 2, 3}, {0, 0, 0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(pava_nonincreasing({}, {}), std::invalid_argument);
  CHECK_THROWS_AS(pava_nonincreasing({1, 2}, {1, -1}), std::invalid_argument);
}

TEST_CASE("pava equals the brute-force optimum on every small vector") {
  // Every target vector of length <= 6 with entries in {0,1,2,3}.
  for (int m = 1; m <= 6; ++m) {
    int total = 1;
    for (int k = 0; k < m; ++k) total *= 4;
    for (int code = 0; code < total; ++code) {
      std::vector<double> y(m);
      int c = code;
      for (int k = 0; k < m; ++k) {
        y[k] = c % 4;
        c /= 4;
      }
      auto fit = pava_nonincreasing(y);
      auto oracle = oracles::pava_nonincreasing(y, std::vector<double>(m, 1.0));
      REQUIRE(sq_dist(fit, oracle.fit) < 1e-18);
    }
  }
}

TEST_CASE("weighted pava matches oracle cost on random instances") {
  isocal::SplitMix64 g(99);
  for (int rep = 0; rep < 300; ++rep) {
    int m = 2 + static_cast<int>(g.next() % 7);
    std::vector<double> y(m), w(m);
    bool any = false;
    for (int i = 0; i < m; ++i) {
      y[i] = g.uniform(-2, 2);
      w[i] = (g.next() % 4 == 0) ? 0.0 : g.uniform(0.1, 3.0);
      any = any || w[i] > 0;
    }
    if (!any) w[0] = 1.0;
    auto fit = pava_nonincreasing(y, w);
    CHECK(nonincreasing(fit, 1e-12));
    double cost = 0.0;
    for (int i = 0; i < m; ++i) cost += w[i] * (fit[i] - y[i]) * (fit[i] - y[i]);
    auto oracle = oracles::pava_nonincreasing(y, w);
    CHECK(cost == doctest::Approx(oracle.cost).epsilon(1e-9).scale(1.0));
    for (int i = 0; i < m; ++i) {
      if (w[i] > 0) CHECK(fit[i] == doctest::Approx(oracle.fit[i]).epsilon(1e-9));
    }
  }
}

TEST_CASE("pava is idempotent and preserves the weighted mean") {
  isocal::SplitMix64 g(7);
  for (int rep = 0; rep < 50; ++rep) {
    int m = 1 + static_cast<int>(g.next() % 40);
    std::vector<double> y(m), w(m);
    for (int i = 0; i < m; ++i) {
      y[i] = g.uniform(-5, 5);
      w[i] = g.uniform(0.01, 2.0);
    }
    auto fit = pava_nonincreasing(y, w);
    CHECK(sq_dist(pava_nonincreasing(fit, w), fit) < 1e-20);
    double sy = 0, sf = 0;
    for (int i = 0; i < m; ++i) {
      sy += w[i] * y[i];
      sf += w[i] * fit[i];
    }
    CHECK(sf == doctest::Approx(sy).epsilon(1e-12));
  }
}

TEST_CASE("pava is non-expansive") {
  isocal::SplitMix64 g(13);
  for (int rep = 0; rep < 50; ++rep) {
    int m = 2 + static_cast<int>(g.next() % 20);
    std::vector<double> a(m), b(m), w(m);
    for (int i = 0; i < m; ++i) {
      a[i] = g.uniform(-3, 3);
      b[i] = g.uniform(-3, 3);
      w[i] = g.uniform(0.1, 2.0);
    }
    // Non-expansive in the weighted norm the fit minimizes.
    auto wdist = [&](const std::vector<double>& x, const std::vector<double>& y) {
      double s = 0.0;
      for (int i = 0; i < m; ++i) s += w[i] * (x[i] - y[i]) * (x[i] - y[i]);
      return s;
    };
    double lhs = wdist(pava_nonincreasing(a, w), pava_nonincreasing(b, w));
    CHECK(lhs <= wdist(a, b) * (1 + 1e-12));
  }
}

TEST_CASE("doubly monotone projection beats every lattice candidate") {
  // Exhaustive over 3x3 matrices with entries in {0, 0.5, 1}; oracle grid in
  // 0.025 steps.
  std::vector<double> levels;
  for (int k = 0; k <= 40; ++k) levels.push_back(k * 0.025);
  const double vals[3] = {0.0, 0.5, 1.0};
  for (int code = 0; code < 19683; ++code) {
    std::vector<double> M(9);
    int c = code;
    for (int k = 0; k < 9; ++k) {
      M[k] = vals[c % 3];
      c /= 3;
    }
    std::vector<double> P = M;
    project_doubly_monotone(P, 3, 3);
    REQUIRE(max_column_violation(P, 3, 3) <= 1e-8);
    REQUIRE(max_row_violation(P, 3, 3) <= 1e-8);
    double d = sq_dist(M, P);
    double best = oracles::min_sq_dist_doubly_monotone(M, 3, 3, levels);
    REQUIRE(d <= best + 1e-6);
  }
}

TEST_CASE("projection is idempotent, mean preserving and non-expansive") {
  isocal::SplitMix64 g(31);
  for (int rep = 0; rep < 40; ++rep) {
    int r = 2 + static_cast<int>(g.next() % 5);
    int c = 2 + static_cast<int>(g.next() % 7);
    std::vector<double> A(static_cast<size_t>(r) * c), B(A.size());
    for (auto& v : A) v = g.uniform(0, 1);
    for (auto& v : B) v = g.uniform(0, 1);
    std::vector<double> PA = A, PB = B;
    project_doubly_monotone(PA, r, c);
    project_doubly_monotone(PB, r, c);

    std::vector<double> PPA = PA;
    project_doubly_monotone(PPA, r, c);
    CHECK(std::sqrt(sq_dist(PPA, PA)) <= 1e-8);

    double sa = 0, spa = 0;
    for (size_t k = 0; k < A.size(); ++k) {
      sa += A[k];
      spa += PA[k];
    }
    CHECK(spa == doctest::Approx(sa).epsilon(1e-9));

    CHECK(sq_dist(PA, PB) <= sq_dist(A, B) * (1 + 1e-9) + 1e-12);
  }
}

TEST_CASE("sweep order does not change the limit") {
  // Projecting the transpose swaps both the constraint roles and the sweep
  // order; the projection is unique, so the results must agree.
  isocal::SplitMix64 g(77);
  for (int rep = 0; rep < 20; ++rep) {
    int r = 2 + static_cast<int>(g.next() % 4);
    int c = 2 + static_cast<int>(g.next() % 4);
    std::vector<double> A(static_cast<size_t>(r) * c);
    for (auto& v : A) v = g.uniform(0, 1);
    std::vector<double> P1 = A;
    project_doubly_monotone(P1, r, c);
    std::vector<double> P2 = transpose(A, r, c);
    project_doubly_monotone(P2, c, r);
    P2 = transpose(P2, c, r);
    CHECK(std::sqrt(sq_dist(P1, P2)) <= 1e-6);
  }
}

TEST_CASE("blocked kernel matches the serial reference bit for bit") {
  isocal::SplitMix64 g(55);
  for (int rep = 0; rep < 10; ++rep) {
    int r = 3 + static_cast<int>(g.next() % 30);
    int c = 3 + static_cast<int>(g.next() % 30);
    std::vector<double> A(static_cast<size_t>(r) * c);
    for (auto& v : A) v = g.uniform(0, 1);
    std::vector<double> P = A, R = A;
    auto res_p = project_doubly_monotone(P, r, c);
    auto res_r = isocal::reference::project_doubly_monotone(R, r, c);
    CHECK(res_p.iterations == res_r.iterations);
    CHECK(P == R);
  }
}

TEST_CASE("non-convergence raises with the last iterate attached") {
  std::vector<double> M{0, 1, 0.5, 1, 0, 0.25, 0.1, 0.9, 0.4};
  DoublyMonotoneOptions opt;
  opt.max_iter = 1;
  opt.tol = 1e-16;
  std::vector<double> S = M;
  try {
    project_doubly_monotone(S, 3, 3, opt);
    FAIL("expected non-convergence");
  } catch (const isocal::DykstraNonConvergence& e) {
    CHECK(e.iterations == 1);
    CHECK(e.last_iterate.size() == M.size());
    CHECK(e.last_change > 0.0);
  }
}

TEST_CASE("projection input validation") {
  std::vector<double> S{1, 0, 0, 1};
  CHECK_THROWS_AS(project_doubly_monotone(S, 3, 2), std::invalid_argument);
  std::vector<double> bad{1, std::nan(""), 0, 1};
  CHECK_THROWS_AS(project_doubly_monotone(bad, 2, 2), std::invalid_argument);
}

TEST_SUITE_END();
