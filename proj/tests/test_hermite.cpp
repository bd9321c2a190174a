#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "sera/cutoff.hpp"
#include "sera/hermite.hpp"

using namespace sera;

namespace {

// Plain long-double recurrence, usable as an independent cross-check
// wherever the seed e^{-x^2/2} stays inside long-double range.
std::vector<long double> hermite_naive_ld(int m_max, long double x) {
  std::vector<long double> v(static_cast<std::size_t>(m_max) + 1);
  v[0] = 0.7511255444649424733L * std::exp(-0.5L * x * x);
  if (m_max >= 1) v[1] = std::sqrt(2.0L) * x * v[0];
  for (int j = 2; j <= m_max; ++j)
    v[j] = (x * v[j - 1] - std::sqrt(0.5L * (j - 1)) * v[j - 2]) / std::sqrt(0.5L * j);
  return v;
}

}  // namespace

TEST_CASE("hermite seed values at the origin") {
  const auto v0 = hermite_1d_all(0, 0.0);
  REQUIRE(v0.size() == 1);
  CHECK(v0[0] == Catch::Approx(0.7511255444649425).epsilon(1e-15));

  const auto v2 = hermite_1d_all(2, 0.0);
  CHECK(v2[1] == 0.0);
  // x = 0, j = 2 in the recurrence: 0 = psi_2(0) + sqrt(1/2) psi_0(0)
  const double expected = -0.7511255444649425 / std::sqrt(2.0);
  CHECK(v2[2] == Catch::Approx(expected).margin(1e-15));
  CHECK(v2[2] == Catch::Approx(-0.531126).margin(1e-6));
}

TEST_CASE("hermite rejects bad arguments") {
  CHECK_THROWS_AS(hermite_1d_all(0, std::nan("")), std::invalid_argument);
  CHECK_THROWS_AS(hermite_1d_all(0, INFINITY), std::invalid_argument);
  CHECK_THROWS_AS(hermite_1d_all(-1, 0.0), std::invalid_argument);
}

TEST_CASE("hermite orthonormality on [-20, 20]") {
  const int deg = 30;
  const double h = 1e-3;
  const long n = static_cast<long>(std::lround(40.0 / h)) + 1;
  std::vector<double> gram((deg + 1) * (deg + 1), 0.0);
  std::vector<double> psi(deg + 1);
  for (long i = 0; i < n; ++i) {
    const double x = -20.0 + h * static_cast<double>(i);
    const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    hermite_1d_into(deg, x, psi.data());
    for (int j = 0; j <= deg; ++j)
      for (int k = j; k <= deg; ++k) gram[j * (deg + 1) + k] += w * psi[j] * psi[k];
  }
  double worst = 0.0;
  for (int j = 0; j <= deg; ++j)
    for (int k = j; k <= deg; ++k) {
      const double v = gram[j * (deg + 1) + k] * h;
      worst = std::max(worst, std::fabs(v - (j == k ? 1.0 : 0.0)));
    }
  CHECK(worst <= 1e-8);
}

TEST_CASE("recurrence residual stays at rounding level") {
  const int deg = 200;
  std::vector<double> psi(deg + 1);
  for (double x = -30.0; x <= 30.0; x += 1.5) {
    hermite_1d_into(deg, x, psi.data());
    for (int j = 2; j <= deg; ++j) {
      const double res =
          x * psi[j - 1] - std::sqrt(0.5 * j) * psi[j] - std::sqrt(0.5 * (j - 1)) * psi[j - 2];
      REQUIRE(std::fabs(res) <= 1e-12 * std::max(1.0, std::fabs(x)));
    }
  }
}

TEST_CASE("hermite boundedness and n^{-1/4} bulk decay") {
  double prev = 1e9;
  for (int n : {16, 64, 144, 256}) {
    const double lim = std::sqrt(double(n)) * (1.0 - std::pow(double(n), -2.0 / 3.0));
    double mx = 0.0;
    std::vector<double> psi(n + 1);
    for (double x = -lim; x <= lim; x += lim / 400.0) {
      hermite_1d_into(n, x, psi.data());
      mx = std::max(mx, std::fabs(psi[n]));
    }
    CHECK(mx < 0.8);            // uniform bound
    CHECK(mx < prev * 1.02);    // monotone trend in the bulk
    const double scaled = mx * std::pow(double(n), 0.25);
    CHECK(scaled > 0.3);
    CHECK(scaled < 1.2);
    prev = mx;
  }
}

TEST_CASE("generating function partial sums") {
  // sum_j psi_j(x) w^j / sqrt(2^j j!) = pi^{-1/4} exp(-(x-w)^2/2 + w^2/4)
  std::vector<double> psi(61);
  for (double x : {-2.0, -0.3, 0.0, 1.0, 2.5}) {
    hermite_1d_into(60, x, psi.data());
    for (double w : {-1.0, -0.5, 0.25, 1.0}) {
      double sum = 0.0, coeff = 1.0;
      for (int j = 0; j <= 60; ++j) {
        sum += psi[j] * coeff;
        coeff *= w / std::sqrt(2.0 * (j + 1));
      }
      const double closed =
          0.7511255444649425 * std::exp(-0.5 * (x - w) * (x - w) + 0.25 * w * w);
      REQUIRE(std::fabs(sum - closed) <= 1e-8);
    }
  }
}

TEST_CASE("scaled recurrence survives far outside the classical range") {
  // Degree cap needed by the kernels: 4 * n_max^2 with n_max = 8.
  const int deg = 4 * 64;
  for (double x : {3.0, 12.0, 26.0, 40.0}) {
    const auto ours = hermite_1d_all(deg, x);
    const auto ref = hermite_naive_ld(deg, static_cast<long double>(x));
    for (int m = 0; m <= deg; ++m) {
      REQUIRE(std::isfinite(ours[m]));
      const double r = static_cast<double>(ref[m]);
      if (std::fabs(r) > 1e-280)
        REQUIRE(ours[m] == Catch::Approx(r).epsilon(1e-9).margin(1e-290));
    }
  }
  // Beyond the reachable degrees every value must be a true (tiny) zero.
  const auto far = hermite_1d_all(64, 60.0);
  for (double v : far) REQUIRE(std::fabs(v) < 1e-300);
}

TEST_CASE("multi-index enumeration and norms") {
  const auto idx = enumerate_multi_indices(2, 3);
  REQUIRE(idx.size() == 10);  // C(5, 2)
  CHECK(idx[0].entries == std::vector<int>{0, 0});
  CHECK(idx[1].entries == std::vector<int>{0, 1});
  CHECK(idx[2].entries == std::vector<int>{1, 0});
  for (std::size_t i = 1; i < idx.size(); ++i) {
    const int a = idx[i - 1].one_norm(), b = idx[i].one_norm();
    REQUIRE(a <= b);
    if (a == b) REQUIRE(idx[i - 1].entries < idx[i].entries);
  }
  CHECK(MultiIndex{{2, 0, 5}}.one_norm() == 7);
  CHECK(MultiIndex{{2, 0, 5}}.inf_norm() == 5);
}

TEST_CASE("multivariate hermite values") {
  CHECK(hermite_multi(MultiIndex{{0, 0}}, {0.0, 0.0}) ==
        Catch::Approx(1.0 / std::sqrt(pi_v)).epsilon(1e-14));
  for (double a : {-1.0, 0.0, 0.7, 3.0})
    CHECK(hermite_multi(MultiIndex{{1, 0}}, {0.0, a}) == 0.0);
  CHECK(hermite_multi(MultiIndex{{2}}, {0.0}) == Catch::Approx(-0.531126).margin(1e-6));
  CHECK_THROWS_AS(hermite_multi(MultiIndex{{1, 2}}, {0.0}), std::invalid_argument);
}

TEST_CASE("gaussian moments of hermite functions") {
  // Independent oracle: trapezoid integration on [-30, 30].
  const int deg = 20;
  const double h = 1e-3;
  const long n = static_cast<long>(std::lround(60.0 / h)) + 1;
  std::vector<double> acc(deg + 1, 0.0), psi(deg + 1);
  for (long i = 0; i < n; ++i) {
    const double x = -30.0 + h * static_cast<double>(i);
    const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    hermite_1d_into(deg, x, psi.data());
    for (int m = 0; m <= deg; ++m) acc[m] += w * psi[m];
  }
  const auto closed = hermite_integrals(deg);
  CHECK(closed[0] == Catch::Approx(std::sqrt(2.0) * std::pow(pi_v, 0.25)).epsilon(1e-14));
  for (int m = 0; m <= deg; ++m)
    REQUIRE(std::fabs(acc[m] * h - closed[m]) <= 1e-8);
}

TEST_CASE("cutoff plateaus, midpoint and monotonicity") {
  const CutoffSpec spec{};
  CHECK(cutoff_h(spec, 0.25) == 1.0);
  CHECK(cutoff_h(spec, 0.5) == 1.0);
  CHECK(cutoff_h(spec, 1.0) == 0.0);
  CHECK(cutoff_h(spec, 1.5) == 0.0);
  CHECK(cutoff_h(spec, 0.75) == Catch::Approx(0.5).epsilon(1e-14));
  double prev = 1.0;
  for (double t = 0.0; t <= 1.3; t += 0.004) {
    const double v = cutoff_h(spec, t);
    REQUIRE(v >= 0.0);
    REQUIRE(v <= 1.0);
    REQUIRE(v <= prev + 1e-15);
    prev = v;
  }
  CHECK_THROWS_AS(cutoff_h(spec, -0.1), std::invalid_argument);

  CutoffSpec smooth;
  smooth.shape = CutoffShape::kSmoothstep;
  CHECK(cutoff_h(smooth, 0.25) == 1.0);
  CHECK(cutoff_h(smooth, 1.5) == 0.0);
  CHECK(cutoff_h(smooth, 0.75) == Catch::Approx(0.5).epsilon(1e-14));
}
