#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <map>
#include <set>

#include "sera/quadrature.hpp"

using namespace sera;

namespace {

struct TestRng {
  std::uint64_t state;
  explicit TestRng(std::uint64_t seed) : state(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(next() >> 11) * 0x1.0p-53);
  }
};

SampleSet lattice_1d(double A, double n, double pitch, double jitter, std::uint64_t seed) {
  SampleSet s;
  s.box_A = A;
  s.box_n = n;
  s.q = 1;
  TestRng rng(seed);
  const double r = s.box_radius();
  for (double x = -r; x <= r + 1e-12; x += pitch) {
    double v = x + (jitter > 0.0 ? rng.uniform(-jitter, jitter) : 0.0);
    v = std::clamp(v, -r, r);
    s.points.push_back({v});
  }
  return s;
}

const double kA = 2.0 / std::sqrt(3.0);

}  // namespace

TEST_CASE("mesh stats on elementary configurations") {
  // Single point at the center of [-3, 3].
  SampleSet single;
  single.box_A = 1.0;
  single.box_n = 1.0;
  single.q = 1;
  single.points = {{0.0}};
  const auto st = mesh_stats(single, 0.01);
  CHECK(st.mesh_norm == Catch::Approx(3.0).margin(0.02));

  // Uniform grid with spacing h: delta = h/2 up to probe resolution.
  const auto grid = lattice_1d(1.0, 1.0, 0.25, 0.0, 0);
  const auto gs = mesh_stats(grid, 0.01);
  CHECK(gs.mesh_norm == Catch::Approx(0.125).margin(0.02));
  CHECK(gs.separation == Catch::Approx(0.25).margin(1e-12));

  SampleSet empty;
  empty.q = 1;
  CHECK_THROWS_AS(mesh_stats(empty, 0.01), std::invalid_argument);
}

TEST_CASE("mesh norm scaling invariance") {
  // A delta_{A,n}(C) = B delta_{B,n}(C') where C' = (A/B) C lives in I_{B,n}.
  const double A = 1.0, B = 2.5;
  auto base = lattice_1d(A, 2.0, 0.21, 0.04, 9);
  SampleSet scaled;
  scaled.box_A = B;
  scaled.box_n = 2.0;
  scaled.q = 1;
  for (const auto& p : base.points) scaled.points.push_back({p[0] * A / B});
  const auto s0 = mesh_stats(base, 0.005);
  const auto s1 = mesh_stats(scaled, 0.005 * A / B);
  CHECK(A * s0.mesh_norm == Catch::Approx(B * s1.mesh_norm).margin(0.02));
  CHECK(A * s0.separation == Catch::Approx(B * s1.separation).margin(1e-9));
}

TEST_CASE("thinning a uniform grid keeps one point per cube") {
  const auto grid = lattice_1d(1.0, 1.0, 0.1, 0.0, 0);
  const auto thin = thin_points(grid, 0.01);
  std::set<long> ids(thin.cube_index.begin(), thin.cube_index.end());
  CHECK(thin.thinned.points.size() == ids.size());
  CHECK(thin.uniformity_ok);
}

TEST_CASE("a dense cluster inside one cube keeps exactly one survivor") {
  auto s = lattice_1d(1.0, 1.0, 0.2, 0.0, 0);
  const std::size_t base_count = s.points.size();
  for (double eps : {1e-3, 2e-3, 3e-3, 4e-3}) s.points.push_back({0.4 + eps});
  const auto thin = thin_points(s, 0.01);
  CHECK(thin.thinned.points.size() < base_count + 4);
  std::map<long, int> per_cube;
  for (std::size_t i = 0; i < s.points.size(); ++i)
    if (thin.kept[i]) per_cube[thin.cube_index[i]]++;
  for (const auto& [id, cnt] : per_cube) {
    (void)id;
    REQUIRE(cnt == 1);
  }
}

TEST_CASE("post-thinning mesh ratio on random sets") {
  int pass = 0, total = 0;
  for (int q : {1, 2}) {
    for (int trial = 0; trial < 50; ++trial) {
      TestRng rng(1000ULL * static_cast<std::uint64_t>(q) + static_cast<std::uint64_t>(trial));
      SampleSet s;
      s.box_A = 1.0;
      s.box_n = 1.0;
      s.q = q;
      const double r = s.box_radius();
      const int npts = q == 1 ? 150 : 900;
      for (int i = 0; i < npts; ++i) {
        Point p(static_cast<std::size_t>(q));
        for (auto& v : p) v = rng.uniform(-r, r);
        s.points.push_back(std::move(p));
      }
      const auto thin = thin_points(s, q == 1 ? 0.01 : 0.03);
      ++total;
      if (thin.uniformity_ok) ++pass;
      const double d2 = 2.0 * thin.stats_after.mesh_norm;
      REQUIRE(thin.stats_after.separation <= d2 + 1e-12);
    }
  }
  // eta <= 2 delta holds unconditionally; 2 delta <= 4 eta on these draws.
  CHECK(pass == total);
}

TEST_CASE("paper-literal weights reproduce the k = 0 row") {
  auto s = lattice_1d(kA, 3.0, 0.12, 0.02, 3);
  const auto qm = solve_weights(s, 8, WeightMode::kPaperLiteral);
  REQUIRE(qm.diagnostics.residual_norm <= 1e-10);
  double row0 = 0.0;
  for (std::size_t i = 0; i < qm.points.size(); ++i)
    row0 += qm.weights[i] * std::exp(-kA * kA * qm.points[i][0] * qm.points[i][0]);
  const double expected = std::pow(pi_v, 0.25) * std::sqrt(std::sqrt(3.0) / 4.0);
  CHECK(row0 == Catch::Approx(expected).epsilon(1e-9));
  CHECK(row0 == Catch::Approx(0.876).margin(2e-4));
}

TEST_CASE("moment-exact weights reproduce Gaussian moments") {
  auto s = lattice_1d(kA, 3.0, 0.12, 0.02, 4);
  const auto qm = solve_weights(s, 12, WeightMode::kMomentExact);
  REQUIRE(qm.diagnostics.residual_norm <= 1e-10);
  double row0 = 0.0;
  for (std::size_t i = 0; i < qm.points.size(); ++i)
    row0 += qm.weights[i] * hermite_1d(0, std::sqrt(2.0) * kA * qm.points[i][0]);
  CHECK(row0 == Catch::Approx(std::pow(pi_v, 0.25) / kA).epsilon(1e-9));
}

TEST_CASE("reflection-symmetric points give reflection-symmetric weights") {
  SampleSet s;
  s.box_A = kA;
  s.box_n = 2.0;
  s.q = 1;
  const double r = s.box_radius();
  for (double x = 0.05; x <= r; x += 0.11) {
    s.points.push_back({x});
    s.points.push_back({-x});
  }
  const auto qm = solve_weights(s, 10, WeightMode::kMomentExact);
  for (std::size_t i = 0; i < qm.points.size(); i += 2)
    REQUIRE(qm.weights[i] == Catch::Approx(qm.weights[i + 1]).margin(1e-8));
}

TEST_CASE("product orthogonality certificate on the standard fixture") {
  auto s = lattice_1d(kA, std::sqrt(2.0) * 3.0, 0.082, 0.015, 7);
  const auto qm = solve_weights(s, 36, WeightMode::kMomentExact);
  REQUIRE(qm.diagnostics.residual_norm <= 1e-8);
  const double res = product_orthogonality_residual(qm, 18);
  CHECK(res <= 1e-6);

  // degree 0 equals the single direct check.
  double direct = 0.0;
  for (std::size_t i = 0; i < qm.points.size(); ++i) {
    const double p0 = hermite_1d(0, 2.0 * qm.points[i][0] / std::sqrt(3.0));
    direct += qm.weights[i] * p0 * p0;
  }
  const double r0 = product_orthogonality_residual(qm, 0);
  CHECK(r0 == Catch::Approx(std::fabs(direct - std::sqrt(3.0) / 2.0)).margin(1e-14));

  // Residual grows weakly with degree (max over a superset).
  const double r6 = product_orthogonality_residual(qm, 6);
  const double r12 = product_orthogonality_residual(qm, 12);
  CHECK(r0 <= r6 + 1e-15);
  CHECK(r6 <= r12 + 1e-15);
  CHECK(r12 <= res + 1e-15);

  QuadratureMeasure bad = qm;
  bad.A = 1.0;
  CHECK_THROWS_AS(product_orthogonality_residual(bad, 2), std::invalid_argument);
}

TEST_CASE("sum of absolute weights scales like n^q") {
  std::vector<double> scaled;
  for (double n : {2.0, 3.0, 4.0}) {
    const double cls = std::sqrt(2.0) * n;
    auto s = lattice_1d(kA, cls, 0.25 / (cls * kA), 0.0, 0);
    const auto qm = solve_weights(s, static_cast<int>(4 * n * n), WeightMode::kMomentExact);
    scaled.push_back(qm.diagnostics.sum_abs_weights / n);
  }
  const double mx = *std::max_element(scaled.begin(), scaled.end());
  const double mn = *std::min_element(scaled.begin(), scaled.end());
  CHECK(mx / mn <= 3.0);
}

TEST_CASE("degenerate q = 2 geometry is reported, not fatal") {
  SampleSet s;
  s.box_A = kA;
  s.box_n = 2.0;
  s.q = 2;
  for (double x = -3.0; x <= 3.0; x += 0.1) s.points.push_back({x, 0.0});  // collinear
  const auto qm = solve_weights(s, 6, WeightMode::kMomentExact);
  CHECK(qm.diagnostics.rank < qm.diagnostics.n_constraints);
  CHECK(qm.diagnostics.residual_norm > 1e-8);
}

TEST_CASE("weights CSV round-trip is exact") {
  auto s = lattice_1d(kA, 2.0, 0.3, 0.05, 11);
  const auto qm = solve_weights(s, 6, WeightMode::kMomentExact);
  const std::string path = "/tmp/sera_test_weights.csv";
  write_weights_csv(path, qm);
  const auto back = read_weights_csv(path, qm.A, qm.n);
  REQUIRE(back.points.size() == qm.points.size());
  for (std::size_t i = 0; i < qm.points.size(); ++i) {
    REQUIRE(back.points[i][0] == qm.points[i][0]);
    REQUIRE(back.weights[i] == qm.weights[i]);
  }
}
