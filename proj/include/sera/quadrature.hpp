#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "sera/io.hpp"
#include "sera/kernels.hpp"
#include "sera/parallel.hpp"

namespace sera {

/// Scattered sample locations inside the box I_{A,n}^q = [-3n/A, 3n/A]^q.
struct SampleSet {
  std::vector<Point> points;
  double box_A = 2.0 / std::sqrt(3.0);
  double box_n = 1.0;
  int q = 1;

  double box_radius() const { return 3.0 * box_n / box_A; }

  void validate() const {
    require(q >= 1, "SampleSet: q must be >= 1");
    require(box_A > 0.0 && box_n > 0.0, "SampleSet: box parameters must be positive");
    const double r = box_radius() * (1.0 + 1e-12);
    for (const auto& p : points) {
      require(static_cast<int>(p.size()) == q, "SampleSet: point dimension mismatch");
      require(sup_norm(p) <= r, "SampleSet: point outside I_{A,n}");
    }
  }
};

/// Fill distance (sup-norm, over-approximated to probe resolution) and
/// minimal pairwise sup-norm separation.
struct MeshStats {
  double mesh_norm = 0.0;   // delta
  double separation = 0.0;  // eta
};

namespace detail {

// Uniform cell grid over the box for sup-norm proximity queries.
struct CellGrid {
  double lo, cell;
  int ncell, q;
  std::map<long, std::vector<int>> cells;

  CellGrid(const SampleSet& s, int target_ncell) : q(s.q) {
    const double r = s.box_radius();
    lo = -r;
    ncell = std::max(1, target_ncell);
    cell = 2.0 * r / ncell;
    for (int i = 0; i < static_cast<int>(s.points.size()); ++i)
      cells[flat(coords(s.points[static_cast<std::size_t>(i)]))].push_back(i);
  }

  std::vector<int> coords(const Point& p) const {
    std::vector<int> c(static_cast<std::size_t>(q));
    for (int i = 0; i < q; ++i) {
      int v = static_cast<int>(std::floor((p[static_cast<std::size_t>(i)] - lo) / cell));
      c[static_cast<std::size_t>(i)] = std::clamp(v, 0, ncell - 1);
    }
    return c;
  }

  long flat(const std::vector<int>& c) const {
    long f = 0;
    for (int i = 0; i < q; ++i) f = f * ncell + c[static_cast<std::size_t>(i)];
    return f;
  }

  // Visits cells on the Chebyshev ring of radius `ring` around `center`.
  template <typename Fn>
  void for_ring(const std::vector<int>& center, int ring, Fn&& fn) const {
    std::vector<int> c(static_cast<std::size_t>(q));
    const std::function<void(int, bool)> rec = [&](int pos, bool on_shell) {
      if (pos == q) {
        if (on_shell || ring == 0) {
          auto it = cells.find(flat(c));
          if (it != cells.end())
            for (int id : it->second) fn(id);
        }
        return;
      }
      for (int d = -ring; d <= ring; ++d) {
        const int v = center[static_cast<std::size_t>(pos)] + d;
        if (v < 0 || v >= ncell) continue;
        c[static_cast<std::size_t>(pos)] = v;
        rec(pos + 1, on_shell || std::abs(d) == ring);
      }
    };
    rec(0, false);
  }

  // Nearest sup-norm distance from p to the stored points, excluding `skip`.
  double nearest(const std::vector<Point>& pts, const Point& p, int skip = -1) const {
    const auto c = coords(p);
    double best = HUGE_VAL;
    for (int ring = 0; ring < 2 * ncell + 2; ++ring) {
      if (best < (ring - 1) * cell) break;
      for_ring(c, ring, [&](int id) {
        if (id == skip) return;
        best = std::min(best, sup_dist(pts[static_cast<std::size_t>(id)], p));
      });
    }
    return best;
  }
};

}  // namespace detail

/// delta and eta of the set; the probe grid runs at `probe_spacing` per axis
/// and delta is padded by half a probe cell so it over-approximates.
inline MeshStats mesh_stats(const SampleSet& samples, double probe_spacing) {
  samples.validate();
  require(!samples.points.empty(), "mesh_stats: empty point set");
  require(probe_spacing > 0.0, "mesh_stats: probe spacing must be positive");
  const double r = samples.box_radius();
  const long naxis = std::max(2L, static_cast<long>(std::ceil(2.0 * r / probe_spacing)) + 1);
  const double h = 2.0 * r / static_cast<double>(naxis - 1);

  const int npts = static_cast<int>(samples.points.size());
  const long axis_cells =
      static_cast<long>(std::pow(double(npts), 1.0 / samples.q) / 2.0) + 1;
  const int target = static_cast<int>(std::clamp(axis_cells, 1L, 512L));
  detail::CellGrid grid(samples, target);

  double delta = 0.0;
  std::vector<long> idx(static_cast<std::size_t>(samples.q), 0);
  Point probe(static_cast<std::size_t>(samples.q));
  bool done = false;
  while (!done) {
    for (int i = 0; i < samples.q; ++i)
      probe[static_cast<std::size_t>(i)] = -r + h * static_cast<double>(idx[static_cast<std::size_t>(i)]);
    delta = std::max(delta, grid.nearest(samples.points, probe));
    for (int i = samples.q - 1; i >= 0; --i) {
      if (++idx[static_cast<std::size_t>(i)] < naxis) break;
      idx[static_cast<std::size_t>(i)] = 0;
      if (i == 0) done = true;
    }
  }
  delta += 0.5 * h;

  double eta = HUGE_VAL;
  if (npts >= 2) {
    for (int i = 0; i < npts; ++i)
      eta = std::min(eta, grid.nearest(samples.points, samples.points[static_cast<std::size_t>(i)], i));
  }
  return MeshStats{delta, eta};
}

/// Result of the one-point-per-cube thinning construction.
struct ThinResult {
  SampleSet thinned;
  std::vector<long> cube_index;  // per original point
  std::vector<char> kept;        // per original point
  double cube_side = 0.0;
  MeshStats stats_after{};
  bool uniformity_ok = false;  // eta <= 2 delta <= 4 eta after thinning
};

/// Partitions I_{A,n}^q into congruent cubes with side in [3 delta, 4 delta]
/// and keeps, per cube, the point nearest its center (ties lexicographic).
inline ThinResult thin_points(const SampleSet& samples, double probe_spacing = 0.0) {
  samples.validate();
  require(!samples.points.empty(), "thin_points: empty point set");
  const double r = samples.box_radius();
  if (probe_spacing <= 0.0)
    probe_spacing = std::max(1e-3, 2.0 * r / 2048.0);
  const MeshStats before = mesh_stats(samples, probe_spacing);
  const double delta = before.mesh_norm;

  const double side = 2.0 * r;
  const long k = std::max(1L, static_cast<long>(std::floor(side / (3.0 * delta))));
  const double cube = side / static_cast<double>(k);

  ThinResult result;
  result.cube_side = cube;
  result.cube_index.resize(samples.points.size());
  result.kept.assign(samples.points.size(), 0);

  std::map<long, int> best;  // cube id -> point index
  for (int i = 0; i < static_cast<int>(samples.points.size()); ++i) {
    const Point& p = samples.points[static_cast<std::size_t>(i)];
    long flat = 0;
    Point center(p.size());
    for (int d = 0; d < samples.q; ++d) {
      long c = static_cast<long>(std::floor((p[static_cast<std::size_t>(d)] + r) / cube));
      c = std::clamp(c, 0L, k - 1);
      flat = flat * k + c;
      center[static_cast<std::size_t>(d)] = -r + (static_cast<double>(c) + 0.5) * cube;
    }
    result.cube_index[static_cast<std::size_t>(i)] = flat;
    auto it = best.find(flat);
    if (it == best.end()) {
      best[flat] = i;
      continue;
    }
    const Point& cur = samples.points[static_cast<std::size_t>(it->second)];
    const double dn = dist2_sq(p, center), dc = dist2_sq(cur, center);
    if (dn < dc || (dn == dc && lex_less(p, cur))) it->second = i;
  }

  // Every cube whose volume intersects the box must own a point when delta
  // is a true over-approximation of the fill distance.
  long total_cubes = 1;
  for (int d = 0; d < samples.q; ++d) total_cubes *= k;
  if (static_cast<long>(best.size()) != total_cubes)
    throw std::logic_error("thin_points: a cube ended up empty (mesh norm inconsistent)");

  result.thinned.box_A = samples.box_A;
  result.thinned.box_n = samples.box_n;
  result.thinned.q = samples.q;
  for (const auto& [cube_id, idx] : best) {
    result.kept[static_cast<std::size_t>(idx)] = 1;
    result.thinned.points.push_back(samples.points[static_cast<std::size_t>(idx)]);
  }
  result.stats_after = mesh_stats(result.thinned, probe_spacing);
  const double d2 = 2.0 * result.stats_after.mesh_norm;
  result.uniformity_ok =
      result.stats_after.separation <= d2 && d2 <= 4.0 * result.stats_after.separation;
  return result;
}

enum class WeightMode { kMomentExact, kPaperLiteral };

struct QuadratureDiagnostics {
  double residual_norm = 0.0;
  double condition_estimate = 0.0;
  double sum_abs_weights = 0.0;
  double max_abs_weight = 0.0;
  double product_orthogonality_residual = -1.0;  // filled by the certificate
  int certificate_degree = -1;
  long rank = 0;
  long n_constraints = 0;
  bool density_ok = true;  // delta <= beta_hat / (n A) when checked
};

/// The discrete measure nu: scattered points with solved weights.
struct QuadratureMeasure {
  std::vector<Point> points;
  std::vector<double> weights;
  double A = 2.0 / std::sqrt(3.0);
  double n = 1.0;
  WeightMode mode = WeightMode::kMomentExact;
  int degree_budget = 0;
  QuadratureDiagnostics diagnostics{};

  int q() const { return points.empty() ? 1 : static_cast<int>(points[0].size()); }
};

/// Solves sum_y w_y psi_k(sqrt(2) A y) = RHS_k for |k|_1 <= degree_budget in
/// the least-squares sense, picking the minimum-norm solution when the
/// system is under-determined. RHS depends on the mode: the paper-literal
/// delta right-hand side, or the analytic Gaussian moments that make the
/// product identity hold by construction.
inline QuadratureMeasure solve_weights(const SampleSet& samples, int degree_budget,
                                       WeightMode mode = WeightMode::kMomentExact) {
  samples.validate();
  require(!samples.points.empty(), "solve_weights: empty point set");
  require(degree_budget >= 0, "solve_weights: degree budget must be >= 0");

  const int q = samples.q;
  const double A = samples.box_A;
  const auto ks = enumerate_multi_indices(q, degree_budget);
  const long ncon = static_cast<long>(ks.size());
  const long npts = static_cast<long>(samples.points.size());

  // Per-coordinate tables of psi_m(sqrt(2) A y_i).
  const double scale = std::sqrt(2.0) * A;
  std::vector<Eigen::MatrixXd> tables(static_cast<std::size_t>(q));
  {
    std::vector<double> coord(static_cast<std::size_t>(npts));
    for (int d = 0; d < q; ++d) {
      for (long i = 0; i < npts; ++i)
        coord[static_cast<std::size_t>(i)] =
            scale * samples.points[static_cast<std::size_t>(i)][static_cast<std::size_t>(d)];
      tables[static_cast<std::size_t>(d)] = hermite_table(coord, degree_budget);
    }
  }

  Eigen::MatrixXd M(ncon, npts);
  parallel_for(static_cast<std::size_t>(ncon), [&](std::size_t r) {
    const auto& k = ks[r];
    for (long c = 0; c < npts; ++c) {
      double v = 1.0;
      for (int d = 0; d < q; ++d)
        v *= tables[static_cast<std::size_t>(d)](c, k.entries[static_cast<std::size_t>(d)]);
      M(static_cast<Eigen::Index>(r), c) = v;
    }
  });

  Eigen::VectorXd b(ncon);
  if (mode == WeightMode::kPaperLiteral) {
    b.setZero();
    b(0) = std::pow(2.0 * A, -0.5 * q);
  } else {
    const auto moments = hermite_integrals(degree_budget);
    const double box_scale = std::pow(scale, -q);
    for (long r = 0; r < ncon; ++r) {
      double v = 1.0;
      for (int d = 0; d < q; ++d)
        v *= moments[static_cast<std::size_t>(ks[static_cast<std::size_t>(r)].entries[static_cast<std::size_t>(d)])];
      b(r) = box_scale * v;
    }
  }

  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
  cod.setThreshold(1e-10);
  cod.compute(M);
  const Eigen::VectorXd w = cod.solve(b);

  QuadratureMeasure qm;
  qm.points = samples.points;
  qm.weights.assign(w.data(), w.data() + w.size());
  qm.A = A;
  qm.n = samples.box_n;
  qm.mode = mode;
  qm.degree_budget = degree_budget;

  auto& diag = qm.diagnostics;
  diag.n_constraints = ncon;
  diag.rank = cod.rank();
  diag.residual_norm = (M * w - b).norm();
  const auto rdiag = cod.matrixT().diagonal().head(std::max<long>(1, diag.rank));
  const double dmax = rdiag.cwiseAbs().maxCoeff();
  const double dmin = rdiag.cwiseAbs().minCoeff();
  diag.condition_estimate = dmin > 0.0 ? dmax / dmin : HUGE_VAL;
  diag.sum_abs_weights = w.cwiseAbs().sum();
  diag.max_abs_weight = w.cwiseAbs().maxCoeff();
  return qm;
}

/// max over |k|_1, |j|_1 <= degree of
/// | sum_y w_y psi_k(2y/sqrt(3)) psi_j(2y/sqrt(3)) - (sqrt(3)/2)^q delta_{k-j} |.
/// The operative correctness certificate for the discrete SERO operator;
/// only defined at A = 2/sqrt(3).
inline double product_orthogonality_residual(const QuadratureMeasure& qm, int degree) {
  require(std::fabs(qm.A - 2.0 / std::sqrt(3.0)) <= 1e-12 * qm.A,
          "product_orthogonality_residual: requires A = 2/sqrt(3)");
  require(degree >= 0, "product_orthogonality_residual: degree must be >= 0");
  require(!qm.points.empty(), "product_orthogonality_residual: empty measure");

  const int q = qm.q();
  const auto ks = enumerate_multi_indices(q, degree);
  const long nk = static_cast<long>(ks.size());
  const long npts = static_cast<long>(qm.points.size());

  std::vector<Eigen::MatrixXd> tables(static_cast<std::size_t>(q));
  {
    std::vector<double> coord(static_cast<std::size_t>(npts));
    for (int d = 0; d < q; ++d) {
      for (long i = 0; i < npts; ++i)
        coord[static_cast<std::size_t>(i)] =
            2.0 * qm.points[static_cast<std::size_t>(i)][static_cast<std::size_t>(d)] / std::sqrt(3.0);
      tables[static_cast<std::size_t>(d)] = hermite_table(coord, degree);
    }
  }

  Eigen::MatrixXd G(nk, npts);
  parallel_for(static_cast<std::size_t>(nk), [&](std::size_t r) {
    const auto& k = ks[r];
    for (long c = 0; c < npts; ++c) {
      double v = 1.0;
      for (int d = 0; d < q; ++d)
        v *= tables[static_cast<std::size_t>(d)](c, k.entries[static_cast<std::size_t>(d)]);
      G(static_cast<Eigen::Index>(r), c) = v;
    }
  });

  const Eigen::VectorXd w =
      Eigen::Map<const Eigen::VectorXd>(qm.weights.data(), static_cast<Eigen::Index>(npts));
  const Eigen::MatrixXd R = G * w.asDiagonal() * G.transpose();
  const double target = std::pow(std::sqrt(3.0) / 2.0, q);
  double worst = 0.0;
  for (long i = 0; i < nk; ++i)
    for (long j = 0; j < nk; ++j)
      worst = std::max(worst, std::fabs(R(i, j) - (i == j ? target : 0.0)));
  return worst;
}

/// Weights CSV: columns y_1..y_q,w; full decimal precision.
inline void write_weights_csv(const std::string& path, const QuadratureMeasure& qm) {
  CsvTable t;
  const int q = qm.q();
  for (int d = 1; d <= q; ++d) t.header.push_back("y_" + std::to_string(d));
  t.header.push_back("w");
  for (std::size_t i = 0; i < qm.points.size(); ++i) {
    std::vector<double> row = qm.points[i];
    row.push_back(qm.weights[i]);
    t.rows.push_back(std::move(row));
  }
  write_csv(path, t);
}

inline QuadratureMeasure read_weights_csv(const std::string& path, double A, double n) {
  const CsvTable t = read_csv(path);
  require(t.header.size() >= 2, "weights CSV: need y_1..y_q,w columns");
  if (t.header.back() != "w") throw io_error("weights CSV: last column must be 'w'", 1);
  QuadratureMeasure qm;
  qm.A = A;
  qm.n = n;
  const std::size_t q = t.header.size() - 1;
  for (const auto& row : t.rows) {
    qm.points.emplace_back(row.begin(), row.begin() + static_cast<long>(q));
    qm.weights.push_back(row.back());
  }
  for (double w : qm.weights) {
    qm.diagnostics.sum_abs_weights += std::fabs(w);
    qm.diagnostics.max_abs_weight = std::max(qm.diagnostics.max_abs_weight, std::fabs(w));
  }
  return qm;
}

}  // namespace sera
