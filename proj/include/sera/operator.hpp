#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <vector>

#include "sera/io.hpp"
#include "sera/quadrature.hpp"

namespace sera {

/// Uniform lattice over [-3 sqrt(3) level / 2, 3 sqrt(3) level / 2]^q:
/// multiples of the spacing, with the two box corners appended per axis
/// when they are not lattice points already.
struct EvaluationGrid {
  double level = 1.0;
  double spacing = 1.0;
  int q = 1;
  std::vector<double> axis;   // shared per-dimension coordinates, ascending
  std::vector<Point> points;  // odometer order, last dimension fastest

  double box_radius() const { return 1.5 * std::sqrt(3.0) * level; }
};

inline EvaluationGrid build_grid(double level, int q, double spacing) {
  require(level > 0.0 && std::isfinite(level), "build_grid: level must be positive");
  require(q >= 1, "build_grid: q must be >= 1");
  require(spacing > 0.0, "build_grid: spacing must be positive");
  EvaluationGrid grid;
  grid.level = level;
  grid.spacing = spacing;
  grid.q = q;
  const double r = grid.box_radius();
  require(spacing <= 2.0 * r, "build_grid: spacing larger than box side");
  const long kmax = static_cast<long>(std::floor(r / spacing + 1e-12));
  for (long k = -kmax; k <= kmax; ++k) grid.axis.push_back(spacing * static_cast<double>(k));
  if (std::fabs(grid.axis.front() - (-r)) > 1e-12 * (1.0 + r)) {
    grid.axis.insert(grid.axis.begin(), -r);
    grid.axis.push_back(r);
  }
  const long naxis = static_cast<long>(grid.axis.size());
  long total = 1;
  for (int d = 0; d < q; ++d) total *= naxis;
  grid.points.reserve(static_cast<std::size_t>(total));
  std::vector<long> idx(static_cast<std::size_t>(q), 0);
  for (long i = 0; i < total; ++i) {
    Point p(static_cast<std::size_t>(q));
    for (int d = 0; d < q; ++d) p[static_cast<std::size_t>(d)] = grid.axis[static_cast<std::size_t>(idx[static_cast<std::size_t>(d)])];
    grid.points.push_back(std::move(p));
    for (int d = q - 1; d >= 0; --d) {
      if (++idx[static_cast<std::size_t>(d)] < naxis) break;
      idx[static_cast<std::size_t>(d)] = 0;
    }
  }
  return grid;
}

struct FieldValues;

/// Dense realization of the discrete SERO operator:
/// entry(x, y) = w_y Phi_n*(x, y) e^{-|y|^2/3}.
struct OperatorMatrix {
  EvaluationGrid grid;
  std::vector<Point> sample_points;
  double level = 1.0;  // the n used in Phi_n*
  Eigen::MatrixXd entries;

  FieldValues apply(const std::vector<double>& data) const;
};

/// Field of the operator applied to data, one value per evaluation point.
struct FieldValues {
  std::vector<Point> points;
  std::vector<double> values;
};

namespace detail {

inline void check_operator_inputs(const QuadratureMeasure& qm, const KernelSpec& spec) {
  spec.validate();
  require(std::fabs(qm.A - 2.0 / std::sqrt(3.0)) <= 1e-12 * qm.A,
          "operator: quadrature measure must have A = 2/sqrt(3)");
  require(!qm.points.empty(), "operator: empty quadrature measure");
  require(qm.q() == spec.q, "operator: dimension mismatch between measure and kernel");
  require(qm.degree_budget >= static_cast<int>(std::ceil(2.0 * spec.n * spec.n)),
          "operator: weight degree budget below 2 n^2");
}

// Per-sample factors w_y e^{-|y|^2/3}.
inline Eigen::VectorXd sample_factors(const QuadratureMeasure& qm) {
  Eigen::VectorXd f(static_cast<Eigen::Index>(qm.points.size()));
  for (std::size_t i = 0; i < qm.points.size(); ++i)
    f(static_cast<Eigen::Index>(i)) = qm.weights[i] * std::exp(-norm2_sq(qm.points[i]) / 3.0);
  return f;
}

}  // namespace detail

inline OperatorMatrix assemble_operator(const QuadratureMeasure& qm, const EvaluationGrid& grid,
                                        const KernelSpec& spec) {
  detail::check_operator_inputs(qm, spec);
  require(grid.q == spec.q, "assemble_operator: grid dimension mismatch");

  const auto idx = enumerate_multi_indices(spec.q, spec.degree_cap() - 1);
  const Eigen::MatrixXd bx = multi_product_table(grid.points, idx, spec.q, 1.0);
  const Eigen::MatrixXd by =
      multi_product_table(qm.points, idx, spec.q, 2.0 / std::sqrt(3.0));
  const Eigen::VectorXd w = phi_star_multi_weights(spec, idx) * phi_star_prefactor(spec);
  const Eigen::VectorXd col = detail::sample_factors(qm);

  OperatorMatrix op;
  op.grid = grid;
  op.sample_points = qm.points;
  op.level = spec.n;
  op.entries.noalias() = bx * w.asDiagonal() * by.transpose();
  op.entries = op.entries * col.asDiagonal();
  return op;
}

inline FieldValues OperatorMatrix::apply(const std::vector<double>& data) const {
  require(data.size() == sample_points.size(), "apply: data length mismatch");
  const Eigen::VectorXd g =
      Eigen::Map<const Eigen::VectorXd>(data.data(), static_cast<Eigen::Index>(data.size()));
  const Eigen::VectorXd v = entries * g;
  FieldValues f;
  f.points = grid.points;
  f.values.assign(v.data(), v.data() + v.size());
  return f;
}

/// Same linear map as assemble + apply, evaluated at an arbitrary point list
/// through the multi-index factorization; no grid-by-sample matrix is formed.
inline FieldValues apply_at_points(const QuadratureMeasure& qm, const std::vector<Point>& eval_pts,
                                   const KernelSpec& spec, const std::vector<double>& data) {
  detail::check_operator_inputs(qm, spec);
  require(data.size() == qm.points.size(), "apply_at_points: data length mismatch");
  const auto idx = enumerate_multi_indices(spec.q, spec.degree_cap() - 1);
  const Eigen::MatrixXd by =
      multi_product_table(qm.points, idx, spec.q, 2.0 / std::sqrt(3.0));
  Eigen::VectorXd cg = detail::sample_factors(qm);
  for (Eigen::Index i = 0; i < cg.size(); ++i) cg(i) *= data[static_cast<std::size_t>(i)];
  const Eigen::VectorXd moments = by.transpose() * cg;
  const Eigen::VectorXd w = phi_star_multi_weights(spec, idx) * phi_star_prefactor(spec);
  const Eigen::MatrixXd bx = multi_product_table(eval_pts, idx, spec.q, 1.0);
  const Eigen::VectorXd v = bx * w.cwiseProduct(moments);
  FieldValues f;
  f.points = eval_pts;
  f.values.assign(v.data(), v.data() + v.size());
  return f;
}

/// Fine-grid trapezoid approximation of
/// int f(u) Phi_n*(x, u) e^{-|u|^2/3} du over the padded working box;
/// the test oracle for the discrete operator.
inline double continuous_sero_oracle(const KernelSpec& spec,
                                     const std::function<double(const Point&)>& f, const Point& x,
                                     double grid_spacing) {
  spec.validate();
  require(static_cast<int>(x.size()) == spec.q, "continuous_sero_oracle: dimension mismatch");
  if (!(grid_spacing > 0.0 && grid_spacing <= 0.05))
    throw config_error("continuous_sero_oracle: grid spacing must be in (0, 0.05]");
  const double radius = 1.5 * std::sqrt(3.0) * spec.n + 10.0;
  const long naxis = static_cast<long>(std::ceil(2.0 * radius / grid_spacing)) + 1;
  const double h = 2.0 * radius / static_cast<double>(naxis - 1);

  const int cap = spec.degree_cap();
  const auto idx = enumerate_multi_indices(spec.q, cap - 1);
  const Eigen::VectorXd w = phi_star_multi_weights(spec, idx) * phi_star_prefactor(spec);

  std::vector<double> axis(static_cast<std::size_t>(naxis));
  for (long i = 0; i < naxis; ++i) axis[static_cast<std::size_t>(i)] = -radius + h * static_cast<double>(i);
  const Eigen::MatrixXd tab = hermite_table(
      [&] {
        std::vector<double> scaled(axis);
        for (auto& v : scaled) v *= 2.0 / std::sqrt(3.0);
        return scaled;
      }(),
      cap - 1);
  Eigen::MatrixXd psi_x(spec.q, cap);
  {
    std::vector<double> buf(static_cast<std::size_t>(cap));
    for (int d = 0; d < spec.q; ++d) {
      hermite_1d_into(cap - 1, x[static_cast<std::size_t>(d)], buf.data());
      for (int m = 0; m < cap; ++m) psi_x(d, m) = buf[static_cast<std::size_t>(m)];
    }
  }

  std::vector<long> ic(static_cast<std::size_t>(spec.q), 0);
  Point u(static_cast<std::size_t>(spec.q));
  double integral = 0.0;
  bool done = false;
  while (!done) {
    double wtrap = 1.0;
    for (int d = 0; d < spec.q; ++d) {
      const long a = ic[static_cast<std::size_t>(d)];
      if (a == 0 || a == naxis - 1) wtrap *= 0.5;
      u[static_cast<std::size_t>(d)] = axis[static_cast<std::size_t>(a)];
    }
    double star = 0.0;
    for (std::size_t j = 0; j < idx.size(); ++j) {
      double prod = 1.0;
      for (int d = 0; d < spec.q; ++d)
        prod *= psi_x(d, idx[j].entries[static_cast<std::size_t>(d)]) *
                tab(static_cast<Eigen::Index>(ic[static_cast<std::size_t>(d)]),
                    idx[j].entries[static_cast<std::size_t>(d)]);
      star += w(static_cast<Eigen::Index>(j)) * prod;
    }
    integral += wtrap * f(u) * star * std::exp(-norm2_sq(u) / 3.0);
    for (int d = spec.q - 1; d >= 0; --d) {
      if (++ic[static_cast<std::size_t>(d)] < naxis) break;
      ic[static_cast<std::size_t>(d)] = 0;
      if (d == 0) done = true;
    }
  }
  return integral * std::pow(h, spec.q);
}

/// Field dump: columns x_1..x_q,value.
inline void write_field_csv(const std::string& path, const FieldValues& field) {
  CsvTable t;
  const int q = field.points.empty() ? 1 : static_cast<int>(field.points[0].size());
  for (int d = 1; d <= q; ++d) t.header.push_back("x_" + std::to_string(d));
  t.header.push_back("value");
  for (std::size_t i = 0; i < field.points.size(); ++i) {
    std::vector<double> row = field.points[i];
    row.push_back(field.values[i]);
    t.rows.push_back(std::move(row));
  }
  write_csv(path, t);
}

}  // namespace sera
