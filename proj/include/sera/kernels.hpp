#pragma once

#include <Eigen/Core>
#include <cmath>
#include <vector>

#include "sera/cutoff.hpp"
#include "sera/hermite.hpp"

namespace sera {

/// Parameters of the localized kernels Phi_n and Phi_n*. The sums run over
/// multi-indices with |j|_1 < n^2; H kills everything beyond.
struct KernelSpec {
  double n = 1.0;       // resolution parameter
  int q = 1;            // dimension
  int S = 3;            // localization exponent used when estimating constants
  CutoffSpec cutoff{};

  int degree_cap() const { return static_cast<int>(std::ceil(n * n)); }

  void validate() const {
    require(n > 0.0 && std::isfinite(n), "KernelSpec: n must be positive");
    require(q >= 1, "KernelSpec: q must be >= 1");
    require(S > q, "KernelSpec: S must exceed q");
  }
};

inline KernelSpec make_kernel_spec(double n, int q) {
  KernelSpec spec;
  spec.n = n;
  spec.q = q;
  spec.S = q + 2;
  spec.validate();
  return spec;
}

/// Layer weights H(sqrt(m)/n) for m = 0 .. cap-1 (without the n^{-q} factor).
inline std::vector<double> phi_layer_weights(const KernelSpec& spec) {
  const int cap = spec.degree_cap();
  std::vector<double> w(static_cast<std::size_t>(cap));
  for (int m = 0; m < cap; ++m) w[m] = cutoff_h(spec.cutoff, std::sqrt(double(m)) / spec.n);
  return w;
}

/// Layer weights H(sqrt(m)/n) 3^{m/2} of Phi_n* (without the prefactor).
inline std::vector<double> phi_star_layer_weights(const KernelSpec& spec) {
  const int cap = spec.degree_cap();
  std::vector<double> w(static_cast<std::size_t>(cap));
  for (int m = 0; m < cap; ++m)
    w[m] = cutoff_h(spec.cutoff, std::sqrt(double(m)) / spec.n) * std::pow(3.0, 0.5 * m);
  return w;
}

inline double phi_star_prefactor(const KernelSpec& spec) {
  return std::pow(2.0 / (spec.n * spec.n * pi_v), 0.5 * spec.q);
}

namespace detail {

// Total-degree layers P_m = sum_{|j|_1 = m} prod_i seq[i][j_i]: the q-fold
// truncated convolution of the per-coordinate degree sequences.
inline std::vector<double> degree_layers(const std::vector<std::vector<double>>& seq, int cap) {
  std::vector<double> acc = seq[0];
  std::vector<double> next(static_cast<std::size_t>(cap));
  for (std::size_t i = 1; i < seq.size(); ++i) {
    std::fill(next.begin(), next.end(), 0.0);
    const auto& s = seq[i];
    for (int m1 = 0; m1 < cap; ++m1) {
      const double a = acc[m1];
      if (a == 0.0) continue;
      const int lim = cap - m1;
      for (int m2 = 0; m2 < lim; ++m2) next[m1 + m2] += a * s[m2];
    }
    std::swap(acc, next);
  }
  return acc;
}

// Per-coordinate sequences u_i[m] = psi_m(a_i) psi_m(b_i), m < cap.
inline std::vector<std::vector<double>> coordinate_products(const Point& a, const Point& b,
                                                            int cap) {
  const int q = static_cast<int>(a.size());
  std::vector<std::vector<double>> seq(q);
  std::vector<double> pa(static_cast<std::size_t>(cap)), pb(static_cast<std::size_t>(cap));
  for (int i = 0; i < q; ++i) {
    hermite_1d_into(cap - 1, a[i], pa.data());
    hermite_1d_into(cap - 1, b[i], pb.data());
    seq[i].resize(static_cast<std::size_t>(cap));
    for (int m = 0; m < cap; ++m) seq[i][m] = pa[m] * pb[m];
  }
  return seq;
}

}  // namespace detail

/// Phi_n(x, y) = n^{-q} sum_j H(sqrt(|j|_1)/n) psi_j(x) psi_j(y), evaluated
/// by total-degree layering.
inline double phi_n(const KernelSpec& spec, const Point& x, const Point& y) {
  spec.validate();
  require(static_cast<int>(x.size()) == spec.q && static_cast<int>(y.size()) == spec.q,
          "phi_n: dimension mismatch");
  const int cap = spec.degree_cap();
  const auto layers = detail::degree_layers(detail::coordinate_products(x, y, cap), cap);
  const auto weights = phi_layer_weights(spec);
  double s = 0.0;
  for (int m = 0; m < cap; ++m) s += weights[m] * layers[m];
  return s * std::pow(spec.n, -spec.q);
}

/// Phi_n*(x, y) = (2/(n^2 pi))^{q/2} sum_j H(sqrt(|j|_1)/n) 3^{|j|_1/2}
///               psi_j(x) psi_j(2y/sqrt(3)).
inline double phi_n_star(const KernelSpec& spec, const Point& x, const Point& y) {
  spec.validate();
  require(static_cast<int>(x.size()) == spec.q && static_cast<int>(y.size()) == spec.q,
          "phi_n_star: dimension mismatch");
  const int cap = spec.degree_cap();
  Point y_scaled(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) y_scaled[i] = 2.0 * y[i] / std::sqrt(3.0);
  const auto layers = detail::degree_layers(detail::coordinate_products(x, y_scaled, cap), cap);
  const auto weights = phi_star_layer_weights(spec);
  double s = 0.0;
  for (int m = 0; m < cap; ++m) s += weights[m] * layers[m];
  return s * phi_star_prefactor(spec);
}

inline double phi_diag(const KernelSpec& spec, const Point& x) { return phi_n(spec, x, x); }

/// Closed form of sum_j psi_j(y) psi_j(z) r^{|j|_1} for |r| < 1.
inline double mehler_closed_form(int q, double r, const Point& y, const Point& z) {
  require(q >= 1, "mehler_closed_form: q must be >= 1");
  require(std::fabs(r) < 1.0, "mehler_closed_form: |r| must be < 1");
  require(static_cast<int>(y.size()) == q && static_cast<int>(z.size()) == q,
          "mehler_closed_form: dimension mismatch");
  const double r2 = r * r;
  const double yy = norm2_sq(y), zz = norm2_sq(z), yz = dot(y, z);
  const double expo = (2.0 * yz * r - (yy + zz) * r2) / (1.0 - r2) - 0.5 * (yy + zz);
  return std::pow(pi_v * (1.0 - r2), -0.5 * q) * std::exp(expo);
}

/// The r = 1/sqrt(3) specialization:
/// (3/(2 pi))^{q/2} exp(-|y - (sqrt(3)/2) z|^2) exp(-|z|^2/4).
inline double mehler_special(int q, const Point& y, const Point& z) {
  require(q >= 1, "mehler_special: q must be >= 1");
  require(static_cast<int>(y.size()) == q && static_cast<int>(z.size()) == q,
          "mehler_special: dimension mismatch");
  double shifted = 0.0;
  for (int i = 0; i < q; ++i) {
    const double d = y[i] - 0.5 * std::sqrt(3.0) * z[i];
    shifted += d * d;
  }
  return std::pow(1.5 / pi_v, 0.5 * q) * std::exp(-shifted - 0.25 * norm2_sq(z));
}

/// |Phi_n(x,y) - int e^{-|y-u|^2} Phi_n*(x,u) e^{-|u|^2/3} du| on a tensor
/// trapezoid grid covering [-(3 sqrt(3) n / 2 + 10), 3 sqrt(3) n / 2 + 10]^q.
/// A verification oracle for the bridge identity between the two kernels.
inline double gauss_identity_residual(const KernelSpec& spec, const Point& x, const Point& y,
                                      double grid_spacing) {
  spec.validate();
  require(static_cast<int>(x.size()) == spec.q && static_cast<int>(y.size()) == spec.q,
          "gauss_identity_residual: dimension mismatch");
  if (!(grid_spacing > 0.0 && grid_spacing <= 0.05))
    throw config_error("gauss_identity_residual: grid spacing must be in (0, 0.05]");
  const double radius = 1.5 * std::sqrt(3.0) * spec.n + 10.0;
  const long naxis = static_cast<long>(std::ceil(2.0 * radius / grid_spacing)) + 1;
  const double h = 2.0 * radius / static_cast<double>(naxis - 1);
  std::vector<double> axis(static_cast<std::size_t>(naxis));
  for (long i = 0; i < naxis; ++i) axis[i] = -radius + h * static_cast<double>(i);

  const int cap = spec.degree_cap();
  const auto wstar = phi_star_layer_weights(spec);
  const double prefac = phi_star_prefactor(spec);

  // Per-coordinate tables psi_m(x_i) and psi_m(2 u / sqrt(3)) on the axis.
  std::vector<double> buf(static_cast<std::size_t>(cap));
  Eigen::MatrixXd psi_x(spec.q, cap);
  for (int i = 0; i < spec.q; ++i) {
    hermite_1d_into(cap - 1, x[static_cast<std::size_t>(i)], buf.data());
    for (int m = 0; m < cap; ++m) psi_x(i, m) = buf[static_cast<std::size_t>(m)];
  }
  Eigen::MatrixXd psi_u(naxis, cap);
  for (long a = 0; a < naxis; ++a) {
    hermite_1d_into(cap - 1, 2.0 * axis[static_cast<std::size_t>(a)] / std::sqrt(3.0), buf.data());
    for (int m = 0; m < cap; ++m) psi_u(a, m) = buf[static_cast<std::size_t>(m)];
  }

  // Odometer over the tensor grid; trapezoid weights are 1/2 at axis ends.
  std::vector<long> idx(static_cast<std::size_t>(spec.q), 0);
  std::vector<std::vector<double>> seq(static_cast<std::size_t>(spec.q),
                                       std::vector<double>(static_cast<std::size_t>(cap)));
  double integral = 0.0;
  bool done = false;
  while (!done) {
    double wtrap = 1.0, gauss = 0.0;
    for (int i = 0; i < spec.q; ++i) {
      const long a = idx[static_cast<std::size_t>(i)];
      if (a == 0 || a == naxis - 1) wtrap *= 0.5;
      const double u = axis[static_cast<std::size_t>(a)];
      const double dy = y[static_cast<std::size_t>(i)] - u;
      gauss += -dy * dy - u * u / 3.0;
      for (int m = 0; m < cap; ++m)
        seq[static_cast<std::size_t>(i)][static_cast<std::size_t>(m)] =
            psi_x(i, m) * psi_u(a, m);
    }
    const auto layers = detail::degree_layers(seq, cap);
    double star = 0.0;
    for (int m = 0; m < cap; ++m) star += wstar[static_cast<std::size_t>(m)] * layers[m];
    integral += wtrap * std::exp(gauss) * prefac * star;
    for (int i = spec.q - 1; i >= 0; --i) {
      if (++idx[static_cast<std::size_t>(i)] < naxis) break;
      idx[static_cast<std::size_t>(i)] = 0;
      if (i == 0) done = true;
    }
  }
  integral *= std::pow(h, spec.q);
  return std::fabs(phi_n(spec, x, y) - integral);
}

/// Table psi_m(pts[i]) for m <= deg, one row per point.
inline Eigen::MatrixXd hermite_table(const std::vector<double>& pts, int deg) {
  Eigen::MatrixXd t(static_cast<Eigen::Index>(pts.size()), deg + 1);
  std::vector<double> buf(static_cast<std::size_t>(deg) + 1);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    hermite_1d_into(deg, pts[i], buf.data());
    for (int m = 0; m <= deg; ++m) t(static_cast<Eigen::Index>(i), m) = buf[static_cast<std::size_t>(m)];
  }
  return t;
}

/// Table psi_j(scale * pts[i]) over a multi-index list, one row per point.
/// The shared building block for operator assembly and field evaluation.
inline Eigen::MatrixXd multi_product_table(const std::vector<Point>& pts,
                                           const std::vector<MultiIndex>& idx, int q,
                                           double arg_scale) {
  const long npts = static_cast<long>(pts.size());
  int deg = 0;
  for (const auto& k : idx) deg = std::max(deg, k.inf_norm());
  std::vector<Eigen::MatrixXd> coord(static_cast<std::size_t>(q));
  std::vector<double> c(static_cast<std::size_t>(npts));
  for (int d = 0; d < q; ++d) {
    for (long i = 0; i < npts; ++i)
      c[static_cast<std::size_t>(i)] =
          arg_scale * pts[static_cast<std::size_t>(i)][static_cast<std::size_t>(d)];
    coord[static_cast<std::size_t>(d)] = hermite_table(c, deg);
  }
  Eigen::MatrixXd t(npts, static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) {
    const auto& k = idx[j];
    for (long i = 0; i < npts; ++i) {
      double v = 1.0;
      for (int d = 0; d < q; ++d)
        v *= coord[static_cast<std::size_t>(d)](i, k.entries[static_cast<std::size_t>(d)]);
      t(i, static_cast<Eigen::Index>(j)) = v;
    }
  }
  return t;
}

/// Per-multi-index weights H(sqrt(|j|_1)/n) 3^{|j|_1/2} for the idx list.
inline Eigen::VectorXd phi_star_multi_weights(const KernelSpec& spec,
                                              const std::vector<MultiIndex>& idx) {
  const auto layer = phi_star_layer_weights(spec);
  Eigen::VectorXd w(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j)
    w(static_cast<Eigen::Index>(j)) = layer[static_cast<std::size_t>(idx[j].one_norm())];
  return w;
}

}  // namespace sera
