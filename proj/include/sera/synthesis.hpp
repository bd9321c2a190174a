#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sera/io.hpp"
#include "sera/quadrature.hpp"

namespace sera {

using json = nlohmann::json;

namespace detail {

// splitmix64; all generators are keyed by explicit seeds and reproduce
// bit-identically across platforms.
struct SplitMix {
  std::uint64_t state;
  explicit SplitMix(std::uint64_t seed) : state(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(next() >> 11) * 0x1.0p-53);
  }
  bool coin() { return (next() & 1ULL) != 0; }
};

}  // namespace detail

/// Ground-truth spikes: tau_I = sum_l a_l delta_{x_l} plus scale metadata.
struct TargetSpec {
  std::vector<Point> centers;
  std::vector<double> amplitudes;
  double scale_v = 0.5;

  long count() const { return static_cast<long>(centers.size()); }
  int q() const { return centers.empty() ? 1 : static_cast<int>(centers[0].size()); }

  double separation() const {  // eta
    double m = HUGE_VAL;
    for (std::size_t i = 0; i < centers.size(); ++i)
      for (std::size_t j = i + 1; j < centers.size(); ++j)
        m = std::min(m, dist2(centers[i], centers[j]));
    return m;
  }
  double min_amp() const {  // mu
    double m = HUGE_VAL;
    for (double a : amplitudes) m = std::min(m, std::fabs(a));
    return m;
  }
  double mass() const {  // M
    double s = 0.0;
    for (double a : amplitudes) s += std::fabs(a);
    return s;
  }
  double box_radius() const {  // B
    double m = 0.0;
    for (const auto& c : centers) m = std::max(m, sup_norm(c));
    return m;
  }
};

/// Finite signed atomic perturbation measure tau_c.
struct ClutterSpec {
  std::vector<Point> positions;
  std::vector<double> masses;

  double bv_norm() const {
    double s = 0.0;
    for (double c : masses) s += std::fabs(c);
    return s;
  }
};

/// Deterministic random target: L centers in [-box_radius, box_radius]^q at
/// pairwise distance >= eta_min, amplitude magnitudes in amp_range with
/// random signs.
inline TargetSpec gen_target(std::uint64_t seed, int L, int q, double box_radius, double eta_min,
                             double amp_lo, double amp_hi) {
  require(L >= 1, "gen_target: L must be >= 1");
  require(q >= 1, "gen_target: q must be >= 1");
  require(box_radius > 0.0 && eta_min > 0.0, "gen_target: radii must be positive");
  require(0.0 < amp_lo && amp_lo <= amp_hi, "gen_target: bad amplitude range");
  detail::SplitMix rng(seed);
  TargetSpec t;
  long budget = 20000L * L;
  long stale = 0;
  while (static_cast<int>(t.centers.size()) < L && budget-- > 0) {
    Point p(static_cast<std::size_t>(q));
    for (auto& v : p) v = rng.uniform(-box_radius, box_radius);
    bool ok = true;
    for (const auto& c : t.centers)
      if (dist2(c, p) < eta_min) {
        ok = false;
        break;
      }
    if (ok) {
      t.centers.push_back(std::move(p));
      stale = 0;
    } else if (++stale >= 200) {
      t.centers.clear();  // greedy placement wedged itself; restart
      stale = 0;
    }
  }
  if (static_cast<int>(t.centers.size()) < L)
    throw config_error("gen_target: could not place points at the requested separation");
  for (int l = 0; l < L; ++l) {
    const double mag = rng.uniform(amp_lo, amp_hi);
    t.amplitudes.push_back(rng.coin() ? mag : -mag);
  }
  return t;
}

/// Deterministic random clutter with the requested total variation.
inline ClutterSpec gen_clutter(std::uint64_t seed, int count, int q, double box_radius,
                               double bv_norm) {
  require(count >= 1, "gen_clutter: count must be >= 1");
  require(bv_norm >= 0.0, "gen_clutter: bv_norm must be >= 0");
  detail::SplitMix rng(seed);
  ClutterSpec c;
  double total = 0.0;
  for (int j = 0; j < count; ++j) {
    Point p(static_cast<std::size_t>(q));
    for (auto& v : p) v = rng.uniform(-box_radius, box_radius);
    c.positions.push_back(std::move(p));
    const double m = rng.uniform(0.2, 1.0);
    c.masses.push_back(rng.coin() ? m : -m);
    total += m;
  }
  if (total > 0.0)
    for (auto& m : c.masses) m *= bv_norm / total;
  return c;
}

/// An absolutely-continuous clutter variant: a piecewise-constant density on
/// a fine tensor grid, reduced to cell atoms of mass density * volume.
inline ClutterSpec clutter_from_density(const std::vector<Point>& cell_centers,
                                        const std::vector<double>& densities, double cell_volume) {
  require(cell_centers.size() == densities.size(), "clutter_from_density: size mismatch");
  ClutterSpec c;
  c.positions = cell_centers;
  for (double d : densities) c.masses.push_back(d * cell_volume);
  return c;
}

/// G(x) = sum_l a_l e^{-|x - x_l|^2} + sum_j c_j e^{-|x - u_j|^2}.
inline std::vector<double> eval_blurred(const TargetSpec& target, const ClutterSpec* clutter,
                                        const std::vector<Point>& points) {
  std::vector<double> out(points.size(), 0.0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    double s = 0.0;
    for (std::size_t l = 0; l < target.centers.size(); ++l)
      s += target.amplitudes[l] * std::exp(-dist2_sq(points[i], target.centers[l]));
    if (clutter)
      for (std::size_t j = 0; j < clutter->positions.size(); ++j)
        s += clutter->masses[j] * std::exp(-dist2_sq(points[i], clutter->positions[j]));
    out[i] = s;
  }
  return out;
}

/// G(y, v) = sum_l a_l (4 pi v^2)^{-q/2} exp(-|y - y_l|^2 / (4 v^2)), the
/// Gaussian-blur model in original coordinates.
inline std::vector<double> eval_model_g(const TargetSpec& target, double v,
                                        const std::vector<Point>& points) {
  require(v > 0.0, "eval_model_g: v must be positive");
  const int q = target.q();
  const double norm = std::pow(4.0 * pi_v * v * v, -0.5 * q);
  std::vector<double> out(points.size(), 0.0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    double s = 0.0;
    for (std::size_t l = 0; l < target.centers.size(); ++l)
      s += target.amplitudes[l] * std::exp(-dist2_sq(points[i], target.centers[l]) / (4.0 * v * v));
    out[i] = norm * s;
  }
  return out;
}

/// F_{v0}(y) = sum_l a_l g_{v0}(y - y_l): every point mass replaced by the
/// normalized Gaussian pixel of width v0.
inline std::vector<double> eval_extended_source(const TargetSpec& target, double v0,
                                                const std::vector<Point>& points) {
  require(v0 > 0.0, "eval_extended_source: v0 must be positive");
  return eval_model_g(target, v0, points);
}

/// f(y) = sum_l b_l exp(2 y_l . y). Errors out (naming the point) when a
/// term overflows double range.
inline std::vector<double> eval_exp_sum(const std::vector<Point>& exponents,
                                        const std::vector<double>& coefficients,
                                        const std::vector<Point>& points) {
  require(exponents.size() == coefficients.size(), "eval_exp_sum: size mismatch");
  std::vector<double> out(points.size(), 0.0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    double s = 0.0;
    for (std::size_t l = 0; l < exponents.size(); ++l) {
      const double e = 2.0 * dot(exponents[l], points[i]);
      if (e > 700.0)
        throw config_error("eval_exp_sum: overflow at point index " + std::to_string(i));
      s += coefficients[l] * std::exp(e);
    }
    if (!std::isfinite(s))
      throw config_error("eval_exp_sum: non-finite value at point index " + std::to_string(i));
    out[i] = s;
  }
  return out;
}

/// Adds i.i.d. bounded per-sample noise, uniform in [-amplitude, amplitude].
/// Note this sits outside the perturbation-measure model (it is not a
/// bounded-variation measure convolved with the Gaussian); outputs using it
/// should be labeled accordingly.
inline std::vector<double> add_observation_noise(const std::vector<double>& values,
                                                 std::uint64_t seed, double amplitude) {
  require(amplitude >= 0.0, "add_observation_noise: amplitude must be >= 0");
  detail::SplitMix rng(seed);
  std::vector<double> out(values);
  for (auto& v : out) v += rng.uniform(-amplitude, amplitude);
  return out;
}

/// Jittered lattice over I_{A,n}^q with fill distance at most
/// density_factor * beta_hat / (n A); point count is Theta(n^{2q}).
inline SampleSet gen_sample_points(int q, double A, double n, double density_factor,
                                   std::uint64_t seed = 0, double jitter_frac = 0.2,
                                   double beta_hat = 0.25) {
  require(q >= 1, "gen_sample_points: q must be >= 1");
  require(A > 0.0 && n > 0.0, "gen_sample_points: A and n must be positive");
  require(density_factor > 0.0 && density_factor <= 1.0,
          "gen_sample_points: density_factor must lie in (0, 1]");
  require(jitter_frac >= 0.0 && jitter_frac <= 0.25, "gen_sample_points: jitter_frac in [0, 1/4]");
  SampleSet s;
  s.box_A = A;
  s.box_n = n;
  s.q = q;
  const double r = s.box_radius();
  const double fill_target = density_factor * beta_hat / (n * A);
  const double pitch = 1.6 * fill_target;
  const long naxis = std::max(1L, static_cast<long>(std::floor(2.0 * r / pitch)));
  const double start = -r + 0.5 * (2.0 * r - pitch * static_cast<double>(naxis - 1));
  detail::SplitMix rng(seed);
  const double amp = jitter_frac * fill_target;

  std::vector<long> idx(static_cast<std::size_t>(q), 0);
  long total = 1;
  for (int d = 0; d < q; ++d) total *= naxis;
  s.points.reserve(static_cast<std::size_t>(total));
  for (long i = 0; i < total; ++i) {
    Point p(static_cast<std::size_t>(q));
    for (int d = 0; d < q; ++d) {
      double v = start + pitch * static_cast<double>(idx[static_cast<std::size_t>(d)]);
      if (amp > 0.0) v += rng.uniform(-amp, amp);
      p[static_cast<std::size_t>(d)] = std::clamp(v, -r, r);
    }
    s.points.push_back(std::move(p));
    for (int d = q - 1; d >= 0; --d) {
      if (++idx[static_cast<std::size_t>(d)] < naxis) break;
      idx[static_cast<std::size_t>(d)] = 0;
    }
  }
  return s;
}

inline json target_to_json(const TargetSpec& t) {
  json j;
  j["count"] = t.count();
  j["centers"] = t.centers;
  j["amplitudes"] = t.amplitudes;
  j["scale_v"] = t.scale_v;
  j["separation"] = t.count() > 1 ? t.separation() : 0.0;
  j["min_amp"] = t.min_amp();
  j["mass"] = t.mass();
  j["box_radius"] = t.box_radius();
  return j;
}

inline TargetSpec target_from_json(const json& j) {
  TargetSpec t;
  t.centers = j.at("centers").get<std::vector<Point>>();
  t.amplitudes = j.at("amplitudes").get<std::vector<double>>();
  t.scale_v = j.value("scale_v", 0.5);
  require(t.centers.size() == t.amplitudes.size(), "target JSON: centers/amplitudes mismatch");
  return t;
}

inline json clutter_to_json(const ClutterSpec& c) {
  json j;
  j["positions"] = c.positions;
  j["masses"] = c.masses;
  j["bv_norm"] = c.bv_norm();
  return j;
}

inline ClutterSpec clutter_from_json(const json& j) {
  ClutterSpec c;
  c.positions = j.at("positions").get<std::vector<Point>>();
  c.masses = j.at("masses").get<std::vector<double>>();
  require(c.positions.size() == c.masses.size(), "clutter JSON: positions/masses mismatch");
  return c;
}

/// Samples CSV: columns y_1..y_q,value.
inline void write_samples_csv(const std::string& path, const std::vector<Point>& points,
                              const std::vector<double>& values) {
  require(points.size() == values.size(), "write_samples_csv: size mismatch");
  CsvTable t;
  const int q = points.empty() ? 1 : static_cast<int>(points[0].size());
  for (int d = 1; d <= q; ++d) t.header.push_back("y_" + std::to_string(d));
  t.header.push_back("value");
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::vector<double> row = points[i];
    row.push_back(values[i]);
    t.rows.push_back(std::move(row));
  }
  write_csv(path, t);
}

inline void read_samples_csv(const std::string& path, std::vector<Point>& points,
                             std::vector<double>& values) {
  const CsvTable t = read_csv(path);
  require(t.header.size() >= 2, "samples CSV: need y_1..y_q,value columns");
  if (t.header.back() != "value") throw io_error("samples CSV: last column must be 'value'", 1);
  points.clear();
  values.clear();
  const std::size_t q = t.header.size() - 1;
  for (const auto& row : t.rows) {
    points.emplace_back(row.begin(), row.begin() + static_cast<long>(q));
    values.push_back(row.back());
  }
}

}  // namespace sera
