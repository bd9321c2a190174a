#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "sera/operator.hpp"
#include "sera/synthesis.hpp"

namespace sera {

enum class AmplitudeMode { kNormalized, kPaperLiteral };
enum class RescaleMode { kDerived, kRemarkLiteral };

/// Tunables of the recovery run. rho is the minimal refinement ratio N/n;
/// the refined level is N = max(rho, 2 gamma / alpha, 1) n, clamped at
/// refine_cap (the 3^{m/2} layer weights make levels much beyond 9
/// meaningless in double precision).
struct RecoveryParams {
  double n = 4.0;
  int q = 1;
  double rho = 1.0;
  double mu = 1.0;
  double eta = 1.0;
  int S = 0;                // 0: use q + 2
  AmplitudeMode amplitude_mode = AmplitudeMode::kNormalized;
  RescaleMode rescale_mode = RescaleMode::kDerived;
  double v = 0.5;           // reporting scale; 2v = 1 makes derived rescale the identity
  double box_radius = 0.0;  // 0: n / sqrt(2)
  double m_hint = 0.0;      // 0: bootstrap from a provisional pass
  double refine_cap = 0.0;  // 0: 9 for q = 1, 5 for q >= 2
  double grid_factor = 1.0; // multiplies the default evaluation spacing
  CutoffSpec cutoff{};

  int effective_s() const { return S > 0 ? S : q + 2; }
  double effective_box_radius() const { return box_radius > 0.0 ? box_radius : n / std::sqrt(2.0); }
  double effective_refine_cap() const { return refine_cap > 0.0 ? refine_cap : (q == 1 ? 9.0 : 5.0); }

  void validate() const {
    require(n > 0.0, "RecoveryParams: n must be positive");
    require(q >= 1, "RecoveryParams: q must be >= 1");
    require(rho >= 1.0, "RecoveryParams: rho must be >= 1");
    require(mu > 0.0, "RecoveryParams: mu must be positive");
    require(eta > 0.0, "RecoveryParams: eta must be positive");
    require(v > 0.0, "RecoveryParams: v must be positive");
    require(S == 0 || S > q, "RecoveryParams: S must exceed q");
    require(grid_factor > 0.0 && grid_factor <= 4.0, "RecoveryParams: bad grid_factor");
  }

  KernelSpec kernel_at(double level) const {
    KernelSpec spec;
    spec.n = level;
    spec.q = q;
    spec.S = effective_s();
    spec.cutoff = cutoff;
    return spec;
  }
};

/// Empirical kernel constants on the working box.
struct RecoveryConstants {
  double a1_hat = 0.0;     // localization constant
  double a2_hat = 0.0;     // diagonal lower bound
  double gamma_hat = 1.0;  // cluster radius multiplier, eq. form max(1, (8 A1 M / (A2 mu))^{1/S})
  double alpha_hat = 1.0;  // positivity radius in n d units
  double m_hat = 0.0;      // amplitude mass used for gamma
  double b_hat = 0.0;      // spike box radius (post hoc)
  double c_hat = 0.0;      // validity box coefficient: box_radius / n
  double c1_hat = 0.0;     // diagonal Lipschitz coefficient
};

struct ClusterInfo {
  long size = 0;
  double diameter = 0.0;
  double min_dist_to_others = HUGE_VAL;
};

struct SufficiencyReport {
  double n_required = 0.0;   // largest of the sufficiency thresholds
  bool n_sufficient = false;
  double eps_hat = 0.0;      // measured proxy of the epsilon bound
  double eps_limit = 0.0;    // mu A2 / 4
  bool eps_ok = false;
  double clutter_proxy = 0.0;      // max off-support refined-field magnitude
  double clutter_limit = 0.0;      // A2 mu / 16
  bool reliable = true;            // false when the clutter proxy violates the bound
  double refine_level_raw = 0.0;   // max(rho, 2 gamma / alpha, 1) n before the cap
  double refine_level_used = 0.0;  // N actually used
  bool refine_cap_applied = false;
};

struct RecoveredSpikes {
  long count = 0;
  std::vector<Point> centers;
  std::vector<double> amplitudes;
  double scale_v = 0.5;
  std::vector<ClusterInfo> cluster_diagnostics;
  RecoveryConstants constants;
  SufficiencyReport report;
  std::vector<Point> centers_scaled;  // the x-coordinate peaks before rescale
};

/// A2 = min diagonal, A1 = sup |phi| max(1, (n d)^S), alpha = positivity
/// radius, C1 = diagonal Lipschitz coefficient; all measured on
/// [-box_radius, box_radius]^q with deterministic lattices.
inline RecoveryConstants estimate_constants(const KernelSpec& spec, double box_radius, double mass,
                                            double mu) {
  spec.validate();
  require(box_radius > 0.0, "estimate_constants: box_radius must be positive");
  require(box_radius <= 1.5 * std::sqrt(3.0) * spec.n + 1e-9,
          "estimate_constants: box_radius beyond the working box");
  require(mass > 0.0 && mu > 0.0, "estimate_constants: mass and mu must be positive");

  RecoveryConstants c;
  c.m_hat = mass;
  c.c_hat = box_radius / spec.n;

  // Diagonal scan.
  const int diag_axis = spec.q == 1 ? 201 : (spec.q == 2 ? 41 : 15);
  std::vector<double> axis(static_cast<std::size_t>(diag_axis));
  for (int i = 0; i < diag_axis; ++i)
    axis[static_cast<std::size_t>(i)] = -box_radius + 2.0 * box_radius * i / (diag_axis - 1);
  long total = 1;
  for (int d = 0; d < spec.q; ++d) total *= diag_axis;
  std::vector<double> diag_vals(static_cast<std::size_t>(total));
  std::vector<long> idx(static_cast<std::size_t>(spec.q), 0);
  double a2 = HUGE_VAL;
  for (long i = 0; i < total; ++i) {
    Point p(static_cast<std::size_t>(spec.q));
    for (int d = 0; d < spec.q; ++d)
      p[static_cast<std::size_t>(d)] = axis[static_cast<std::size_t>(idx[static_cast<std::size_t>(d)])];
    const double v = phi_diag(spec, p);
    diag_vals[static_cast<std::size_t>(i)] = v;
    a2 = std::min(a2, v);
    for (int d = spec.q - 1; d >= 0; --d) {
      if (++idx[static_cast<std::size_t>(d)] < diag_axis) break;
      idx[static_cast<std::size_t>(d)] = 0;
    }
  }
  if (!(a2 > 1e-8))
    throw std::invalid_argument(
        "estimate_constants: diagonal lower bound vanished; shrink the box or raise n "
        "(validity requires |x|_inf <= C n)");
  c.a2_hat = a2;

  // Diagonal Lipschitz coefficient along the first axis of the scan.
  double c1 = 0.0;
  const double step = axis[1] - axis[0];
  for (long i = 0; i + 1 < diag_axis; ++i)
    c1 = std::max(c1, std::fabs(diag_vals[static_cast<std::size_t>(i + 1)] -
                                diag_vals[static_cast<std::size_t>(i)]) /
                          step * std::pow(spec.n, spec.q));
  c.c1_hat = std::max(c1, 1e-12);

  // Pair scan for A1 and the positivity radius.
  const int n_anchor = spec.q == 1 ? 9 : 3;
  std::vector<Point> anchors;
  {
    std::vector<long> ai(static_cast<std::size_t>(spec.q), 0);
    long tot = 1;
    for (int d = 0; d < spec.q; ++d) tot *= n_anchor;
    for (long i = 0; i < tot; ++i) {
      Point p(static_cast<std::size_t>(spec.q));
      for (int d = 0; d < spec.q; ++d)
        p[static_cast<std::size_t>(d)] =
            -box_radius + 2.0 * box_radius * static_cast<double>(ai[static_cast<std::size_t>(d)]) /
                              (n_anchor - 1);
      anchors.push_back(std::move(p));
      for (int d = spec.q - 1; d >= 0; --d) {
        if (++ai[static_cast<std::size_t>(d)] < n_anchor) break;
        ai[static_cast<std::size_t>(d)] = 0;
      }
    }
  }
  std::vector<Point> dirs;
  if (spec.q == 1) {
    dirs = {{1.0}, {-1.0}};
  } else {
    for (int d = 0; d < spec.q; ++d) {
      Point plus(static_cast<std::size_t>(spec.q), 0.0), minus(static_cast<std::size_t>(spec.q), 0.0);
      plus[static_cast<std::size_t>(d)] = 1.0;
      minus[static_cast<std::size_t>(d)] = -1.0;
      dirs.push_back(plus);
      dirs.push_back(minus);
    }
    Point diagp(static_cast<std::size_t>(spec.q), 1.0 / std::sqrt(double(spec.q)));
    Point diagm(static_cast<std::size_t>(spec.q), -1.0 / std::sqrt(double(spec.q)));
    dirs.push_back(diagp);
    dirs.push_back(diagm);
  }

  const int n_rad = 48;
  const double nd_max = 2.0 * spec.n * box_radius;
  std::vector<double> radii(static_cast<std::size_t>(n_rad));
  for (int i = 0; i < n_rad; ++i)
    radii[static_cast<std::size_t>(i)] =
        0.05 * std::pow(nd_max / 0.05, static_cast<double>(i) / (n_rad - 1));

  double a1 = 0.0;
  double alpha = radii[0];
  bool alpha_done = false;
  for (int ri = 0; ri < n_rad; ++ri) {
    const double nd = radii[static_cast<std::size_t>(ri)];
    const double d = nd / spec.n;
    bool nonneg = true;
    for (const auto& y : anchors) {
      for (const auto& dir : dirs) {
        Point x = y;
        for (int k = 0; k < spec.q; ++k)
          x[static_cast<std::size_t>(k)] += d * dir[static_cast<std::size_t>(k)];
        if (sup_norm(x) > box_radius) continue;
        const double v = phi_n(spec, x, y);
        a1 = std::max(a1, std::fabs(v) * std::max(1.0, std::pow(nd, spec.S)));
        if (v < -1e-10) nonneg = false;
      }
    }
    if (!alpha_done && nonneg)
      alpha = nd;
    else
      alpha_done = true;
  }
  // The diagonal itself participates in the sup (the max(1, .) branch).
  for (long i = 0; i < total; ++i) a1 = std::max(a1, std::fabs(diag_vals[static_cast<std::size_t>(i)]));
  c.a1_hat = a1;
  c.alpha_hat = alpha;

  const double ratio = 8.0 * c.a1_hat * mass / (c.a2_hat * mu);
  c.gamma_hat = std::max(1.0, std::pow(ratio, 1.0 / spec.S));
  return c;
}

/// Indices of field points with |value| >= A2 mu / 2.
inline std::vector<std::size_t> threshold_field(const FieldValues& field,
                                                const RecoveryConstants& constants, double mu) {
  require(mu > 0.0, "threshold_field: mu must be positive");
  const double thr = 0.5 * constants.a2_hat * mu;
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < field.values.size(); ++i)
    if (std::fabs(field.values[i]) >= thr) idx.push_back(i);
  return idx;
}

/// Single-linkage connected components with link radius eta / 2 (Euclidean),
/// ordered by their lexicographically smallest point.
inline std::vector<std::vector<std::size_t>> cluster(const std::vector<Point>& pts, double eta) {
  require(eta > 0.0, "cluster: eta must be positive");
  const std::size_t n = pts.size();
  std::vector<std::size_t> parent(n);
  for (std::size_t i = 0; i < n; ++i) parent[i] = i;
  const std::function<std::size_t(std::size_t)> find = [&](std::size_t i) {
    while (parent[i] != i) {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  };
  const double link = 0.5 * eta;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (dist2(pts[i], pts[j]) <= link) {
        const std::size_t a = find(i), b = find(j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[find(i)].push_back(i);
  std::vector<std::vector<std::size_t>> out;
  for (auto& [root, members] : groups) out.push_back(std::move(members));
  std::sort(out.begin(), out.end(), [&](const auto& a, const auto& b) {
    const Point* pa = &pts[a[0]];
    for (auto i : a)
      if (lex_less(pts[i], *pa)) pa = &pts[i];
    const Point* pb = &pts[b[0]];
    for (auto i : b)
      if (lex_less(pts[i], *pb)) pb = &pts[i];
    return lex_less(*pa, *pb);
  });
  return out;
}

/// Checks the cluster geometry contract: diameters <= 2 gamma / N and
/// pairwise distances >= eta / 2. Throws recovery_error naming offenders.
inline std::vector<ClusterInfo> validate_clusters(const std::vector<std::vector<std::size_t>>& cl,
                                                  const std::vector<Point>& pts, double eta,
                                                  double gamma_hat, double level_n) {
  std::vector<ClusterInfo> info(cl.size());
  const double diam_limit = 2.0 * gamma_hat / level_n;
  std::ostringstream bad;
  for (std::size_t a = 0; a < cl.size(); ++a) {
    info[a].size = static_cast<long>(cl[a].size());
    for (std::size_t i = 0; i < cl[a].size(); ++i)
      for (std::size_t j = i + 1; j < cl[a].size(); ++j)
        info[a].diameter = std::max(info[a].diameter, dist2(pts[cl[a][i]], pts[cl[a][j]]));
    if (info[a].diameter > diam_limit)
      bad << " cluster " << a << " diameter " << info[a].diameter << " > " << diam_limit << ";";
    for (std::size_t b = 0; b < cl.size(); ++b) {
      if (a == b) continue;
      double dmin = HUGE_VAL;
      for (auto i : cl[a])
        for (auto j : cl[b]) dmin = std::min(dmin, dist2(pts[i], pts[j]));
      info[a].min_dist_to_others = std::min(info[a].min_dist_to_others, dmin);
    }
    if (cl.size() > 1 && info[a].min_dist_to_others < 0.5 * eta)
      bad << " cluster " << a << " distance " << info[a].min_dist_to_others << " < eta/2;";
  }
  const std::string msg = bad.str();
  if (!msg.empty())
    throw recovery_error("cluster geometry inconsistent with (mu, eta, n); increase n:" + msg);
  return info;
}

/// Per cluster, the point maximizing |coarse_field|, ties to the
/// lexicographically smallest coordinate vector.
inline std::vector<Point> locate_peaks(const std::vector<std::vector<std::size_t>>& clusters,
                                       const std::vector<Point>& pts,
                                       const std::vector<double>& coarse_values) {
  std::vector<Point> centers;
  for (const auto& members : clusters) {
    require(!members.empty(), "locate_peaks: empty cluster");
    std::size_t best = members[0];
    for (std::size_t i : members) {
      const double a = std::fabs(coarse_values[i]), b = std::fabs(coarse_values[best]);
      if (a > b || (a == b && lex_less(pts[i], pts[best]))) best = i;
    }
    centers.push_back(pts[best]);
  }
  return centers;
}

/// Amplitudes at the located centers. Normalized mode divides by
/// Phi_n(x, x); the literal mode reports the raw field value.
inline std::vector<double> estimate_amplitudes(const std::vector<Point>& centers,
                                               const std::vector<double>& coarse_at_centers,
                                               const KernelSpec& spec, AmplitudeMode mode,
                                               const RecoveryConstants& constants) {
  std::vector<double> amps;
  for (std::size_t l = 0; l < centers.size(); ++l) {
    if (mode == AmplitudeMode::kPaperLiteral) {
      amps.push_back(coarse_at_centers[l]);
      continue;
    }
    const double d = phi_diag(spec, centers[l]);
    if (d < 0.5 * constants.a2_hat)
      throw recovery_error("estimate_amplitudes: center outside the validity box (diagonal " +
                           std::to_string(d) + " < A2/2)");
    amps.push_back(coarse_at_centers[l] / d);
  }
  return amps;
}

/// Maps scaled-coordinate output back to original coordinates.
/// Derived mode: z = 2 v x with amplitudes unchanged. Remark-literal mode:
/// z = v x and amplitudes scaled by (pi v^2)^{q/2}.
inline void rescale(RecoveredSpikes& spikes, double v, RescaleMode mode, int q) {
  require(v > 0.0, "rescale: v must be positive");
  spikes.scale_v = v;
  spikes.centers = spikes.centers_scaled;
  const double pos = mode == RescaleMode::kDerived ? 2.0 * v : v;
  for (auto& ctr : spikes.centers)
    for (auto& x : ctr) x *= pos;
  if (mode == RescaleMode::kRemarkLiteral) {
    const double amp = std::pow(pi_v * v * v, 0.5 * q);
    for (auto& a : spikes.amplitudes) a *= amp;
  }
}

/// v = sqrt(c t) for the heat-kernel scale, and its inverse t = v^2 / c.
inline double heat_scale(double c, double t) {
  require(c > 0.0 && t > 0.0, "heat_scale: c and t must be positive");
  return std::sqrt(c * t);
}
inline double heat_time(double c, double v) {
  require(c > 0.0 && v > 0.0, "heat_time: c and v must be positive");
  return v * v / c;
}

namespace detail {

inline double default_spacing(double level, double alpha_hat, double grid_factor) {
  return grid_factor * std::min(alpha_hat / (2.0 * level), 0.5 / level);
}

inline RecoveredSpikes recover_with_mass(const std::vector<double>& data,
                                         const QuadratureMeasure& qm, const RecoveryParams& params,
                                         double mass) {
  const int q = params.q;
  const double n = params.n;
  const KernelSpec spec_n = params.kernel_at(n);
  RecoveryConstants consts =
      estimate_constants(spec_n, params.effective_box_radius(), mass, params.mu);

  SufficiencyReport report;
  report.refine_level_raw = std::max({params.rho, 2.0 * consts.gamma_hat / consts.alpha_hat, 1.0}) * n;
  const double cap = params.effective_refine_cap();
  double level_N = report.refine_level_raw;
  if (level_N > cap) {
    level_N = std::max(cap, n);
    report.refine_cap_applied = true;
  }
  report.refine_level_used = level_N;
  const KernelSpec spec_N = params.kernel_at(level_N);

  // Refined-level field over the evaluation lattice.
  const double spacing = default_spacing(level_N, consts.alpha_hat, params.grid_factor);
  EvaluationGrid grid = build_grid(level_N, q, spacing);
  FieldValues field_N = apply_at_points(qm, grid.points, spec_N, data);

  RecoveredSpikes spikes;
  spikes.constants = consts;
  spikes.scale_v = params.v;

  const auto keep = threshold_field(field_N, consts, params.mu);
  std::vector<Point> gpts;
  std::vector<double> gvals_N;
  for (auto i : keep) {
    gpts.push_back(field_N.points[i]);
    gvals_N.push_back(field_N.values[i]);
  }

  // Off-support residual level of the refined field, a proxy for the
  // clutter condition |U_n(E)| <= A2 mu / 16.
  {
    double clutter = 0.0;
    for (std::size_t i = 0; i < field_N.values.size(); ++i) {
      double dmin = HUGE_VAL;
      for (const auto& g : gpts) dmin = std::min(dmin, dist2(field_N.points[i], g));
      if (gpts.empty() || dmin > 0.5 * params.eta)
        clutter = std::max(clutter, std::fabs(field_N.values[i]));
    }
    report.clutter_proxy = clutter;
    report.clutter_limit = consts.a2_hat * params.mu / 16.0;
    report.reliable = clutter <= report.clutter_limit;
  }

  if (!gpts.empty()) {
    const auto clusters = cluster(gpts, params.eta);
    spikes.cluster_diagnostics =
        validate_clusters(clusters, gpts, params.eta, consts.gamma_hat, level_N);

    // Any cluster point is within 2 gamma / N of its spike, so the center
    // bound holds for whichever field drives the argmax. The refined field
    // is used: at desk-scale n the coarse field's neighbor sidelobes tilt
    // the argmax and bias the normalized amplitude well beyond tolerance.
    spikes.centers_scaled = locate_peaks(clusters, gpts, gvals_N);

    if (params.amplitude_mode == AmplitudeMode::kPaperLiteral) {
      // Literal step of the recovery algorithm: the raw coarse-level value.
      const FieldValues at_centers = apply_at_points(qm, spikes.centers_scaled, spec_n, data);
      spikes.amplitudes = estimate_amplitudes(spikes.centers_scaled, at_centers.values, spec_n,
                                              params.amplitude_mode, consts);
    } else {
      std::vector<double> refined_at_centers;
      for (const auto& ctr : spikes.centers_scaled) {
        for (std::size_t i = 0; i < gpts.size(); ++i)
          if (gpts[i] == ctr) {
            refined_at_centers.push_back(gvals_N[i]);
            break;
          }
      }
      spikes.amplitudes = estimate_amplitudes(spikes.centers_scaled, refined_at_centers, spec_N,
                                              params.amplitude_mode, consts);
    }
    spikes.count = static_cast<long>(spikes.centers_scaled.size());
  }

  // Sufficiency report against the explicit n thresholds.
  spikes.constants.b_hat = 0.0;
  for (const auto& ctr : spikes.centers_scaled)
    spikes.constants.b_hat = std::max(spikes.constants.b_hat, sup_norm(ctr));
  {
    const auto& cst = spikes.constants;
    const double s = spec_n.S;
    report.n_required = std::max(
        {1.0, 4.0 * cst.gamma_hat / params.eta, 2.0 * cst.b_hat / cst.c_hat,
         4.0 * cst.gamma_hat / std::sqrt(cst.c_hat),
         std::pow(cst.a2_hat / (4.0 * cst.c1_hat * cst.gamma_hat), 1.0 / (q + 1))});
    report.n_sufficient = n >= report.n_required;
    const double eta_term =
        spikes.count > 1 ? std::pow(2.0, s) * cst.a1_hat * mass / std::pow(n * params.eta, s) : 0.0;
    report.eps_hat = eta_term + 2.0 * mass * cst.c1_hat * cst.gamma_hat / std::pow(n, q + 1);
    report.eps_limit = 0.25 * params.mu * cst.a2_hat;
    report.eps_ok = report.eps_hat <= report.eps_limit;
  }
  spikes.report = report;

  rescale(spikes, params.v, params.rescale_mode, q);
  return spikes;
}

}  // namespace detail

/// Full pipeline: constants, two-level operator evaluation, thresholding,
/// clustering, peak finding, amplitude estimation, rescaling. When no mass
/// hint is given a provisional pass bootstraps M from the recovered sum.
inline RecoveredSpikes recover(const std::vector<double>& data, const QuadratureMeasure& qm,
                               const RecoveryParams& params) {
  params.validate();
  require(data.size() == qm.points.size(), "recover: data length mismatch");
  require(qm.q() == params.q, "recover: dimension mismatch");
  if (params.m_hint > 0.0) return detail::recover_with_mass(data, qm, params, params.m_hint);
  // The provisional pass only feeds the mass estimate, so it runs with
  // normalized amplitudes in scaled coordinates whatever the output modes.
  RecoveryParams boot = params;
  boot.amplitude_mode = AmplitudeMode::kNormalized;
  boot.rescale_mode = RescaleMode::kDerived;
  const RecoveredSpikes provisional = detail::recover_with_mass(data, qm, boot, params.mu);
  double mass = 0.0;
  for (double a : provisional.amplitudes) mass += std::fabs(a);
  mass = std::max(mass, params.mu);
  const bool boot_is_final = params.amplitude_mode == AmplitudeMode::kNormalized &&
                             params.rescale_mode == RescaleMode::kDerived;
  if (boot_is_final && mass <= params.mu) return provisional;
  return detail::recover_with_mass(data, qm, params, mass);
}

/// Separated exponential sum: count, exponents, coefficients.
struct SeparatedExponentials {
  long count = 0;
  std::vector<Point> exponents;
  std::vector<double> coefficients;
  RecoveredSpikes spikes;
};

/// Blind-source separation of f(y) = sum b_l e^{2 y_l . y}: forms
/// G(x) = pi^{q/2} e^{-|x|^2} f(x) (the v = 1/2 reduction, where recovered
/// peak coordinates equal exponent coordinates), recovers spikes, then
/// inverts the coefficient change b = pi^{-q/2} e^{-|y|^2} a.
inline SeparatedExponentials separate_exponential_sum(const std::vector<Point>& sample_points,
                                                      const std::vector<double>& f_values,
                                                      const QuadratureMeasure& qm,
                                                      RecoveryParams params) {
  require(sample_points.size() == f_values.size(), "separate: size mismatch");
  params.v = 0.5;
  params.rescale_mode = RescaleMode::kDerived;  // identity on positions at v = 1/2
  params.validate();

  const int q = params.q;
  const double factor = std::pow(pi_v, 0.5 * q);
  std::vector<double> data(f_values.size());
  std::ostringstream bad;
  for (std::size_t i = 0; i < f_values.size(); ++i) {
    if (!std::isfinite(f_values[i])) {
      bad << " " << i;
      continue;
    }
    data[i] = factor * std::exp(-norm2_sq(sample_points[i])) * f_values[i];
    if (!std::isfinite(data[i])) bad << " " << i;
  }
  if (!bad.str().empty())
    throw config_error("separate_exponential_sum: non-finite transform at point indices:" +
                       bad.str());

  SeparatedExponentials out;
  out.spikes = recover(data, qm, params);
  out.count = out.spikes.count;
  for (long l = 0; l < out.count; ++l) {
    const Point& y = out.spikes.centers[static_cast<std::size_t>(l)];
    out.exponents.push_back(y);
    out.coefficients.push_back(std::pow(pi_v, -0.5 * q) * std::exp(-norm2_sq(y)) *
                               out.spikes.amplitudes[static_cast<std::size_t>(l)]);
  }
  return out;
}

/// Spikes JSON: {count, centers, amplitudes, scale_v, diagnostics}.
inline json spikes_to_json(const RecoveredSpikes& s) {
  json j;
  j["count"] = s.count;
  j["centers"] = s.centers;
  j["amplitudes"] = s.amplitudes;
  j["scale_v"] = s.scale_v;
  json diag;
  diag["centers_scaled"] = s.centers_scaled;
  diag["constants"] = {{"A1_hat", s.constants.a1_hat},     {"A2_hat", s.constants.a2_hat},
                       {"gamma_hat", s.constants.gamma_hat}, {"alpha_hat", s.constants.alpha_hat},
                       {"M_hat", s.constants.m_hat},       {"B_hat", s.constants.b_hat},
                       {"C_hat", s.constants.c_hat},       {"C1_hat", s.constants.c1_hat}};
  json clusters = json::array();
  for (const auto& c : s.cluster_diagnostics) {
    clusters.push_back({{"size", c.size},
                        {"diameter", c.diameter},
                        {"min_dist_to_others",
                         c.min_dist_to_others == HUGE_VAL ? -1.0 : c.min_dist_to_others}});
  }
  diag["clusters"] = clusters;
  diag["sufficiency"] = {{"n_required", s.report.n_required},
                         {"n_sufficient", s.report.n_sufficient},
                         {"eps_hat", s.report.eps_hat},
                         {"eps_limit", s.report.eps_limit},
                         {"eps_ok", s.report.eps_ok},
                         {"clutter_proxy", s.report.clutter_proxy},
                         {"clutter_limit", s.report.clutter_limit},
                         {"reliable", s.report.reliable},
                         {"refine_level_raw", s.report.refine_level_raw},
                         {"refine_level_used", s.report.refine_level_used},
                         {"refine_cap_applied", s.report.refine_cap_applied}};
  j["diagnostics"] = diag;
  return j;
}

}  // namespace sera
