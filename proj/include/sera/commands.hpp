#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "sera/recovery.hpp"

namespace sera {

/// One run configuration shared by all subcommands; JSON keys mirror the
/// field names and CLI flags override individual fields.
struct RunConfig {
  int q = 1;
  double n = 4.0;
  double rho = 1.0;
  double mu = 1.0;
  double eta = 2.0;
  int S = 0;  // 0: q + 2
  double v = 0.5;
  std::string weights_mode = "moment-exact";  // or "paper-literal"
  std::string amplitude_mode = "normalized";  // or "paper-literal"
  std::string rescale_mode = "derived";       // or "remark-literal"
  std::string input_kind = "scaled";          // or "model" (original coordinates)
  std::uint64_t seed = 1;

  // synthesis
  int L = 3;
  double target_box = 2.0;
  double amp_lo = 1.0;
  double amp_hi = 2.0;
  double sample_level = 0.0;  // 0: 6.5 for q = 1, 2.7 for q >= 2
  double density_factor = 1.0;
  double jitter_frac = 0.2;

  // solver / pipeline
  int degree_budget = 0;  // 0: 4 Ncap^2 for q = 1, 2 Ncap^2 otherwise
  double m_hint = 0.0;
  double refine_cap = 0.0;
  double grid_factor = 1.0;
  double beta_hat = 0.25;
  double verify_tolerance_scale = 1.0;

  // paths
  std::string samples = "samples.csv";
  std::string weights = "weights.csv";
  std::string target = "target.json";
  std::string outdir = ".";

  double effective_sample_level() const {
    return sample_level > 0.0 ? sample_level : (q == 1 ? 6.5 : 2.7);
  }
  double effective_refine_cap() const {
    return refine_cap > 0.0 ? refine_cap : (q == 1 ? 9.0 : 5.0);
  }
  int effective_degree_budget() const {
    if (degree_budget > 0) return degree_budget;
    const double cap = effective_refine_cap();
    return static_cast<int>(std::ceil((q == 1 ? 4.0 : 2.0) * cap * cap));
  }
  WeightMode effective_weight_mode() const {
    if (weights_mode == "moment-exact") return WeightMode::kMomentExact;
    if (weights_mode == "paper-literal") return WeightMode::kPaperLiteral;
    throw config_error("unknown weights_mode: " + weights_mode);
  }
  RecoveryParams recovery_params() const {
    RecoveryParams p;
    p.n = n;
    p.q = q;
    p.rho = rho;
    p.mu = mu;
    p.eta = eta;
    p.S = S;
    p.v = v;
    p.m_hint = m_hint;
    p.refine_cap = refine_cap;
    p.grid_factor = grid_factor;
    if (amplitude_mode == "normalized")
      p.amplitude_mode = AmplitudeMode::kNormalized;
    else if (amplitude_mode == "paper-literal")
      p.amplitude_mode = AmplitudeMode::kPaperLiteral;
    else
      throw config_error("unknown amplitude_mode: " + amplitude_mode);
    if (rescale_mode == "derived")
      p.rescale_mode = RescaleMode::kDerived;
    else if (rescale_mode == "remark-literal")
      p.rescale_mode = RescaleMode::kRemarkLiteral;
    else
      throw config_error("unknown rescale_mode: " + rescale_mode);
    p.validate();
    return p;
  }
};

inline json config_to_json(const RunConfig& c) {
  return json{{"q", c.q},
              {"n", c.n},
              {"rho", c.rho},
              {"mu", c.mu},
              {"eta", c.eta},
              {"S", c.S},
              {"v", c.v},
              {"weights_mode", c.weights_mode},
              {"amplitude_mode", c.amplitude_mode},
              {"rescale_mode", c.rescale_mode},
              {"input_kind", c.input_kind},
              {"seed", c.seed},
              {"L", c.L},
              {"target_box", c.target_box},
              {"amp_lo", c.amp_lo},
              {"amp_hi", c.amp_hi},
              {"sample_level", c.sample_level},
              {"density_factor", c.density_factor},
              {"jitter_frac", c.jitter_frac},
              {"degree_budget", c.degree_budget},
              {"m_hint", c.m_hint},
              {"refine_cap", c.refine_cap},
              {"grid_factor", c.grid_factor},
              {"beta_hat", c.beta_hat},
              {"verify_tolerance_scale", c.verify_tolerance_scale},
              {"samples", c.samples},
              {"weights", c.weights},
              {"target", c.target},
              {"outdir", c.outdir}};
}

inline RunConfig config_from_json(const json& j) {
  RunConfig c;
  c.q = j.value("q", c.q);
  c.n = j.value("n", c.n);
  c.rho = j.value("rho", c.rho);
  c.mu = j.value("mu", c.mu);
  c.eta = j.value("eta", c.eta);
  c.S = j.value("S", c.S);
  c.v = j.value("v", c.v);
  c.weights_mode = j.value("weights_mode", c.weights_mode);
  c.amplitude_mode = j.value("amplitude_mode", c.amplitude_mode);
  c.rescale_mode = j.value("rescale_mode", c.rescale_mode);
  c.input_kind = j.value("input_kind", c.input_kind);
  c.seed = j.value("seed", c.seed);
  c.L = j.value("L", c.L);
  c.target_box = j.value("target_box", c.target_box);
  c.amp_lo = j.value("amp_lo", c.amp_lo);
  c.amp_hi = j.value("amp_hi", c.amp_hi);
  c.sample_level = j.value("sample_level", c.sample_level);
  c.density_factor = j.value("density_factor", c.density_factor);
  c.jitter_frac = j.value("jitter_frac", c.jitter_frac);
  c.degree_budget = j.value("degree_budget", c.degree_budget);
  c.m_hint = j.value("m_hint", c.m_hint);
  c.refine_cap = j.value("refine_cap", c.refine_cap);
  c.grid_factor = j.value("grid_factor", c.grid_factor);
  c.beta_hat = j.value("beta_hat", c.beta_hat);
  c.verify_tolerance_scale = j.value("verify_tolerance_scale", c.verify_tolerance_scale);
  c.samples = j.value("samples", c.samples);
  c.weights = j.value("weights", c.weights);
  c.target = j.value("target", c.target);
  c.outdir = j.value("outdir", c.outdir);
  return c;
}

inline RunConfig load_config(const std::string& path) {
  if (path.empty()) return RunConfig{};
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw config_error("config parse failed: " + std::string(e.what()));
  }
  return config_from_json(j);
}

namespace detail {

constexpr double kQuadratureA = 1.1547005383792515;  // 2 / sqrt(3)

inline std::string out_path(const RunConfig& c, const std::string& name) {
  std::filesystem::create_directories(c.outdir);
  return (std::filesystem::path(c.outdir) / name).string();
}

inline void write_json_file(const std::string& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

inline void write_manifest(const RunConfig& c, const std::string& command) {
  json j;
  j["command"] = command;
  j["config"] = config_to_json(c);
  write_json_file(out_path(c, command + "_manifest.json"), j);
}

// FNV-1a over the bytes that determine the weight solve.
inline std::uint64_t weights_input_hash(const std::string& samples_bytes, const RunConfig& c) {
  std::uint64_t h = 1469598103934665603ULL;
  const auto mix = [&h](const std::string& s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 1099511628211ULL;
    }
  };
  mix(samples_bytes);
  mix(c.weights_mode);
  mix(std::to_string(c.effective_degree_budget()));
  mix(format_number(c.effective_sample_level()));
  mix(c.input_kind);
  mix(format_number(c.v));
  return h;
}

// Loads a samples CSV and applies the model-coordinate reduction when
// configured: x = y / (2v), values scaled by (4 pi v^2)^{q/2}.
inline void load_samples(const RunConfig& c, std::vector<Point>& pts, std::vector<double>& vals) {
  read_samples_csv(c.samples, pts, vals);
  if (pts.empty()) throw config_error("samples file has no rows: " + c.samples);
  if (static_cast<int>(pts[0].size()) != c.q)
    throw config_error("samples dimension does not match q");
  if (c.input_kind == "model") {
    const double factor = std::pow(4.0 * pi_v * c.v * c.v, 0.5 * c.q);
    for (auto& p : pts)
      for (auto& x : p) x /= 2.0 * c.v;
    for (auto& g : vals) g *= factor;
  } else if (c.input_kind != "scaled") {
    throw config_error("unknown input_kind: " + c.input_kind);
  }
}

inline QuadratureMeasure load_weights(const RunConfig& c) {
  auto qm = read_weights_csv(c.weights, kQuadratureA, c.effective_sample_level());
  const std::string meta_path = c.weights + ".meta.json";
  if (std::filesystem::exists(meta_path)) {
    const json meta = json::parse(read_text_file(meta_path));
    qm.degree_budget = meta.value("degree_budget", 0);
    qm.mode = meta.value("weights_mode", std::string("moment-exact")) == "paper-literal"
                  ? WeightMode::kPaperLiteral
                  : WeightMode::kMomentExact;
  } else {
    qm.degree_budget = c.effective_degree_budget();
  }
  return qm;
}

}  // namespace detail

/// gen: deterministic target + blurred samples.
/// Writes target JSON, samples CSV and a manifest embedding the config.
inline int cmd_gen(const RunConfig& c) {
  const auto target = gen_target(c.seed, c.L, c.q, c.target_box, c.eta, c.amp_lo, c.amp_hi);
  const auto samples = gen_sample_points(c.q, detail::kQuadratureA, c.effective_sample_level(),
                                         c.density_factor, c.seed, c.jitter_frac, c.beta_hat);
  const auto values = eval_blurred(target, nullptr, samples.points);

  json tj = target_to_json(target);
  tj["config"] = config_to_json(c);
  detail::write_json_file(detail::out_path(c, c.target), tj);
  write_samples_csv(detail::out_path(c, c.samples), samples.points, values);
  detail::write_manifest(c, "gen");
  return 0;
}

/// weights: solve (or reuse) the MZ quadrature weights for the samples.
inline int cmd_weights(const RunConfig& c) {
  std::vector<Point> pts;
  std::vector<double> vals;
  detail::load_samples(c, pts, vals);

  const std::uint64_t hash = detail::weights_input_hash(read_text_file(c.samples), c);
  const std::string weights_path = detail::out_path(c, c.weights);
  const std::string meta_path = weights_path + ".meta.json";
  if (std::filesystem::exists(weights_path) && std::filesystem::exists(meta_path)) {
    const json meta = json::parse(read_text_file(meta_path));
    if (meta.value("input_hash", std::string()) == std::to_string(hash)) {
      std::fprintf(stderr, "weights: cache hit, skipping solve\n");
      return 0;
    }
  }

  SampleSet set;
  set.points = pts;
  set.box_A = detail::kQuadratureA;
  set.box_n = c.effective_sample_level();
  set.q = c.q;
  set.validate();

  const int budget = c.effective_degree_budget();
  auto qm = solve_weights(set, budget, c.effective_weight_mode());

  // Density check against the recommended fill distance (warning only).
  const double fill_target = c.beta_hat / (c.effective_refine_cap() * detail::kQuadratureA);
  const auto stats = mesh_stats(set, std::max(fill_target / 4.0, 1e-3));
  qm.diagnostics.density_ok = stats.mesh_norm <= fill_target;
  if (!qm.diagnostics.density_ok)
    std::fprintf(stderr,
                 "weights: warning: mesh norm %.4g exceeds the recommended %.4g for level %.3g\n",
                 stats.mesh_norm, fill_target, c.effective_refine_cap());

  const int cert_degree = budget / 2;
  qm.diagnostics.product_orthogonality_residual = product_orthogonality_residual(qm, cert_degree);
  qm.diagnostics.certificate_degree = cert_degree;

  write_weights_csv(weights_path, qm);
  json meta;
  meta["input_hash"] = std::to_string(hash);
  meta["degree_budget"] = budget;
  meta["weights_mode"] = c.weights_mode;
  meta["certificate_degree"] = cert_degree;
  meta["diagnostics"] = {{"residual_norm", qm.diagnostics.residual_norm},
                         {"condition_estimate", qm.diagnostics.condition_estimate},
                         {"sum_abs_weights", qm.diagnostics.sum_abs_weights},
                         {"max_abs_weight", qm.diagnostics.max_abs_weight},
                         {"product_orthogonality_residual",
                          qm.diagnostics.product_orthogonality_residual},
                         {"rank", qm.diagnostics.rank},
                         {"n_constraints", qm.diagnostics.n_constraints},
                         {"mesh_norm", stats.mesh_norm},
                         {"separation", stats.separation},
                         {"density_ok", qm.diagnostics.density_ok}};
  meta["config"] = config_to_json(c);
  detail::write_json_file(meta_path, meta);
  detail::write_manifest(c, "weights");
  return 0;
}

/// recover: run the pipeline, write spikes JSON and both field CSVs.
inline int cmd_recover(const RunConfig& c) {
  std::vector<Point> pts;
  std::vector<double> vals;
  detail::load_samples(c, pts, vals);
  auto qm = detail::load_weights(c);
  if (qm.points.size() != pts.size())
    throw config_error("weights and samples disagree on the point count");

  const auto params = c.recovery_params();
  const auto spikes = recover(vals, qm, params);

  json sj = spikes_to_json(spikes);
  sj["config"] = config_to_json(c);
  detail::write_json_file(detail::out_path(c, "spikes.json"), sj);

  // Field dumps at both levels on the refined-level lattice.
  const double level_N = spikes.report.refine_level_used;
  const auto consts = spikes.constants;
  const double spacing =
      params.grid_factor * std::min(consts.alpha_hat / (2.0 * level_N), 0.5 / level_N);
  const auto grid = build_grid(level_N, c.q, spacing);
  const auto field_N = apply_at_points(qm, grid.points, params.kernel_at(level_N), vals);
  const auto field_n = apply_at_points(qm, grid.points, params.kernel_at(params.n), vals);
  write_field_csv(detail::out_path(c, "field_refined.csv"), field_N);
  write_field_csv(detail::out_path(c, "field_coarse.csv"), field_n);
  detail::write_manifest(c, "recover");
  return 0;
}

/// separate: the v = 1/2 reduction of an exponential-sum sample file.
inline int cmd_separate(const RunConfig& c) {
  std::vector<Point> pts;
  std::vector<double> fvals;
  read_samples_csv(c.samples, pts, fvals);
  if (pts.empty()) throw config_error("samples file has no rows: " + c.samples);
  if (static_cast<int>(pts[0].size()) != c.q)
    throw config_error("samples dimension does not match q");
  auto qm = detail::load_weights(c);
  if (qm.points.size() != pts.size())
    throw config_error("weights and samples disagree on the point count");

  const auto sep = separate_exponential_sum(pts, fvals, qm, c.recovery_params());
  json j;
  j["count"] = sep.count;
  j["exponents"] = sep.exponents;
  j["coefficients"] = sep.coefficients;
  j["spikes"] = spikes_to_json(sep.spikes);
  j["config"] = config_to_json(c);
  detail::write_json_file(detail::out_path(c, "exponentials.json"), j);
  detail::write_manifest(c, "separate");
  return 0;
}

/// verify: the oracle suite. Failures are report entries, never throws.
inline int cmd_verify(const RunConfig& c) {
  json items = json::array();
  const double scale = c.verify_tolerance_scale;
  const auto add = [&items, scale](const std::string& name, double value, double tol) {
    tol *= scale;
    items.push_back(
        {{"name", name}, {"value", value}, {"tolerance", tol}, {"pass", value <= tol}});
  };

  const auto spec = make_kernel_spec(c.n > 0 ? c.n : 3.0, c.q);

  // Mehler: series vs closed form, and the two closed forms at r = 1/sqrt(3).
  {
    detail::SplitMix rng(c.seed);
    const double r3 = 1.0 / std::sqrt(3.0);
    double worst_series = 0.0, worst_cross = 0.0;
    for (int t = 0; t < 40; ++t) {
      Point y(static_cast<std::size_t>(c.q)), z(static_cast<std::size_t>(c.q));
      for (auto& v : y) v = rng.uniform(-2.0, 2.0);
      for (auto& v : z) v = rng.uniform(-2.0, 2.0);
      worst_cross = std::max(
          worst_cross, std::fabs(mehler_special(c.q, y, z) - mehler_closed_form(c.q, r3, y, z)));
      if (c.q == 1) {
        const auto py = hermite_1d_all(60, y[0]), pz = hermite_1d_all(60, z[0]);
        double series = 0.0, rj = 1.0;
        for (int j = 0; j <= 60; ++j) {
          series += py[static_cast<std::size_t>(j)] * pz[static_cast<std::size_t>(j)] * rj;
          rj *= r3;
        }
        worst_series =
            std::max(worst_series, std::fabs(series - mehler_closed_form(1, r3, y, z)));
      }
    }
    if (c.q == 1) add("mehler_series_vs_closed", worst_series, 1e-10);
    add("mehler_special_vs_general", worst_cross, 1e-12);
  }

  // Kernel bridge identity on a handful of pairs.
  if (c.q == 1) {
    double worst = 0.0;
    for (double x : {-1.0, 0.0, 1.0})
      for (double y : {-1.0, 0.5})
        worst = std::max(worst, gauss_identity_residual(spec, {x}, {y}, 0.04));
    add("gauss_identity_residual", worst, 1e-6);
  }

  // Quadrature certificate and discrete-vs-continuous operator gap on the
  // standard fixture at the configured level.
  {
    const double nn = spec.n;
    const auto samples = gen_sample_points(c.q, detail::kQuadratureA,
                                           c.q == 1 ? std::sqrt(2.0) * nn : 2.7,
                                           c.density_factor, c.seed, c.jitter_frac, c.beta_hat);
    const int budget = static_cast<int>(std::ceil((c.q == 1 ? 4.0 : 2.0) * nn * nn));
    const auto qm = solve_weights(samples, budget, c.effective_weight_mode());
    add("weights_residual_norm", qm.diagnostics.residual_norm, 1e-8);
    add("product_orthogonality_residual",
        product_orthogonality_residual(qm, budget / 2), 1e-6);

    if (c.q == 1) {
      const Point x1{0.3};
      TargetSpec t;
      t.centers = {x1};
      t.amplitudes = {1.0};
      const auto data = eval_blurred(t, nullptr, qm.points);
      std::vector<Point> probes;
      for (double x = -2.0; x <= 2.01; x += 0.25) probes.push_back({x});
      const auto field = apply_at_points(qm, probes, spec, data);
      double worst = 0.0;
      for (std::size_t i = 0; i < probes.size(); ++i) {
        const double oracle = continuous_sero_oracle(
            spec, [&](const Point& u) { return std::exp(-dist2_sq(u, x1)); }, probes[i], 0.04);
        worst = std::max(worst, std::fabs(field.values[i] - oracle));
      }
      add("discrete_vs_continuous_gap", worst, 1e-4);
    }
  }

  bool all = true;
  for (const auto& item : items) all = all && item.at("pass").get<bool>();
  json report;
  report["items"] = items;
  report["all_pass"] = all;
  report["config"] = config_to_json(c);
  detail::write_json_file(detail::out_path(c, "verify_report.json"), report);
  detail::write_manifest(c, "verify");
  for (const auto& item : items)
    std::fprintf(stderr, "verify: %-34s %s (%.3g <= %.3g)\n",
                 item.at("name").get<std::string>().c_str(),
                 item.at("pass").get<bool>() ? "pass" : "FAIL", item.at("value").get<double>(),
                 item.at("tolerance").get<double>());
  return 0;
}

}  // namespace sera
