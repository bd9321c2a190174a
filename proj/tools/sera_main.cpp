// Command-line driver: sera gen|weights|recover|separate|verify
//   --config <path> supplies a JSON run configuration; individual flags
//   override fields of the same name. SERA_THREADS caps worker threads.
// Exit codes: 0 success, 2 input/configuration error, 3 recovery-validation
// failure.

#include <CLI11.hpp>
#include <cstdio>
#include <functional>
#include <optional>
#include <string>

#include "sera/sera.hpp"

namespace {

struct Overrides {
  std::optional<int> q, S, L, degree_budget;
  std::optional<double> n, rho, mu, eta, v, target_box, amp_lo, amp_hi, sample_level,
      density_factor, jitter_frac, m_hint, refine_cap, grid_factor, beta_hat;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> weights_mode, amplitude_mode, rescale_mode, input_kind, samples,
      weights, target, outdir;
};

void add_flags(CLI::App* cmd, std::string& config_path, Overrides& o) {
  cmd->add_option("--config", config_path, "JSON run configuration");
  cmd->add_option("--q", o.q);
  cmd->add_option("--n", o.n);
  cmd->add_option("--rho", o.rho);
  cmd->add_option("--mu", o.mu);
  cmd->add_option("--eta", o.eta);
  cmd->add_option("--S", o.S);
  cmd->add_option("--v", o.v);
  cmd->add_option("--seed", o.seed);
  cmd->add_option("--L", o.L);
  cmd->add_option("--target_box", o.target_box);
  cmd->add_option("--amp_lo", o.amp_lo);
  cmd->add_option("--amp_hi", o.amp_hi);
  cmd->add_option("--sample_level", o.sample_level);
  cmd->add_option("--density_factor", o.density_factor);
  cmd->add_option("--jitter_frac", o.jitter_frac);
  cmd->add_option("--degree_budget", o.degree_budget);
  cmd->add_option("--m_hint", o.m_hint);
  cmd->add_option("--refine_cap", o.refine_cap);
  cmd->add_option("--grid_factor", o.grid_factor);
  cmd->add_option("--beta_hat", o.beta_hat);
  cmd->add_option("--weights_mode", o.weights_mode);
  cmd->add_option("--amplitude_mode", o.amplitude_mode);
  cmd->add_option("--rescale_mode", o.rescale_mode);
  cmd->add_option("--input_kind", o.input_kind);
  cmd->add_option("--samples", o.samples);
  cmd->add_option("--weights", o.weights);
  cmd->add_option("--target", o.target);
  cmd->add_option("--outdir", o.outdir);
}

sera::RunConfig merge(const std::string& config_path, const Overrides& o) {
  sera::RunConfig c = sera::load_config(config_path);
  if (o.q) c.q = *o.q;
  if (o.n) c.n = *o.n;
  if (o.rho) c.rho = *o.rho;
  if (o.mu) c.mu = *o.mu;
  if (o.eta) c.eta = *o.eta;
  if (o.S) c.S = *o.S;
  if (o.v) c.v = *o.v;
  if (o.seed) c.seed = *o.seed;
  if (o.L) c.L = *o.L;
  if (o.target_box) c.target_box = *o.target_box;
  if (o.amp_lo) c.amp_lo = *o.amp_lo;
  if (o.amp_hi) c.amp_hi = *o.amp_hi;
  if (o.sample_level) c.sample_level = *o.sample_level;
  if (o.density_factor) c.density_factor = *o.density_factor;
  if (o.jitter_frac) c.jitter_frac = *o.jitter_frac;
  if (o.degree_budget) c.degree_budget = *o.degree_budget;
  if (o.m_hint) c.m_hint = *o.m_hint;
  if (o.refine_cap) c.refine_cap = *o.refine_cap;
  if (o.grid_factor) c.grid_factor = *o.grid_factor;
  if (o.beta_hat) c.beta_hat = *o.beta_hat;
  if (o.weights_mode) c.weights_mode = *o.weights_mode;
  if (o.amplitude_mode) c.amplitude_mode = *o.amplitude_mode;
  if (o.rescale_mode) c.rescale_mode = *o.rescale_mode;
  if (o.input_kind) c.input_kind = *o.input_kind;
  if (o.samples) c.samples = *o.samples;
  if (o.weights) c.weights = *o.weights;
  if (o.target) c.target = *o.target;
  if (o.outdir) c.outdir = *o.outdir;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SERA: super-resolution spike recovery and exponential-sum separation"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides o;
  int (*run)(const sera::RunConfig&) = nullptr;

  for (const auto& [name, fn, help] :
       {std::tuple{"gen", &sera::cmd_gen, "generate a target and blurred samples"},
        std::tuple{"weights", &sera::cmd_weights, "solve quadrature weights for the samples"},
        std::tuple{"recover", &sera::cmd_recover, "recover spikes from samples and weights"},
        std::tuple{"separate", &sera::cmd_separate, "separate a real exponential sum"},
        std::tuple{"verify", &sera::cmd_verify, "run the oracle verification suite"}}) {
    CLI::App* cmd = app.add_subcommand(name, help);
    add_flags(cmd, config_path, o);
    cmd->callback([fn, &run] { run = fn; });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    return run(merge(config_path, o));
  } catch (const sera::recovery_error& e) {
    std::fprintf(stderr, "recovery error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
