// gsql: solvers and reproducible ensemble experiments for generalized speedy
// Q-learning.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "gsql/bellman.hpp"
#include "gsql/bounds.hpp"
#include "gsql/config.hpp"
#include "gsql/error.hpp"
#include "gsql/harness.hpp"
#include "gsql/io.hpp"
#include "gsql/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kParse = 2,
  kValidation = 3,
  kRelaxation = 4,
  kNoConvergence = 5,
  kIo = 6,
};

constexpr const char* kExitCodeHelp =
    "Exit codes:\n"
    "  0  success\n"
    "  1  usage error\n"
    "  2  parse error (malformed JSON or MDP/config layout)\n"
    "  3  validation error (config field or argument out of range)\n"
    "  4  relaxation parameter w outside (0, w*]\n"
    "  5  solver did not converge within --iters sweeps\n"
    "  6  I/O error (file not found, unwritable output)\n"
    "Output goes to <out>/<command>-<config hash>/, where <out> is --out, else\n"
    "$GSQL_OUT_DIR, else ./gsql-out.";

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::size_t jobs = 1;
  std::optional<std::size_t> iters;
};

fs::path base_out_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("GSQL_OUT_DIR"); env && *env) return env;
  return "gsql-out";
}

fs::path make_run_dir(const std::string& flag, std::string_view command, const std::string& hash) {
  const fs::path dir = base_out_dir(flag) / fmt::format("{}-{}", command, hash);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw gsql::IoError(dir.string(), ec.message());
  return dir;
}

gsql::ExperimentConfig load_with_overrides(const CommonOptions& opts) {
  auto config = gsql::load_config(opts.config);
  if (opts.seed) config.master_seed = *opts.seed;
  return config;
}

void write_manifest(const fs::path& dir, const gsql::ExperimentConfig& config, std::string_view command,
                    std::span<const gsql::ErrorCurve> curves, std::span<const gsql::RunRecord> records) {
  const auto manifest = gsql::make_manifest(config, command, curves, records);
  gsql::write_json_file(dir / config.outputs.manifest, manifest);
  fmt::print("manifest hash: {}\n", gsql::fnv1a_hex(manifest.dump()));
}

void write_timings(const fs::path& dir, std::span<const gsql::RunRecord> records) {
  json runs = json::array();
  for (const auto& r : records) {
    runs.push_back({{"mdp_index", r.mdp_index},
                    {"algorithm", r.algorithm_id},
                    {"replicate", r.replicate},
                    {"seconds_per_iteration", r.seconds_per_iteration}});
  }
  gsql::write_json_file(dir / "timings.json", json{{"runs", runs}});
}

void print_curve_summary(std::span<const gsql::ErrorCurve> curves) {
  fmt::print("{:<20} {:>10} {:>10} {:>16}\n", "algorithm", "w", "N", "final E_N");
  for (const auto& c : curves) {
    fmt::print("{:<20} {:>10} {:>10} {:>16.8g}\n", c.algorithm_id, c.w_label, c.iterations.back(),
               c.errors.back());
  }
}

void emit_ensemble(const fs::path& dir, const gsql::ExperimentConfig& config, std::string_view command,
                   const gsql::EnsembleResult& result) {
  gsql::emit_csv(result.curves, dir / config.outputs.csv);
  gsql::emit_runs_csv(result.records, dir / "runs.csv");
  gsql::emit_svg(result.curves, dir / config.outputs.svg, config.experiment_id);
  write_timings(dir, result.records);
  write_manifest(dir, config, command, result.curves, result.records);
}

int cmd_solve(const std::string& mdp_file, const std::string& w_text, double tol, std::size_t max_iter,
              const std::string& out) {
  const auto mdp = gsql::load_mdp(mdp_file);
  const double ws = gsql::w_star(mdp);
  double w = ws;
  if (w_text != "auto") {
    try {
      std::size_t used = 0;
      w = std::stod(w_text, &used);
      if (used != w_text.size()) throw std::invalid_argument(w_text);
    } catch (const std::exception&) {
      throw gsql::InvalidArgument(fmt::format("--w must be a number or 'auto', got '{}'", w_text));
    }
  }
  const auto params = gsql::RelaxationParams::make(mdp, w);
  const auto result = gsql::value_iterate(mdp, params, gsql::QTable::zeros_like(mdp), tol, max_iter);

  fmt::print("w* = {:.10g}\nw = {:.10g}\niterations = {}\nresidual = {:.3e}\n", ws, params.w,
             result.iterations, result.residual);
  fmt::print("Q*:\n");
  for (std::size_t i = 0; i < mdp.num_states(); ++i) {
    fmt::print("  {}\n", fmt::join(result.q.row(i), " "));
  }
  fmt::print("V* = [{}]\n", fmt::join(gsql::state_values(result.q), ", "));
  fmt::print("pi* = [{}]\n", fmt::join(gsql::greedy_policy(result.q), ", "));

  const json qdoc = gsql::qtable_to_json(result.q);
  const std::string hash = gsql::fnv1a_hex(
      fmt::format("{}|{}|{}|{}", gsql::mdp_to_json(mdp).dump(), params.w, tol, max_iter));
  const auto dir = make_run_dir(out, "solve", hash);
  gsql::write_json_file(dir / "qstar.json", qdoc);
  fmt::print("wrote {}\n", (dir / "qstar.json").string());

  if (!result.converged) {
    fmt::print(stderr, "no convergence: residual {:.3e} > tol {:.3e} after {} sweeps\n",
               result.residual, tol, result.iterations);
    return kNoConvergence;
  }
  return kOk;
}

int cmd_gen_mdp(const gsql::MdpRecipe& recipe, std::uint64_t seed, const std::string& path) {
  const auto mdp = gsql::random_mdp(recipe, seed);
  gsql::save_mdp(path, mdp);
  fmt::print("wrote {} ({} states, {} actions, w* = {:.10g})\n", path, mdp.num_states(),
             mdp.num_actions(), gsql::w_star(mdp));
  return kOk;
}

int cmd_run(const CommonOptions& opts) {
  auto config = load_with_overrides(opts);
  if (opts.iters) config.iterations = *opts.iters;
  const auto dir = make_run_dir(opts.out, "run", gsql::config_hash(config));
  const auto result = gsql::run_ensemble(config, {opts.jobs});
  print_curve_summary(result.curves);
  emit_ensemble(dir, config, "run", result);
  fmt::print("artifacts in {}\n", dir.string());
  return kOk;
}

int cmd_sweep_w(const CommonOptions& opts) {
  auto config = load_with_overrides(opts);
  if (opts.iters) config.iterations = *opts.iters;
  const auto dir = make_run_dir(opts.out, "sweep-w", gsql::config_hash(config));
  const auto mdp = gsql::ensemble_mdp(config, 0);
  fmt::print("fixed MDP w* = {:.10g}\n", gsql::w_star(mdp));
  const auto result = gsql::w_sweep(config, config.w_values, {opts.jobs});
  print_curve_summary(result.curves);
  emit_ensemble(dir, config, "sweep-w", result);
  fmt::print("artifacts in {}\n", dir.string());
  return kOk;
}

int cmd_scale(const CommonOptions& opts) {
  auto config = load_with_overrides(opts);
  if (opts.iters) config.iterations_per_state = *opts.iters;
  const auto dir = make_run_dir(opts.out, "scale", gsql::config_hash(config));
  const auto result = gsql::scalability_experiment(config.sizes, config, {opts.jobs});

  fmt::print("{:>8} {:>10} {:>14} {:>14} {:>16} {:>18}\n", "|S|", "N(S)", "E^SQL", "E^GSQL",
             "E^SQL - E^GSQL", "sec/iteration");
  std::string table = "num_states,iterations,sql_error,gsql_error,error_difference,status\n";
  json timings = json::array();
  for (const auto& row : result.rows) {
    if (!row.failure.empty()) {
      fmt::print("{:>8} {:>10} {}\n", row.num_states, row.iterations, row.failure);
    } else {
      fmt::print("{:>8} {:>10} {:>14.6g} {:>14.6g} {:>16.6g} {:>18.3e}\n", row.num_states,
                 row.iterations, row.sql_error, row.gsql_error, row.error_difference,
                 row.seconds_per_iteration);
    }
    table += fmt::format("{},{},{},{},{},{}\n", row.num_states, row.iterations, row.sql_error,
                         row.gsql_error, row.error_difference, row.failure.empty() ? "ok" : row.failure);
    timings.push_back({{"num_states", row.num_states}, {"seconds_per_iteration", row.seconds_per_iteration}});
  }
  gsql::write_text_file(dir / "scale.csv", table);
  gsql::write_json_file(dir / "timings.json", json{{"sizes", timings}});
  if (!result.curves.empty()) {
    gsql::emit_csv(result.curves, dir / config.outputs.csv);
    gsql::emit_svg(result.curves, dir / config.outputs.svg, config.experiment_id);
  }
  write_manifest(dir, config, "scale", result.curves, {});
  fmt::print("artifacts in {}\n", dir.string());
  return kOk;
}

int cmd_bound_check(const CommonOptions& opts) {
  auto config = load_with_overrides(opts);
  if (opts.iters) config.iterations = *opts.iters;
  const auto dir = make_run_dir(opts.out, "bound-check", gsql::config_hash(config));
  const auto mdp = gsql::ensemble_mdp(config, 0);
  std::optional<double> w;
  for (const auto& spec : config.algorithms) {
    if (spec.algorithm == gsql::Algorithm::gsql1) {
      w = spec.w;
      break;
    }
  }
  const auto params = gsql::RelaxationParams::make(mdp, w.value_or(gsql::w_star(mdp)));
  const auto result = gsql::bound_check(mdp, params, config.iterations, config.delta,
                                        config.replicates, config.master_seed, {opts.jobs});
  fmt::print("w = {:.10g} (w* = {:.10g}), N = {}, delta = {}, replicates = {}\n", params.w,
             params.w_star, config.iterations, config.delta, config.replicates);
  fmt::print("bound = {:.8g}\nmax observed ||Q_N - Q*|| = {:.8g}\nviolation rate = {}\n", result.bound,
             result.max_observed_error, result.violation_rate);
  const json doc{{"w", params.w},
                 {"w_star", params.w_star},
                 {"iterations", config.iterations},
                 {"delta", config.delta},
                 {"replicates", config.replicates},
                 {"bound", result.bound},
                 {"max_observed_error", result.max_observed_error},
                 {"violation_rate", result.violation_rate},
                 {"errors", result.errors}};
  gsql::write_json_file(dir / "bound.json", doc);
  write_manifest(dir, config, "bound-check", {}, {});
  fmt::print("artifacts in {}\n", dir.string());
  return kOk;
}

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config, "experiment configuration (JSON)")->required();
  cmd->add_option("--seed", opts.seed, "override the configured master seed");
  cmd->add_option("--out", opts.out, "output root directory");
  cmd->add_option("--jobs", opts.jobs, "maximum parallel runs")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalized speedy Q-learning: solvers and ensemble experiments"};
  app.footer(kExitCodeHelp);
  app.require_subcommand(1);

  std::string mdp_file, w_text = "auto", solve_out;
  double tol = 1e-8;
  std::size_t max_iter = 1'000'000;
  auto* solve = app.add_subcommand("solve", "solve the generalized Bellman fixed point of an MDP file");
  solve->add_option("mdp", mdp_file, "MDP JSON file")->required();
  solve->add_option("--w", w_text, "relaxation parameter or 'auto' for w*");
  solve->add_option("--tol", tol, "max-norm stopping tolerance")->check(CLI::PositiveNumber);
  solve->add_option("--iters", max_iter, "maximum sweeps")->check(CLI::PositiveNumber);
  solve->add_option("--out", solve_out, "output root directory");

  gsql::MdpRecipe recipe;
  std::uint64_t gen_seed = 0;
  std::string gen_path;
  auto* gen = app.add_subcommand("gen-mdp", "write a random MDP as JSON");
  gen->add_option("--states", recipe.num_states)->required();
  gen->add_option("--actions", recipe.num_actions)->required();
  gen->add_option("--min-self-loop", recipe.min_self_loop);
  gen->add_option("--spread", recipe.self_loop_spread, "self-loop spread; 0 pins P(i|i,a) = min-self-loop");
  gen->add_option("--r-max", recipe.r_max);
  gen->add_option("--discount", recipe.discount);
  gen->add_option("--seed", gen_seed);
  gen->add_option("--out", gen_path, "output file")->required();

  CommonOptions run_opts, sweep_opts, scale_opts, bound_opts;
  auto* run = app.add_subcommand("run", "ensemble error curves for the configured learners");
  add_common(run, run_opts);
  run->add_option("--iters", run_opts.iters, "override the number of sweeps N");
  auto* sweep = app.add_subcommand("sweep-w", "GSQL1 error curves over the configured w_values");
  add_common(sweep, sweep_opts);
  sweep->add_option("--iters", sweep_opts.iters, "override the number of sweeps N");
  auto* scale = app.add_subcommand("scale", "SQL vs GSQL1 across state-space sizes");
  add_common(scale, scale_opts);
  scale->add_option("--iters", scale_opts.iters, "override iterations_per_state");
  auto* bound = app.add_subcommand("bound-check", "empirical check of the finite-time bound");
  add_common(bound, bound_opts);
  bound->add_option("--iters", bound_opts.iters, "override the number of sweeps N");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*solve) return cmd_solve(mdp_file, w_text, tol, max_iter, solve_out);
    if (*gen) return cmd_gen_mdp(recipe, gen_seed, gen_path);
    if (*run) return cmd_run(run_opts);
    if (*sweep) return cmd_sweep_w(sweep_opts);
    if (*scale) return cmd_scale(scale_opts);
    if (*bound) return cmd_bound_check(bound_opts);
  } catch (const gsql::RelaxationOutOfRange& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kRelaxation;
  } catch (const gsql::ParseError& e) {
    fmt::print(stderr, "parse error: {}\n", e.what());
    return kParse;
  } catch (const gsql::IoError& e) {
    fmt::print(stderr, "I/O error: {}\n", e.what());
    return kIo;
  } catch (const gsql::ConfigInvalid& e) {
    fmt::print(stderr, "invalid config: {}\n", e.what());
    return kValidation;
  } catch (const gsql::InvalidArgument& e) {
    fmt::print(stderr, "invalid argument: {}\n", e.what());
    return kValidation;
  } catch (const gsql::ShapeMismatch& e) {
    fmt::print(stderr, "invalid argument: {}\n", e.what());
    return kValidation;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kUsage;
  }
  return kUsage;
}
