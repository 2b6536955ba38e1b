#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gsql/agents.hpp"
#include "gsql/mdp.hpp"

namespace gsql {

/// One learner entry of an experiment. For GSQL variants an empty `w` means
/// "auto": w = w*(mdp) per ensemble member.
struct AlgorithmSpec {
  Algorithm algorithm = Algorithm::speedy_q;
  std::optional<double> w;
  double step_exponent = 1.0;
  std::string label;  // defaults to the algorithm name

  std::string display_id() const;
  /// "auto", the numeric w, or "1" for learners without relaxation.
  std::string w_label() const;
};

struct OutputPaths {
  std::string csv = "curves.csv";
  std::string svg = "curves.svg";
  std::string manifest = "manifest.json";
};

struct ExperimentConfig {
  std::string experiment_id = "experiment";
  std::size_t ensemble_size = 1;
  MdpRecipe mdp;
  std::vector<AlgorithmSpec> algorithms;
  std::size_t iterations = 1000;
  std::size_t replicates = 1;
  std::uint64_t master_seed = 0;
  std::size_t error_record_stride = 10;
  /// All learners draw from the same stream per (mdp, replicate) instead of
  /// one stream per algorithm.
  bool paired_streams = false;

  std::vector<std::optional<double>> w_values;  // sweep-w; nullopt = w*
  std::vector<std::size_t> sizes;               // scale
  std::size_t iterations_per_state = 1000;      // scale: N(S) = |S| * this
  double delta = 0.1;                           // bound checks

  double solver_tolerance = 1e-8;
  std::size_t solver_max_iterations = 1'000'000;
  OutputPaths outputs;
};

/// Throws ConfigInvalid with the offending field.
void validate(const ExperimentConfig& config);

/// Ensemble-average error curve E_n of one learner.
struct ErrorCurve {
  std::string experiment_id;
  std::string algorithm_id;
  std::string w_label;
  std::size_t mdp_count = 0;
  std::vector<std::size_t> iterations;
  /// E_n with the max-norm over states.
  std::vector<double> errors;
  /// Same average with the mean over states instead of the max.
  std::vector<double> state_mean_errors;
  std::string ensemble_hash;
  std::uint64_t seed = 0;
};

struct RunRecord {
  std::size_t mdp_index = 0;
  std::string algorithm_id;
  std::size_t replicate = 0;
  double w = 1.0;
  double seconds_per_iteration = 0.0;
  double final_error = 0.0;
  /// GSQL1 only: ||Q_N - Q*_w|| exceeded the finite-time bound at config.delta.
  bool bound_violation = false;
};

struct EnsembleResult {
  std::vector<ErrorCurve> curves;
  std::vector<RunRecord> records;
  std::string ensemble_hash;
};

struct RunOptions {
  std::size_t jobs = 1;
};

struct ValueError {
  double max_norm = 0.0;
  double state_mean = 0.0;
};

/// |V*(i) - V(i)| reduced over states by max and by mean.
ValueError value_error(std::span<const double> v_star, std::span<const double> values);

/// E_n = (1/K) sum_k max_i |V*_k(i) - max_a Q_{k,n}(i,a)|.
/// Throws ShapeMismatch when the ensembles differ in size or shape.
double average_error(std::span<const QTable> q_tables, std::span<const std::vector<double>> v_stars);

/// Iterations at which errors are recorded: multiples of stride up to N,
/// plus N itself.
std::vector<std::size_t> record_schedule(std::size_t iterations, std::size_t stride);

/// Member k of the configured ensemble.
Mdp ensemble_mdp(const ExperimentConfig& config, std::size_t k);

/// Runs every algorithm on every ensemble MDP for config.replicates
/// replicates from Q_0 = 0, aggregating E_n per algorithm. Deterministic in
/// config.master_seed regardless of options.jobs.
EnsembleResult run_ensemble(const ExperimentConfig& config, const RunOptions& options = {});

/// GSQL1 on ensemble member 0 for each w (nullopt = w*). Throws
/// RelaxationOutOfRange if any w exceeds that MDP's w*.
EnsembleResult w_sweep(const ExperimentConfig& config,
                       const std::vector<std::optional<double>>& w_values,
                       const RunOptions& options = {});

struct ScaleRow {
  std::size_t num_states = 0;
  std::size_t iterations = 0;
  double sql_error = 0.0;
  double gsql_error = 0.0;
  double error_difference = 0.0;  // E^SQL - E^GSQL at N(S)
  double seconds_per_iteration = 0.0;
  std::string failure;  // non-empty when the size could not be run
};

struct ScaleResult {
  std::vector<ScaleRow> rows;
  std::vector<ErrorCurve> curves;
};

/// SQL vs GSQL1 (w = w*) for each |S| in `sizes` with N(S) = |S| *
/// config.iterations_per_state. A size that runs out of memory is reported
/// in its row and the remaining sizes still run.
ScaleResult scalability_experiment(const std::vector<std::size_t>& sizes,
                                   const ExperimentConfig& config, const RunOptions& options = {});

struct BoundCheckResult {
  double violation_rate = 0.0;
  double bound = 0.0;
  double max_observed_error = 0.0;
  std::vector<double> errors;  // ||Q_N - Q*|| per replicate
};

/// `replicates` independent GSQL1 runs of N sweeps compared against
/// pac_bound(params, N, delta). Requires replicates >= 100.
BoundCheckResult bound_check(const Mdp& mdp, const RelaxationParams& params, std::size_t n,
                             double delta, std::size_t replicates, std::uint64_t seed,
                             const RunOptions& options = {});

}  // namespace gsql
