#include "gsql/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <memory>
#include <mutex>
#include <new>
#include <thread>

#include <fmt/format.h>

#include "gsql/bellman.hpp"
#include "gsql/bounds.hpp"
#include "gsql/error.hpp"
#include "gsql/io.hpp"
#include "gsql/rng.hpp"
#include "gsql/sampling.hpp"

namespace gsql {
namespace {

/// Runs body(0..count-1) on up to `jobs` threads. The first exception thrown
/// by any item is rethrown after all workers have joined.
template <class Body>
void parallel_for(std::size_t count, std::size_t jobs, Body&& body) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t k = 0; k < count; ++k) body(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (std::size_t t = 0; t < jobs; ++t) {
    workers.emplace_back([&] {
      for (std::size_t k = next.fetch_add(1); k < count; k = next.fetch_add(1)) {
        try {
          body(k);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next.store(count);
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (failure) std::rethrow_exception(failure);
}

std::string format_w(double w) { return fmt::format("{}", w); }

struct RunOutcome {
  std::vector<double> err_max;
  std::vector<double> err_mean;
  double seconds_per_iteration = 0.0;
  double final_error = 0.0;
  QTable final_q;
};

constexpr std::size_t kTimedSweeps = 100;

RunOutcome run_single(const Mdp& mdp, Algorithm algorithm, std::optional<RelaxationParams> params,
                      std::shared_ptr<const MuDistribution> mu, StepSizeRule rule,
                      const std::vector<double>& v_star, const std::vector<std::size_t>& schedule,
                      std::size_t iterations, SampleStream stream) {
  Learner learner(algorithm, mdp, params, QTable::zeros_like(mdp), rule, std::move(mu));
  RunOutcome out;
  out.err_max.reserve(schedule.size());
  out.err_mean.reserve(schedule.size());

  const std::size_t timed_from = iterations > kTimedSweeps ? iterations - kTimedSweeps : 0;
  std::chrono::steady_clock::duration timed{};
  std::size_t next_record = 0;
  for (std::size_t n = 1; n <= iterations; ++n) {
    if (n > timed_from) {
      const auto start = std::chrono::steady_clock::now();
      learner.sweep(stream);
      timed += std::chrono::steady_clock::now() - start;
    } else {
      learner.sweep(stream);
    }
    if (next_record < schedule.size() && schedule[next_record] == n) {
      const auto err = value_error(v_star, learner.estimate_values());
      out.err_max.push_back(err.max_norm);
      out.err_mean.push_back(err.state_mean);
      ++next_record;
    }
  }
  const auto timed_count = static_cast<double>(iterations - timed_from);
  out.seconds_per_iteration =
      std::max(std::chrono::duration<double>(timed).count() / timed_count, 1e-12);
  out.final_error = out.err_max.empty() ? 0.0 : out.err_max.back();
  out.final_q = learner.estimate();
  return out;
}

/// Per-MDP data shared read-only by all runs on that MDP.
struct PreparedMdp {
  Mdp mdp;
  std::vector<double> v_star;
  std::vector<std::optional<RelaxationParams>> params;       // per algorithm
  std::vector<std::shared_ptr<const MuDistribution>> mu;     // per algorithm, GSQL1 only
  std::vector<std::optional<QTable>> q_star;                 // per algorithm, GSQL1 only
};

std::string hash_ensemble(const std::vector<PreparedMdp>& prepared) {
  std::string bytes;
  for (const auto& p : prepared) {
    const auto& t = p.mdp.transitions();
    const auto& r = p.mdp.rewards();
    bytes.append(reinterpret_cast<const char*>(t.data()), t.size() * sizeof(double));
    bytes.append(reinterpret_cast<const char*>(r.data()), r.size() * sizeof(double));
  }
  return fnv1a_hex(bytes);
}

std::vector<double> solve_state_values(const Mdp& mdp, const ExperimentConfig& config,
                                       std::size_t k) {
  const auto solved = value_iterate(mdp, RelaxationParams::make(mdp, 1.0), QTable::zeros_like(mdp),
                                    config.solver_tolerance, config.solver_max_iterations);
  if (!solved.converged) {
    throw Error(fmt::format("reference solve for MDP {} stopped at residual {} after {} sweeps", k,
                            solved.residual, solved.iterations));
  }
  return state_values(solved.q);
}

void check_recipe(const MdpRecipe& r) {
  if (r.num_states == 0) throw ConfigInvalid("mdp.num_states", "must be positive");
  if (r.num_actions == 0) throw ConfigInvalid("mdp.num_actions", "must be positive");
  if (!(r.min_self_loop >= 0.0 && r.min_self_loop < 1.0)) {
    throw ConfigInvalid("mdp.min_self_loop", "must lie in [0, 1)");
  }
  if (!(r.self_loop_spread >= 0.0 && r.self_loop_spread <= 1.0)) {
    throw ConfigInvalid("mdp.self_loop_spread", "must lie in [0, 1]");
  }
  if (!(r.r_max > 0.0) || !std::isfinite(r.r_max)) throw ConfigInvalid("mdp.r_max", "must be positive");
  if (!(r.discount > 0.0 && r.discount < 1.0)) throw ConfigInvalid("mdp.discount", "must lie in (0, 1)");
}

}  // namespace

std::string AlgorithmSpec::display_id() const {
  return label.empty() ? std::string(algorithm_name(algorithm)) : label;
}

std::string AlgorithmSpec::w_label() const {
  if (!uses_relaxation(algorithm)) return "1";
  return w ? format_w(*w) : "auto";
}

void validate(const ExperimentConfig& config) {
  if (config.experiment_id.empty()) throw ConfigInvalid("experiment_id", "must not be empty");
  if (config.ensemble_size == 0) throw ConfigInvalid("ensemble_size", "must be at least 1");
  if (config.iterations == 0) throw ConfigInvalid("iterations", "must be at least 1");
  if (config.replicates == 0) throw ConfigInvalid("replicates", "must be at least 1");
  if (config.error_record_stride == 0) throw ConfigInvalid("error_record_stride", "must be at least 1");
  if (config.iterations_per_state == 0) throw ConfigInvalid("iterations_per_state", "must be at least 1");
  if (!(config.delta > 0.0 && config.delta < 1.0)) throw ConfigInvalid("delta", "must lie in (0, 1)");
  if (!(config.solver_tolerance > 0.0)) throw ConfigInvalid("solver_tolerance", "must be positive");
  if (config.solver_max_iterations == 0) throw ConfigInvalid("solver_max_iterations", "must be positive");
  check_recipe(config.mdp);
  for (std::size_t m = 0; m < config.algorithms.size(); ++m) {
    const auto& spec = config.algorithms[m];
    const auto field = fmt::format("algorithms[{}]", m);
    if (spec.w && !(*spec.w > 0.0 && std::isfinite(*spec.w))) {
      throw ConfigInvalid(field + ".w", "must be positive or \"auto\"");
    }
    if (!(spec.step_exponent > 0.5 && spec.step_exponent <= 1.0)) {
      throw ConfigInvalid(field + ".step_exponent", "must lie in (0.5, 1]");
    }
  }
  for (std::size_t m = 0; m < config.w_values.size(); ++m) {
    const auto& w = config.w_values[m];
    if (w && !(*w > 0.0 && std::isfinite(*w))) {
      throw ConfigInvalid(fmt::format("w_values[{}]", m), "must be positive or \"auto\"");
    }
  }
  for (std::size_t m = 0; m < config.sizes.size(); ++m) {
    if (config.sizes[m] == 0) throw ConfigInvalid(fmt::format("sizes[{}]", m), "must be positive");
    if (m > 0 && config.sizes[m] <= config.sizes[m - 1]) {
      throw ConfigInvalid(fmt::format("sizes[{}]", m), "sizes must be strictly ascending");
    }
  }
}

ValueError value_error(std::span<const double> v_star, std::span<const double> values) {
  if (v_star.size() != values.size() || v_star.empty()) {
    throw ShapeMismatch("value vectors differ in length");
  }
  ValueError out;
  double sum = 0.0;
  for (std::size_t i = 0; i < v_star.size(); ++i) {
    const double d = std::abs(v_star[i] - values[i]);
    out.max_norm = std::isnan(d) ? d : std::max(out.max_norm, d);
    sum += d;
  }
  out.state_mean = sum / static_cast<double>(v_star.size());
  return out;
}

double average_error(std::span<const QTable> q_tables, std::span<const std::vector<double>> v_stars) {
  if (q_tables.size() != v_stars.size() || q_tables.empty()) {
    throw ShapeMismatch(fmt::format("ensemble mismatch: {} Q-tables, {} reference value vectors",
                                    q_tables.size(), v_stars.size()));
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < q_tables.size(); ++k) {
    sum += value_error(v_stars[k], state_values(q_tables[k])).max_norm;
  }
  return sum / static_cast<double>(q_tables.size());
}

std::vector<std::size_t> record_schedule(std::size_t iterations, std::size_t stride) {
  if (stride == 0) throw InvalidArgument("stride must be positive");
  std::vector<std::size_t> out;
  for (std::size_t n = stride; n <= iterations; n += stride) out.push_back(n);
  if (out.empty() || out.back() != iterations) out.push_back(iterations);
  return out;
}

Mdp ensemble_mdp(const ExperimentConfig& config, std::size_t k) {
  return random_mdp(config.mdp, derive_seed(config.master_seed, k));
}

EnsembleResult run_ensemble(const ExperimentConfig& config, const RunOptions& options) {
  validate(config);
  if (config.algorithms.empty()) throw ConfigInvalid("algorithms", "must list at least one learner");

  const std::size_t num_alg = config.algorithms.size();
  std::vector<PreparedMdp> prepared;
  prepared.reserve(config.ensemble_size);
  for (std::size_t k = 0; k < config.ensemble_size; ++k) {
    Mdp mdp = ensemble_mdp(config, k);
    PreparedMdp p{std::move(mdp), {}, std::vector<std::optional<RelaxationParams>>(num_alg),
                  std::vector<std::shared_ptr<const MuDistribution>>(num_alg),
                  std::vector<std::optional<QTable>>(num_alg)};
    for (std::size_t m = 0; m < num_alg; ++m) {
      const auto& spec = config.algorithms[m];
      if (!uses_relaxation(spec.algorithm)) continue;
      const double ws = w_star(p.mdp);
      const double w = spec.w.value_or(ws);
      if (w > ws * (1.0 + 1e-12)) {
        throw RelaxationOutOfRange(w, ws, fmt::format("algorithms[{}] on MDP {}", m, k));
      }
      p.params[m] = RelaxationParams::make(p.mdp, w);
    }
    prepared.push_back(std::move(p));
  }

  // Reference solves and GSQL1 auxiliary distributions, one task per MDP.
  parallel_for(prepared.size(), options.jobs, [&](std::size_t k) {
    auto& p = prepared[k];
    p.v_star = solve_state_values(p.mdp, config, k);
    for (std::size_t m = 0; m < num_alg; ++m) {
      if (config.algorithms[m].algorithm != Algorithm::gsql1) continue;
      p.mu[m] = std::make_shared<const MuDistribution>(p.mdp, *p.params[m]);
      p.q_star[m] = value_iterate(p.mdp, *p.params[m], QTable::zeros_like(p.mdp),
                                  config.solver_tolerance, config.solver_max_iterations)
                        .q;
    }
  });

  const auto schedule = record_schedule(config.iterations, config.error_record_stride);
  const std::size_t reps = config.replicates;
  const std::size_t total = config.ensemble_size * num_alg * reps;
  std::vector<RunOutcome> outcomes(total);
  auto index = [&](std::size_t k, std::size_t m, std::size_t r) { return (k * num_alg + m) * reps + r; };

  parallel_for(total, options.jobs, [&](std::size_t item) {
    const std::size_t r = item % reps;
    const std::size_t m = (item / reps) % num_alg;
    const std::size_t k = item / (reps * num_alg);
    const auto& p = prepared[k];
    const auto& spec = config.algorithms[m];
    const StreamId id{k, config.paired_streams ? 0 : m, r};
    outcomes[item] = run_single(p.mdp, spec.algorithm, p.params[m], p.mu[m],
                                StepSizeRule(spec.step_exponent), p.v_star, schedule,
                                config.iterations, SampleStream(config.master_seed, id));
  });

  EnsembleResult result;
  result.ensemble_hash = hash_ensemble(prepared);
  const double runs_per_curve = static_cast<double>(config.ensemble_size * reps);
  for (std::size_t m = 0; m < num_alg; ++m) {
    const auto& spec = config.algorithms[m];
    ErrorCurve curve;
    curve.experiment_id = config.experiment_id;
    curve.algorithm_id = spec.display_id();
    curve.w_label = spec.w_label();
    curve.mdp_count = config.ensemble_size;
    curve.iterations = schedule;
    curve.errors.assign(schedule.size(), 0.0);
    curve.state_mean_errors.assign(schedule.size(), 0.0);
    curve.ensemble_hash = result.ensemble_hash;
    curve.seed = config.master_seed;
    for (std::size_t k = 0; k < config.ensemble_size; ++k) {
      for (std::size_t r = 0; r < reps; ++r) {
        const auto& o = outcomes[index(k, m, r)];
        for (std::size_t s = 0; s < schedule.size(); ++s) {
          curve.errors[s] += o.err_max[s];
          curve.state_mean_errors[s] += o.err_mean[s];
        }
      }
    }
    for (std::size_t s = 0; s < schedule.size(); ++s) {
      curve.errors[s] /= runs_per_curve;
      curve.state_mean_errors[s] /= runs_per_curve;
    }
    result.curves.push_back(std::move(curve));
  }

  for (std::size_t k = 0; k < config.ensemble_size; ++k) {
    const auto& p = prepared[k];
    for (std::size_t m = 0; m < num_alg; ++m) {
      const auto& spec = config.algorithms[m];
      for (std::size_t r = 0; r < reps; ++r) {
        const auto& o = outcomes[index(k, m, r)];
        RunRecord rec;
        rec.mdp_index = k;
        rec.algorithm_id = spec.display_id();
        rec.replicate = r;
        rec.w = p.params[m] ? p.params[m]->w : 1.0;
        rec.seconds_per_iteration = o.seconds_per_iteration;
        rec.final_error = o.final_error;
        if (p.q_star[m]) {
          const double bound = pac_bound(*p.params[m], p.mdp.r_max(), p.mdp.num_states(),
                                         p.mdp.num_actions(), config.iterations, config.delta);
          rec.bound_violation = max_norm_distance(o.final_q, *p.q_star[m]) > bound;
        }
        result.records.push_back(std::move(rec));
      }
    }
  }
  return result;
}

EnsembleResult w_sweep(const ExperimentConfig& config,
                       const std::vector<std::optional<double>>& w_values, const RunOptions& options) {
  validate(config);
  if (w_values.empty()) throw ConfigInvalid("w_values", "must list at least one relaxation value");
  const Mdp mdp = ensemble_mdp(config, 0);
  const double ws = w_star(mdp);

  ExperimentConfig sweep = config;
  sweep.ensemble_size = 1;
  sweep.algorithms.clear();
  for (std::size_t m = 0; m < w_values.size(); ++m) {
    const auto& w = w_values[m];
    if (w && !(*w > 0.0 && *w <= ws * (1.0 + 1e-12))) {
      throw RelaxationOutOfRange(*w, ws, fmt::format("w_values[{}]", m));
    }
    AlgorithmSpec spec;
    spec.algorithm = Algorithm::gsql1;
    spec.w = w;
    spec.label = fmt::format("gsql1(w={})", w ? format_w(*w) : "auto");
    sweep.algorithms.push_back(std::move(spec));
  }
  return run_ensemble(sweep, options);
}

ScaleResult scalability_experiment(const std::vector<std::size_t>& sizes,
                                   const ExperimentConfig& config, const RunOptions& options) {
  validate(config);
  if (sizes.empty()) throw ConfigInvalid("sizes", "must list at least one state-space size");
  for (std::size_t m = 1; m < sizes.size(); ++m) {
    if (sizes[m] <= sizes[m - 1]) throw ConfigInvalid(fmt::format("sizes[{}]", m), "sizes must be strictly ascending");
  }

  ScaleResult result;
  for (std::size_t size : sizes) {
    ScaleRow row;
    row.num_states = size;
    row.iterations = size * config.iterations_per_state;

    ExperimentConfig cfg = config;
    cfg.experiment_id = fmt::format("{}-S{}", config.experiment_id, size);
    cfg.mdp.num_states = size;
    cfg.iterations = row.iterations;
    AlgorithmSpec sql;
    sql.algorithm = Algorithm::speedy_q;
    AlgorithmSpec gsql;
    gsql.algorithm = Algorithm::gsql1;
    cfg.algorithms = {sql, gsql};
    try {
      auto ensemble = run_ensemble(cfg, options);
      row.sql_error = ensemble.curves[0].errors.back();
      row.gsql_error = ensemble.curves[1].errors.back();
      row.error_difference = row.sql_error - row.gsql_error;
      double total = 0.0;
      for (const auto& rec : ensemble.records) total += rec.seconds_per_iteration;
      row.seconds_per_iteration = total / static_cast<double>(ensemble.records.size());
      for (auto& c : ensemble.curves) result.curves.push_back(std::move(c));
    } catch (const std::bad_alloc&) {
      row.failure = "resource-exhausted";
    }
    result.rows.push_back(std::move(row));
  }
  return result;
}

BoundCheckResult bound_check(const Mdp& mdp, const RelaxationParams& params, std::size_t n,
                             double delta, std::size_t replicates, std::uint64_t seed,
                             const RunOptions& options) {
  if (replicates < 100) {
    throw InvalidArgument(fmt::format("bound check needs at least 100 replicates, got {}", replicates));
  }
  BoundCheckResult result;
  result.bound = pac_bound(params, mdp.r_max(), mdp.num_states(), mdp.num_actions(), n, delta);

  const auto solved = value_iterate(mdp, params, QTable::zeros_like(mdp), 1e-12);
  if (!solved.converged) throw Error("bound check: reference solve did not converge");
  const auto mu = std::make_shared<const MuDistribution>(mdp, params);

  result.errors.assign(replicates, 0.0);
  parallel_for(replicates, options.jobs, [&](std::size_t r) {
    Learner learner(Algorithm::gsql1, mdp, params, QTable::zeros_like(mdp), {}, mu);
    SampleStream stream(seed, StreamId{0, static_cast<std::uint64_t>(Algorithm::gsql1), r});
    for (std::size_t k = 0; k < n; ++k) learner.sweep(stream);
    result.errors[r] = max_norm_distance(learner.state().q_current, solved.q);
  });

  std::size_t violations = 0;
  for (double e : result.errors) {
    if (e > result.bound) ++violations;
    result.max_observed_error = std::max(result.max_observed_error, e);
  }
  result.violation_rate = static_cast<double>(violations) / static_cast<double>(replicates);
  return result;
}

}  // namespace gsql
