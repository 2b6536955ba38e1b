#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "gsql/mdp.hpp"
#include "gsql/rng.hpp"
#include "gsql/sampling.hpp"

namespace gsql {

enum class Algorithm { q_learning, speedy_q, double_q, gsql1, gsql2 };

/// "ql", "sql", "dql", "gsql1", "gsql2"
std::string_view algorithm_name(Algorithm algorithm) noexcept;
/// Inverse of algorithm_name; throws InvalidArgument on unknown names.
Algorithm parse_algorithm(std::string_view name);

constexpr bool uses_relaxation(Algorithm algorithm) noexcept {
  return algorithm == Algorithm::gsql1 || algorithm == Algorithm::gsql2;
}
constexpr bool is_speedy_family(Algorithm algorithm) noexcept {
  return algorithm == Algorithm::speedy_q || uses_relaxation(algorithm);
}

/// alpha_n = 1 / (n + 1)^p with p in (0.5, 1]; p = 1 is the default schedule.
class StepSizeRule {
 public:
  StepSizeRule() = default;
  explicit StepSizeRule(double exponent);

  double exponent() const noexcept { return exponent_; }
  double operator()(std::uint64_t n) const noexcept;

 private:
  double exponent_ = 1.0;
};

double step_size(std::uint64_t n, const StepSizeRule& rule = {});

/// Per-run learner state.
///
/// q_current is Q_n. Speedy-family learners also keep q_previous = Q_{n-1},
/// equal to Q_0 before the first sweep. Double Q-learning keeps its second
/// table in q_b and ignores q_previous; each of its table entries takes the
/// step size of its own update count (updates_a / updates_b).
struct AgentState {
  Algorithm algorithm = Algorithm::speedy_q;
  QTable q_current;
  QTable q_previous;
  QTable q_b;
  std::uint64_t iteration = 0;
  StepSizeRule step_size_rule;
  std::vector<std::uint64_t> updates_a;
  std::vector<std::uint64_t> updates_b;

  // Sweep scratch space, reused across iterations.
  QTable next_buffer;
  QTable next_buffer_b;
  std::vector<double> values_current;
  std::vector<double> values_previous;
};

AgentState make_agent_state(Algorithm algorithm, const QTable& q0, StepSizeRule rule = {});

/// The learner's current estimate of Q: the per-entry mean of both tables for
/// Double Q-learning, q_current otherwise.
QTable estimate(const AgentState& state);

// One synchronous sweep each: every (i,a) pair, in state-major order, draws
// its next state from the stream and is updated from the pre-sweep tables.
// Speedy-family sweeps consume one uniform per pair (the same draw feeds both
// the Q_n and Q_{n-1} backups); Q-learning consumes one; Double Q-learning
// consumes two (table coin, then next state).

/// Q_{n+1} = Q_n + a_n (H_n^w Q_{n-1} - Q_n) + (1 - a_n)(H_n^w Q_n - H_n^w Q_{n-1})
/// with j' ~ mu(.|i,a) drawn from `mu`.
void gsql1_sweep(AgentState& state, const Mdp& mdp, const RelaxationParams& params,
                 const MuDistribution& mu, SampleStream& stream);
/// Same update with the P-sampled relaxed backup.
void gsql2_sweep(AgentState& state, const Mdp& mdp, const RelaxationParams& params,
                 SampleStream& stream);
void sql_sweep(AgentState& state, const Mdp& mdp, SampleStream& stream);
/// Watkins: Q <- Q + a_n (R + gamma max_b Q(j,b) - Q)
void ql_sweep(AgentState& state, const Mdp& mdp, SampleStream& stream);
/// A fair coin per pair picks the table to update; the selected table moves
/// toward R + gamma Q_other(j, argmax_b Q_selected(j,b)).
void dql_sweep(AgentState& state, const Mdp& mdp, SampleStream& stream);

/// Binds an algorithm to an MDP so runs can be driven uniformly.
///
/// The MDP must outlive the learner. For GSQL1 the auxiliary distribution is
/// built on construction unless a shared one is supplied.
class Learner {
 public:
  Learner(Algorithm algorithm, const Mdp& mdp, std::optional<RelaxationParams> params,
          const QTable& q0, StepSizeRule rule = {},
          std::shared_ptr<const MuDistribution> mu = nullptr);

  void sweep(SampleStream& stream);

  Algorithm algorithm() const noexcept { return state_.algorithm; }
  const AgentState& state() const noexcept { return state_; }
  std::uint64_t iteration() const noexcept { return state_.iteration; }
  QTable estimate() const { return gsql::estimate(state_); }
  /// max_a of the current estimate, per state.
  std::vector<double> estimate_values() const;

 private:
  const Mdp* mdp_;
  std::optional<RelaxationParams> params_;
  std::shared_ptr<const MuDistribution> mu_;
  AgentState state_;
};

}  // namespace gsql
