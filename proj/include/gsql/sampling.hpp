#pragma once

#include <span>
#include <vector>

#include "gsql/mdp.hpp"
#include "gsql/rng.hpp"

namespace gsql {

/// Auxiliary next-state law of the relaxed operator:
///
///   mu(j|i,a) = gamma w P(j|i,a) / gamma1                 for j != i
///   mu(i|i,a) = (1 - w + gamma w P(i|i,a)) / gamma1
///
/// A single draw j' ~ mu gives an unbiased sample of H^w through
/// w R(i,a) + gamma1 max_b Q(j',b). Immutable; rows are stored [i][a][j] like
/// Mdp transitions, with matching cumulative rows for inverse-CDF sampling.
class MuDistribution {
 public:
  MuDistribution(const Mdp& mdp, const RelaxationParams& params);

  double w() const noexcept { return w_; }
  std::size_t num_states() const noexcept { return num_states_; }
  std::size_t num_actions() const noexcept { return num_actions_; }

  double prob(StateIndex i, ActionIndex a, StateIndex j) const noexcept {
    return probs_[(i * num_actions_ + a) * num_states_ + j];
  }
  std::span<const double> row(StateIndex i, ActionIndex a) const noexcept {
    return {probs_.data() + (i * num_actions_ + a) * num_states_, num_states_};
  }
  std::span<const double> cumulative_row(StateIndex i, ActionIndex a) const noexcept {
    return {cumulative_.data() + (i * num_actions_ + a) * num_states_, num_states_};
  }
  const std::vector<double>& probs() const noexcept { return probs_; }

 private:
  std::size_t num_states_;
  std::size_t num_actions_;
  double w_;
  std::vector<double> probs_;
  std::vector<double> cumulative_;
};

/// Throws RelaxationOutOfRange when params.w exceeds w*(mdp) (a negative
/// self-loop entry would result).
MuDistribution mu_distribution(const Mdp& mdp, const RelaxationParams& params);

/// Inverse-CDF draw from a probability row; consumes exactly one uniform.
StateIndex sample_next_state(std::span<const double> row, SampleStream& stream);

/// Same draw as sample_next_state, from a precomputed cumulative row.
StateIndex sample_from_cumulative(std::span<const double> cumulative, double u) noexcept;

inline StateIndex sample_transition(const Mdp& mdp, StateIndex i, ActionIndex a,
                                    SampleStream& stream) {
  return sample_from_cumulative(mdp.cumulative_row(i, a), stream.next_uniform());
}
inline StateIndex sample_mu(const MuDistribution& mu, StateIndex i, ActionIndex a,
                            SampleStream& stream) {
  return sample_from_cumulative(mu.cumulative_row(i, a), stream.next_uniform());
}

/// Turns a draw p_sample ~ P(.|i,a) into a draw from mu(.|i,a) for w <= 1,
/// using mu = ((1 - w) delta_i + gamma w P) / gamma1: with probability
/// (1 - w) / gamma1 the result is i, otherwise p_sample. Consumes one uniform.
/// Throws InvalidArgument for w > 1.
StateIndex sample_mu_via_mixture(const Mdp& mdp, const RelaxationParams& params, StateIndex i,
                                 ActionIndex a, StateIndex p_sample, SampleStream& stream);

// Sampled backups written in terms of state values V(j) = max_b Q(j,b). The
// learners and the scalar operators below share these so that w = 1 runs of
// every speedy-family learner perform bit-identical arithmetic.

inline double speedy_backup(double reward, double next_value, double gamma) noexcept {
  return reward + gamma * next_value;
}
inline double gsql1_backup(double reward, double next_value,
                           const RelaxationParams& params) noexcept {
  return params.w * reward + params.gamma1 * next_value;
}
inline double gsql2_backup(double reward, double next_value, double own_value,
                           const RelaxationParams& params) noexcept {
  return params.w * reward + params.gamma * params.w * next_value + (1.0 - params.w) * own_value;
}

/// H_n^w Q(i,a) = w R(i,a) + gamma1 max_b Q(j_mu, b) with j_mu ~ mu(.|i,a).
double empirical_gsql1(const Mdp& mdp, const RelaxationParams& params, const QTable& q,
                       StateIndex i, ActionIndex a, StateIndex j_mu);

/// w R(i,a) + gamma w max_b Q(j_p, b) + (1 - w) max_b Q(i, b) with j_p ~ P(.|i,a).
double empirical_gsql2(const Mdp& mdp, const RelaxationParams& params, const QTable& q,
                       StateIndex i, ActionIndex a, StateIndex j_p);

}  // namespace gsql
