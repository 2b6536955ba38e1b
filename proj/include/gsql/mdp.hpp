#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace gsql {

using StateIndex = std::size_t;
using ActionIndex = std::size_t;

/// Finite discounted MDP (S, A, P, R, gamma).
///
/// Transitions are stored row-major as P[i][a][j] so that the next-state
/// distribution of a pair (i, a) is one contiguous row. Every row also carries
/// a precomputed cumulative distribution used for inverse-CDF sampling.
/// Instances are immutable after construction.
class Mdp {
 public:
  /// Validates shapes, stochasticity (rows sum to 1 within 1e-12, entries
  /// non-negative), gamma in (0,1) and |R| <= r_max. When `r_max` is absent it
  /// is taken as max |R(i,a)|.
  Mdp(std::size_t num_states, std::size_t num_actions,
      std::vector<double> transitions, std::vector<double> rewards,
      double discount, std::optional<double> r_max = std::nullopt);

  std::size_t num_states() const noexcept { return num_states_; }
  std::size_t num_actions() const noexcept { return num_actions_; }
  std::size_t num_pairs() const noexcept { return num_states_ * num_actions_; }
  double discount() const noexcept { return discount_; }
  double r_max() const noexcept { return r_max_; }

  double reward(StateIndex i, ActionIndex a) const noexcept {
    return rewards_[i * num_actions_ + a];
  }
  double transition(StateIndex i, ActionIndex a, StateIndex j) const noexcept {
    return transitions_[(i * num_actions_ + a) * num_states_ + j];
  }
  double self_loop(StateIndex i, ActionIndex a) const noexcept {
    return transition(i, a, i);
  }

  std::span<const double> transition_row(StateIndex i, ActionIndex a) const noexcept {
    return {transitions_.data() + (i * num_actions_ + a) * num_states_, num_states_};
  }
  std::span<const double> cumulative_row(StateIndex i, ActionIndex a) const noexcept {
    return {cumulative_.data() + (i * num_actions_ + a) * num_states_, num_states_};
  }

  const std::vector<double>& transitions() const noexcept { return transitions_; }
  const std::vector<double>& rewards() const noexcept { return rewards_; }

  friend bool operator==(const Mdp& lhs, const Mdp& rhs) {
    return lhs.num_states_ == rhs.num_states_ && lhs.num_actions_ == rhs.num_actions_ &&
           lhs.discount_ == rhs.discount_ && lhs.r_max_ == rhs.r_max_ &&
           lhs.transitions_ == rhs.transitions_ && lhs.rewards_ == rhs.rewards_;
  }

 private:
  std::size_t num_states_;
  std::size_t num_actions_;
  std::vector<double> transitions_;
  std::vector<double> rewards_;
  std::vector<double> cumulative_;
  double discount_;
  double r_max_;
};

/// |S| x |A| action-value table, row-major by state.
class QTable {
 public:
  QTable() = default;
  QTable(std::size_t num_states, std::size_t num_actions, double fill = 0.0);
  /// Throws ShapeMismatch when values.size() != num_states * num_actions and
  /// InvalidArgument on non-finite entries.
  QTable(std::size_t num_states, std::size_t num_actions, std::vector<double> values);

  static QTable zeros_like(const Mdp& mdp) { return {mdp.num_states(), mdp.num_actions()}; }

  std::size_t num_states() const noexcept { return num_states_; }
  std::size_t num_actions() const noexcept { return num_actions_; }

  double& operator()(StateIndex i, ActionIndex a) noexcept {
    return values_[i * num_actions_ + a];
  }
  double operator()(StateIndex i, ActionIndex a) const noexcept {
    return values_[i * num_actions_ + a];
  }

  std::span<const double> row(StateIndex i) const noexcept {
    return {values_.data() + i * num_actions_, num_actions_};
  }
  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  /// max_a Q(i, a)
  double state_value(StateIndex i) const noexcept;
  double max_norm() const noexcept;

  bool matches(const Mdp& mdp) const noexcept {
    return num_states_ == mdp.num_states() && num_actions_ == mdp.num_actions();
  }

  friend bool operator==(const QTable&, const QTable&) = default;

 private:
  std::size_t num_states_ = 0;
  std::size_t num_actions_ = 0;
  std::vector<double> values_;
};

/// ||lhs - rhs||_inf; throws ShapeMismatch on differing shapes.
double max_norm_distance(const QTable& lhs, const QTable& rhs);

/// Successive-relaxation parameters for one MDP.
///
/// gamma1 = 1 - w + gamma w is the contraction factor of the generalized
/// operator, beta = 1 / (1 - gamma), beta1 = beta / w, v_max = beta * r_max.
struct RelaxationParams {
  double w;
  double gamma;
  double gamma1;
  double beta;
  double beta1;
  double v_max;
  double w_star;

  /// Throws RelaxationOutOfRange unless 0 < w <= w_star(mdp). A w that exceeds
  /// w* only by floating-point rounding (relative 1e-12) is clamped to w*.
  static RelaxationParams make(const Mdp& mdp, double w);
  static RelaxationParams at_w_star(const Mdp& mdp);
};

/// min over (i,a) of 1 / (1 - gamma P(i|i,a)); always >= 1.
double w_star(const Mdp& mdp);

/// Parameters for the random MDP generator.
///
/// The self-loop mass of each pair is min_self_loop + u (1 - min_self_loop)
/// self_loop_spread with u ~ U[0,1); the remaining mass is spread over the
/// other states with a flat Dirichlet draw. self_loop_spread = 0 pins every
/// self-loop to exactly min_self_loop. Rewards are U[0, r_max].
struct MdpRecipe {
  std::size_t num_states = 10;
  std::size_t num_actions = 5;
  double min_self_loop = 0.0;
  double self_loop_spread = 1.0;
  double r_max = 1.0;
  double discount = 0.6;
};

Mdp random_mdp(const MdpRecipe& recipe, std::uint64_t seed);
Mdp random_mdp(std::size_t num_states, std::size_t num_actions, double min_self_loop,
               double r_max, double discount, std::uint64_t seed);

}  // namespace gsql
