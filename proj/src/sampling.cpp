#include "gsql/sampling.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "gsql/error.hpp"

namespace gsql {
namespace {

// Entries this far below zero are rounding noise at w = w*.
constexpr double kNegativeSlack = 1e-12;

StateIndex last_supported(std::span<const double> cumulative) noexcept {
  for (std::size_t j = cumulative.size(); j-- > 1;) {
    if (cumulative[j] > cumulative[j - 1]) return j;
  }
  return 0;
}

}  // namespace

MuDistribution::MuDistribution(const Mdp& mdp, const RelaxationParams& params)
    : num_states_(mdp.num_states()),
      num_actions_(mdp.num_actions()),
      w_(params.w),
      probs_(mdp.transitions().size()),
      cumulative_(mdp.transitions().size()) {
  const double ws = w_star(mdp);
  if (!(params.w > 0.0 && params.w <= ws)) throw RelaxationOutOfRange(params.w, ws);
  if (params.gamma != mdp.discount()) {
    throw InvalidArgument("relaxation parameters were built for a different discount");
  }

  const double gamma1 = params.gamma1;
  // off-diagonal scale gamma w / gamma1, diagonal offset (1 - w) / gamma1; at
  // w = 1 these are exactly 1 and 0, so mu reproduces P bit-for-bit.
  const double scale = gamma1 > 0.0 ? params.gamma * params.w / gamma1 : 0.0;
  const double offset = gamma1 > 0.0 ? (1.0 - params.w) / gamma1 : 0.0;

  for (StateIndex i = 0; i < num_states_; ++i) {
    for (ActionIndex a = 0; a < num_actions_; ++a) {
      const std::size_t base = (i * num_actions_ + a) * num_states_;
      const auto p = mdp.transition_row(i, a);
      if (gamma1 <= 0.0) {
        // gamma1 = 0 forces w* = 1/(1-gamma), i.e. every P(i|i,a) = 1.
        std::copy(p.begin(), p.end(), probs_.begin() + static_cast<std::ptrdiff_t>(base));
      } else {
        for (StateIndex j = 0; j < num_states_; ++j) probs_[base + j] = scale * p[j];
        double diag = offset + scale * p[i];
        if (diag < 0.0) {
          if (diag < -kNegativeSlack) throw RelaxationOutOfRange(params.w, ws);
          diag = 0.0;
        }
        probs_[base + i] = diag;
      }
      double running = 0.0;
      for (StateIndex j = 0; j < num_states_; ++j) {
        running += probs_[base + j];
        cumulative_[base + j] = running;
      }
    }
  }
}

MuDistribution mu_distribution(const Mdp& mdp, const RelaxationParams& params) {
  return MuDistribution(mdp, params);
}

StateIndex sample_from_cumulative(std::span<const double> cumulative, double u) noexcept {
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  if (it == cumulative.end()) return last_supported(cumulative);
  return static_cast<StateIndex>(it - cumulative.begin());
}

StateIndex sample_next_state(std::span<const double> row, SampleStream& stream) {
  const double u = stream.next_uniform();
  double running = 0.0;
  StateIndex last = 0;
  for (std::size_t j = 0; j < row.size(); ++j) {
    running += row[j];
    if (u < running) return j;
    if (row[j] > 0.0) last = j;
  }
  return last;
}

StateIndex sample_mu_via_mixture(const Mdp& mdp, const RelaxationParams& params, StateIndex i,
                                 ActionIndex a, StateIndex p_sample, SampleStream& stream) {
  if (!(params.w > 0.0 && params.w <= 1.0)) {
    throw InvalidArgument(
        fmt::format("mixture sampling needs 0 < w <= 1, got w = {}; sample mu directly",
                    params.w));
  }
  if (i >= mdp.num_states() || a >= mdp.num_actions() || p_sample >= mdp.num_states()) {
    throw InvalidArgument("mixture sampling: state or action index out of range");
  }
  const double stay = (1.0 - params.w) / params.gamma1;
  return stream.next_uniform() < stay ? i : p_sample;
}

double empirical_gsql1(const Mdp& mdp, const RelaxationParams& params, const QTable& q,
                       StateIndex i, ActionIndex a, StateIndex j_mu) {
  return gsql1_backup(mdp.reward(i, a), q.state_value(j_mu), params);
}

double empirical_gsql2(const Mdp& mdp, const RelaxationParams& params, const QTable& q,
                       StateIndex i, ActionIndex a, StateIndex j_p) {
  return gsql2_backup(mdp.reward(i, a), q.state_value(j_p), q.state_value(i), params);
}

}  // namespace gsql
