#include "gsql/bellman.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "gsql/error.hpp"

namespace gsql {
namespace {

void require_shape(const Mdp& mdp, const QTable& q) {
  if (!q.matches(mdp)) {
    throw ShapeMismatch(fmt::format("Q-table is {}x{} but the MDP is {}x{}", q.num_states(),
                                    q.num_actions(), mdp.num_states(), mdp.num_actions()));
  }
}

double expected_next_value(const Mdp& mdp, std::span<const double> values, StateIndex i,
                           ActionIndex a) {
  const auto row = mdp.transition_row(i, a);
  double sum = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) sum += row[j] * values[j];
  return sum;
}

void fill_generalized(const Mdp& mdp, const std::vector<double>& values,
                      const RelaxationParams& params, QTable& out) {
  for (StateIndex i = 0; i < mdp.num_states(); ++i) {
    for (ActionIndex a = 0; a < mdp.num_actions(); ++a) {
      out(i, a) = generalized_bellman_entry(mdp, values, params, i, a);
    }
  }
}

}  // namespace

QTable apply_bellman(const Mdp& mdp, const QTable& q) {
  require_shape(mdp, q);
  const auto values = state_values(q);
  QTable out(mdp.num_states(), mdp.num_actions());
  for (StateIndex i = 0; i < mdp.num_states(); ++i) {
    for (ActionIndex a = 0; a < mdp.num_actions(); ++a) {
      out(i, a) = mdp.reward(i, a) + mdp.discount() * expected_next_value(mdp, values, i, a);
    }
  }
  return out;
}

double generalized_bellman_entry(const Mdp& mdp, std::span<const double> values,
                                 const RelaxationParams& params, StateIndex i, ActionIndex a) {
  const double backup = mdp.reward(i, a) + mdp.discount() * expected_next_value(mdp, values, i, a);
  return params.w * backup + (1.0 - params.w) * values[i];
}

QTable apply_generalized_bellman(const Mdp& mdp, const QTable& q, const RelaxationParams& params) {
  require_shape(mdp, q);
  if (!(params.w > 0.0 && params.w <= w_star(mdp))) throw RelaxationOutOfRange(params.w, w_star(mdp));
  QTable out(mdp.num_states(), mdp.num_actions());
  fill_generalized(mdp, state_values(q), params, out);
  return out;
}

SolveResult value_iterate(const Mdp& mdp, const RelaxationParams& params, QTable q0, double tol,
                          std::size_t max_iter) {
  require_shape(mdp, q0);
  if (!(tol > 0.0)) throw InvalidArgument(fmt::format("tolerance {} must be positive", tol));
  if (max_iter == 0) throw InvalidArgument("max_iter must be positive");
  if (!(params.w > 0.0 && params.w <= w_star(mdp))) throw RelaxationOutOfRange(params.w, w_star(mdp));

  SolveResult result;
  result.q = std::move(q0);
  QTable next(mdp.num_states(), mdp.num_actions());
  result.residual = std::numeric_limits<double>::infinity();
  while (result.iterations < max_iter) {
    fill_generalized(mdp, state_values(result.q), params, next);
    result.residual = max_norm_distance(next, result.q);
    std::swap(result.q, next);
    ++result.iterations;
    if (result.residual <= tol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

std::vector<double> state_values(const QTable& q) {
  std::vector<double> out(q.num_states());
  for (StateIndex i = 0; i < q.num_states(); ++i) out[i] = q.state_value(i);
  return out;
}

std::vector<ActionIndex> greedy_policy(const QTable& q) {
  std::vector<ActionIndex> out(q.num_states());
  for (StateIndex i = 0; i < q.num_states(); ++i) {
    const auto r = q.row(i);
    // max_element returns the first maximum, i.e. the lowest action index on ties.
    out[i] = static_cast<ActionIndex>(std::max_element(r.begin(), r.end()) - r.begin());
  }
  return out;
}

}  // namespace gsql
