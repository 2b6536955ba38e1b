#include "gsql/agents.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include <fmt/format.h>

#include "gsql/error.hpp"

namespace gsql {
namespace {

void fill_values(const QTable& q, std::vector<double>& out) {
  out.resize(q.num_states());
  for (StateIndex i = 0; i < q.num_states(); ++i) out[i] = q.state_value(i);
}

void require(const AgentState& state, const Mdp& mdp, Algorithm expected) {
  if (state.algorithm != expected) {
    throw InvalidArgument(fmt::format("agent state belongs to {}, not {}",
                                      algorithm_name(state.algorithm), algorithm_name(expected)));
  }
  if (!state.q_current.matches(mdp)) throw ShapeMismatch("agent Q-table does not match the MDP");
}

void ensure_buffer(QTable& buffer, const QTable& shape) {
  if (buffer.num_states() != shape.num_states() || buffer.num_actions() != shape.num_actions()) {
    buffer = QTable(shape.num_states(), shape.num_actions());
  }
}

/// Shared speedy update. `backup(i, a, j, values)` evaluates the sampled
/// operator for next state j against the given state-value vector.
template <class Draw, class Backup>
void speedy_sweep(AgentState& s, const Mdp& mdp, Draw&& draw, Backup&& backup) {
  const double alpha = s.step_size_rule(s.iteration);
  fill_values(s.q_current, s.values_current);
  fill_values(s.q_previous, s.values_previous);
  ensure_buffer(s.next_buffer, s.q_current);

  for (StateIndex i = 0; i < mdp.num_states(); ++i) {
    for (ActionIndex a = 0; a < mdp.num_actions(); ++a) {
      const StateIndex j = draw(i, a);
      const double h_prev = backup(i, a, j, s.values_previous);
      const double h_cur = backup(i, a, j, s.values_current);
      const double q = s.q_current(i, a);
      s.next_buffer(i, a) = q + alpha * (h_prev - q) + (1.0 - alpha) * (h_cur - h_prev);
    }
  }
  // Q_{n-1} <- Q_n, Q_n <- Q_{n+1}; the old Q_{n-1} storage becomes scratch.
  std::swap(s.q_previous, s.q_current);
  std::swap(s.q_current, s.next_buffer);
  ++s.iteration;
}

void check_relaxation(const Mdp& mdp, const RelaxationParams& params) {
  if (params.gamma != mdp.discount()) {
    throw InvalidArgument("relaxation parameters were built for a different discount");
  }
  const double ws = w_star(mdp);
  if (!(params.w > 0.0 && params.w <= ws)) throw RelaxationOutOfRange(params.w, ws);
}

}  // namespace

std::string_view algorithm_name(Algorithm algorithm) noexcept {
  switch (algorithm) {
    case Algorithm::q_learning: return "ql";
    case Algorithm::speedy_q: return "sql";
    case Algorithm::double_q: return "dql";
    case Algorithm::gsql1: return "gsql1";
    case Algorithm::gsql2: return "gsql2";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  for (auto a : {Algorithm::q_learning, Algorithm::speedy_q, Algorithm::double_q,
                 Algorithm::gsql1, Algorithm::gsql2}) {
    if (algorithm_name(a) == name) return a;
  }
  throw InvalidArgument(fmt::format("unknown algorithm '{}' (expected ql, sql, dql, gsql1, gsql2)",
                                    name));
}

StepSizeRule::StepSizeRule(double exponent) : exponent_(exponent) {
  if (!(exponent > 0.5 && exponent <= 1.0)) {
    throw InvalidArgument(fmt::format("step-size exponent {} outside (0.5, 1]", exponent));
  }
}

double StepSizeRule::operator()(std::uint64_t n) const noexcept {
  const double base = static_cast<double>(n) + 1.0;
  return exponent_ == 1.0 ? 1.0 / base : 1.0 / std::pow(base, exponent_);
}

double step_size(std::uint64_t n, const StepSizeRule& rule) { return rule(n); }

AgentState make_agent_state(Algorithm algorithm, const QTable& q0, StepSizeRule rule) {
  AgentState s;
  s.algorithm = algorithm;
  s.q_current = q0;
  s.q_previous = q0;
  if (algorithm == Algorithm::double_q) {
    s.q_b = q0;
    s.updates_a.assign(q0.values().size(), 0);
    s.updates_b.assign(q0.values().size(), 0);
  }
  s.step_size_rule = rule;
  return s;
}

QTable estimate(const AgentState& state) {
  if (state.algorithm != Algorithm::double_q) return state.q_current;
  QTable out = state.q_current;
  const auto b = state.q_b.values();
  auto v = out.values();
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = 0.5 * (v[k] + b[k]);
  return out;
}

void gsql1_sweep(AgentState& state, const Mdp& mdp, const RelaxationParams& params,
                 const MuDistribution& mu, SampleStream& stream) {
  require(state, mdp, Algorithm::gsql1);
  check_relaxation(mdp, params);
  if (mu.w() != params.w || mu.num_states() != mdp.num_states() ||
      mu.num_actions() != mdp.num_actions()) {
    throw InvalidArgument("auxiliary distribution does not match the MDP and relaxation");
  }
  speedy_sweep(
      state, mdp, [&](StateIndex i, ActionIndex a) { return sample_mu(mu, i, a, stream); },
      [&](StateIndex i, ActionIndex a, StateIndex j, const std::vector<double>& v) {
        return gsql1_backup(mdp.reward(i, a), v[j], params);
      });
}

void gsql2_sweep(AgentState& state, const Mdp& mdp, const RelaxationParams& params,
                 SampleStream& stream) {
  require(state, mdp, Algorithm::gsql2);
  check_relaxation(mdp, params);
  speedy_sweep(
      state, mdp, [&](StateIndex i, ActionIndex a) { return sample_transition(mdp, i, a, stream); },
      [&](StateIndex i, ActionIndex a, StateIndex j, const std::vector<double>& v) {
        return gsql2_backup(mdp.reward(i, a), v[j], v[i], params);
      });
}

void sql_sweep(AgentState& state, const Mdp& mdp, SampleStream& stream) {
  require(state, mdp, Algorithm::speedy_q);
  const double gamma = mdp.discount();
  speedy_sweep(
      state, mdp, [&](StateIndex i, ActionIndex a) { return sample_transition(mdp, i, a, stream); },
      [&](StateIndex i, ActionIndex a, StateIndex j, const std::vector<double>& v) {
        return speedy_backup(mdp.reward(i, a), v[j], gamma);
      });
}

void ql_sweep(AgentState& state, const Mdp& mdp, SampleStream& stream) {
  require(state, mdp, Algorithm::q_learning);
  auto& s = state;
  const double alpha = s.step_size_rule(s.iteration);
  const double gamma = mdp.discount();
  fill_values(s.q_current, s.values_current);
  ensure_buffer(s.next_buffer, s.q_current);
  for (StateIndex i = 0; i < mdp.num_states(); ++i) {
    for (ActionIndex a = 0; a < mdp.num_actions(); ++a) {
      const StateIndex j = sample_transition(mdp, i, a, stream);
      const double q = s.q_current(i, a);
      s.next_buffer(i, a) = q + alpha * (speedy_backup(mdp.reward(i, a), s.values_current[j], gamma) - q);
    }
  }
  std::swap(s.q_current, s.next_buffer);
  ++s.iteration;
}

void dql_sweep(AgentState& state, const Mdp& mdp, SampleStream& stream) {
  require(state, mdp, Algorithm::double_q);
  auto& s = state;
  if (!s.q_b.matches(mdp) || s.updates_a.size() != mdp.num_pairs() || s.updates_b.size() != mdp.num_pairs()) {
    throw ShapeMismatch("second Q-table does not match the MDP");
  }
  const double gamma = mdp.discount();
  const QTable& table_a = s.q_current;
  const QTable& table_b = s.q_b;
  s.next_buffer = table_a;
  s.next_buffer_b = table_b;

  for (StateIndex i = 0; i < mdp.num_states(); ++i) {
    for (ActionIndex a = 0; a < mdp.num_actions(); ++a) {
      const bool update_a = stream.next_uniform() < 0.5;
      const StateIndex j = sample_transition(mdp, i, a, stream);
      const QTable& selected = update_a ? table_a : table_b;
      const QTable& other = update_a ? table_b : table_a;
      const auto row = selected.row(j);
      ActionIndex best = 0;
      for (ActionIndex b = 1; b < row.size(); ++b) {
        if (row[b] > row[best]) best = b;
      }
      const double target = speedy_backup(mdp.reward(i, a), other(j, best), gamma);
      QTable& out = update_a ? s.next_buffer : s.next_buffer_b;
      std::uint64_t& count = (update_a ? s.updates_a : s.updates_b)[i * mdp.num_actions() + a];
      const double alpha = s.step_size_rule(count++);
      out(i, a) = selected(i, a) + alpha * (target - selected(i, a));
    }
  }
  std::swap(s.q_current, s.next_buffer);
  std::swap(s.q_b, s.next_buffer_b);
  ++s.iteration;
}

Learner::Learner(Algorithm algorithm, const Mdp& mdp, std::optional<RelaxationParams> params,
                 const QTable& q0, StepSizeRule rule, std::shared_ptr<const MuDistribution> mu)
    : mdp_(&mdp), params_(params), mu_(std::move(mu)), state_(make_agent_state(algorithm, q0, rule)) {
  if (!q0.matches(mdp)) throw ShapeMismatch("initial Q-table does not match the MDP");
  if (uses_relaxation(algorithm)) {
    if (!params_) throw InvalidArgument(fmt::format("{} needs relaxation parameters",
                                                    algorithm_name(algorithm)));
    check_relaxation(mdp, *params_);
    if (algorithm == Algorithm::gsql1 && !mu_) {
      mu_ = std::make_shared<const MuDistribution>(mdp, *params_);
    }
  }
}

void Learner::sweep(SampleStream& stream) {
  switch (state_.algorithm) {
    case Algorithm::q_learning: ql_sweep(state_, *mdp_, stream); break;
    case Algorithm::speedy_q: sql_sweep(state_, *mdp_, stream); break;
    case Algorithm::double_q: dql_sweep(state_, *mdp_, stream); break;
    case Algorithm::gsql1: gsql1_sweep(state_, *mdp_, *params_, *mu_, stream); break;
    case Algorithm::gsql2: gsql2_sweep(state_, *mdp_, *params_, stream); break;
  }
}

std::vector<double> Learner::estimate_values() const {
  std::vector<double> out(mdp_->num_states());
  if (state_.algorithm != Algorithm::double_q) {
    fill_values(state_.q_current, out);
    return out;
  }
  const auto& a = state_.q_current;
  const auto& b = state_.q_b;
  for (StateIndex i = 0; i < mdp_->num_states(); ++i) {
    double best = 0.5 * (a(i, 0) + b(i, 0));
    for (ActionIndex k = 1; k < mdp_->num_actions(); ++k) best = std::max(best, 0.5 * (a(i, k) + b(i, k)));
    out[i] = best;
  }
  return out;
}

}  // namespace gsql
