#include "gsql/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "gsql/error.hpp"
#include "gsql/rng.hpp"

namespace gsql {

RelaxationOutOfRange::RelaxationOutOfRange(double w, double w_star, const std::string& context)
    : Error(fmt::format("{}{}relaxation parameter w = {} outside (0, w*] with w* = {}", context,
                        context.empty() ? "" : ": ", w, w_star)),
      w_(w),
      w_star_(w_star) {}

ConfigInvalid::ConfigInvalid(std::string field, const std::string& message)
    : Error(fmt::format("{}: {}", field, message)), field_(std::move(field)) {}

IoError::IoError(std::string path, const std::string& message)
    : Error(fmt::format("{}: {}", path, message)), path_(std::move(path)) {}

namespace {

constexpr double kRowSumTolerance = 1e-12;

}  // namespace

Mdp::Mdp(std::size_t num_states, std::size_t num_actions, std::vector<double> transitions,
         std::vector<double> rewards, double discount, std::optional<double> r_max)
    : num_states_(num_states),
      num_actions_(num_actions),
      transitions_(std::move(transitions)),
      rewards_(std::move(rewards)),
      discount_(discount),
      r_max_(0.0) {
  if (num_states_ == 0 || num_actions_ == 0) {
    throw InvalidArgument("MDP needs at least one state and one action");
  }
  if (!(discount_ > 0.0 && discount_ < 1.0)) {
    throw InvalidArgument(fmt::format("discount {} outside (0,1)", discount_));
  }
  if (rewards_.size() != num_pairs()) {
    throw ShapeMismatch(fmt::format("rewards: expected {} entries, got {}", num_pairs(),
                                    rewards_.size()));
  }
  if (transitions_.size() != num_pairs() * num_states_) {
    throw ShapeMismatch(fmt::format("transitions: expected {} entries, got {}",
                                    num_pairs() * num_states_, transitions_.size()));
  }

  double largest = 0.0;
  for (double r : rewards_) {
    if (!std::isfinite(r)) throw InvalidArgument("rewards must be finite");
    largest = std::max(largest, std::abs(r));
  }
  if (r_max) {
    if (!(*r_max >= largest)) {
      throw InvalidArgument(
          fmt::format("declared r_max {} is below max |R| = {}", *r_max, largest));
    }
    r_max_ = *r_max;
  } else {
    r_max_ = largest;
  }

  cumulative_.resize(transitions_.size());
  for (std::size_t pair = 0; pair < num_pairs(); ++pair) {
    const std::size_t base = pair * num_states_;
    double running = 0.0;
    for (std::size_t j = 0; j < num_states_; ++j) {
      const double p = transitions_[base + j];
      if (!std::isfinite(p) || p < 0.0) {
        throw InvalidArgument(fmt::format("transition ({}, {}, {}) = {} is not a probability",
                                          pair / num_actions_, pair % num_actions_, j, p));
      }
      running += p;
      cumulative_[base + j] = running;
    }
    if (std::abs(running - 1.0) > kRowSumTolerance) {
      throw InvalidArgument(fmt::format("transition row ({}, {}) sums to {}",
                                        pair / num_actions_, pair % num_actions_, running));
    }
  }
}

QTable::QTable(std::size_t num_states, std::size_t num_actions, double fill)
    : num_states_(num_states), num_actions_(num_actions), values_(num_states * num_actions, fill) {}

QTable::QTable(std::size_t num_states, std::size_t num_actions, std::vector<double> values)
    : num_states_(num_states), num_actions_(num_actions), values_(std::move(values)) {
  if (values_.size() != num_states_ * num_actions_) {
    throw ShapeMismatch(fmt::format("Q-table: expected {}x{} entries, got {}", num_states_,
                                    num_actions_, values_.size()));
  }
  if (!std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); })) {
    throw InvalidArgument("Q-table entries must be finite");
  }
}

double QTable::state_value(StateIndex i) const noexcept {
  const auto r = row(i);
  return *std::max_element(r.begin(), r.end());
}

double QTable::max_norm() const noexcept {
  double out = 0.0;
  for (double v : values_) out = std::max(out, std::abs(v));
  return out;
}

double max_norm_distance(const QTable& lhs, const QTable& rhs) {
  if (lhs.num_states() != rhs.num_states() || lhs.num_actions() != rhs.num_actions()) {
    throw ShapeMismatch("Q-tables differ in shape");
  }
  const auto a = lhs.values();
  const auto b = rhs.values();
  double out = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) out = std::max(out, std::abs(a[k] - b[k]));
  return out;
}

double w_star(const Mdp& mdp) {
  double out = std::numeric_limits<double>::infinity();
  for (StateIndex i = 0; i < mdp.num_states(); ++i) {
    for (ActionIndex a = 0; a < mdp.num_actions(); ++a) {
      out = std::min(out, 1.0 / (1.0 - mdp.discount() * mdp.self_loop(i, a)));
    }
  }
  return out;
}

RelaxationParams RelaxationParams::make(const Mdp& mdp, double w) {
  const double ws = gsql::w_star(mdp);
  if (!std::isfinite(w) || w <= 0.0) throw RelaxationOutOfRange(w, ws);
  if (w > ws) {
    if (w > ws * (1.0 + 1e-12)) throw RelaxationOutOfRange(w, ws);
    w = ws;
  }
  const double gamma = mdp.discount();
  const double beta = 1.0 / (1.0 - gamma);
  RelaxationParams p{};
  p.w = w;
  p.gamma = gamma;
  p.gamma1 = std::max(0.0, (1.0 - w) + gamma * w);
  p.beta = beta;
  p.beta1 = beta / w;
  p.v_max = beta * mdp.r_max();
  p.w_star = ws;
  return p;
}

RelaxationParams RelaxationParams::at_w_star(const Mdp& mdp) { return make(mdp, gsql::w_star(mdp)); }

Mdp random_mdp(const MdpRecipe& recipe, std::uint64_t seed) {
  if (recipe.num_states == 0 || recipe.num_actions == 0) {
    throw InvalidArgument("random_mdp: need at least one state and one action");
  }
  if (!(recipe.min_self_loop >= 0.0 && recipe.min_self_loop < 1.0)) {
    throw InvalidArgument(fmt::format("random_mdp: min_self_loop {} outside [0,1)",
                                      recipe.min_self_loop));
  }
  if (!(recipe.self_loop_spread >= 0.0 && recipe.self_loop_spread <= 1.0)) {
    throw InvalidArgument(fmt::format("random_mdp: self_loop_spread {} outside [0,1]",
                                      recipe.self_loop_spread));
  }
  if (!(recipe.r_max > 0.0) || !std::isfinite(recipe.r_max)) {
    throw InvalidArgument(fmt::format("random_mdp: r_max {} must be positive", recipe.r_max));
  }
  if (!(recipe.discount > 0.0 && recipe.discount < 1.0)) {
    throw InvalidArgument(fmt::format("random_mdp: discount {} outside (0,1)", recipe.discount));
  }

  const std::size_t ns = recipe.num_states;
  const std::size_t na = recipe.num_actions;
  SampleStream stream(seed, StreamId{0, kMdpGenerationStream, 0});

  std::vector<double> transitions(ns * na * ns, 0.0);
  std::vector<double> weights(ns, 0.0);
  for (StateIndex i = 0; i < ns; ++i) {
    for (ActionIndex a = 0; a < na; ++a) {
      double* row = transitions.data() + (i * na + a) * ns;
      const double u = stream.next_uniform();
      if (ns == 1) {
        row[0] = 1.0;
        continue;
      }
      const double self =
          recipe.min_self_loop + u * (1.0 - recipe.min_self_loop) * recipe.self_loop_spread;
      double total = 0.0;
      for (StateIndex j = 0; j < ns; ++j) {
        // -log(1 - u) is Exp(1); normalized exponentials are Dirichlet(1, ..., 1).
        weights[j] = j == i ? 0.0 : -std::log1p(-stream.next_uniform());
        total += weights[j];
      }
      const double rest = 1.0 - self;
      for (StateIndex j = 0; j < ns; ++j) {
        if (j == i) continue;
        row[j] = total > 0.0 ? rest * weights[j] / total : rest / static_cast<double>(ns - 1);
      }
      row[i] = self;
    }
  }

  std::vector<double> rewards(ns * na);
  for (double& r : rewards) r = recipe.r_max * stream.next_uniform();

  return Mdp(ns, na, std::move(transitions), std::move(rewards), recipe.discount, recipe.r_max);
}

Mdp random_mdp(std::size_t num_states, std::size_t num_actions, double min_self_loop,
               double r_max, double discount, std::uint64_t seed) {
  return random_mdp(MdpRecipe{num_states, num_actions, min_self_loop, 1.0, r_max, discount}, seed);
}

}  // namespace gsql
