#include "gsql/bounds.hpp"

#include <cmath>

#include <fmt/format.h>

#include "gsql/error.hpp"

namespace gsql {
namespace {

void check_bound_inputs(double r_max, std::size_t num_states, std::size_t num_actions,
                        std::size_t n, double delta) {
  if (n == 0) throw InvalidArgument("bound needs N >= 1");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw InvalidArgument(fmt::format("delta {} outside (0,1)", delta));
  }
  if (!(r_max > 0.0) || !std::isfinite(r_max)) {
    throw InvalidArgument(fmt::format("r_max {} must be positive", r_max));
  }
  if (num_states == 0 || num_actions == 0) throw InvalidArgument("empty state or action set");
}

double confidence_root(std::size_t num_states, std::size_t num_actions, std::size_t n,
                       double delta) {
  const double pairs = static_cast<double>(num_states) * static_cast<double>(num_actions);
  return std::sqrt(2.0 * std::log(2.0 * pairs / delta) / static_cast<double>(n));
}

}  // namespace

double pac_bound(const RelaxationParams& params, double r_max, std::size_t num_states,
                 std::size_t num_actions, std::size_t n, double delta) {
  check_bound_inputs(r_max, num_states, num_actions, n, delta);
  if (!(params.w > 0.0)) throw RelaxationOutOfRange(params.w, params.w_star);
  const double beta_sq = params.beta * params.beta;
  const double big_n = static_cast<double>(n);
  const double bias = 2.0 * params.gamma1 * beta_sq * r_max / (params.w * big_n);
  const double noise =
      (2.0 * beta_sq * r_max / params.w) * confidence_root(num_states, num_actions, n, delta);
  return bias + noise;
}

double speedy_q_pac_bound(double discount, double r_max, std::size_t num_states,
                          std::size_t num_actions, std::size_t n, double delta) {
  check_bound_inputs(r_max, num_states, num_actions, n, delta);
  if (!(discount > 0.0 && discount < 1.0)) {
    throw InvalidArgument(fmt::format("discount {} outside (0,1)", discount));
  }
  const double beta = 1.0 / (1.0 - discount);
  const double beta_sq = beta * beta;
  const double big_n = static_cast<double>(n);
  return 2.0 * discount * beta_sq * r_max / big_n +
         2.0 * beta_sq * r_max * confidence_root(num_states, num_actions, n, delta);
}

}  // namespace gsql
