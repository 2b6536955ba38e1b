#pragma once

#include <cstddef>

#include "gsql/mdp.hpp"

namespace gsql {

/// Finite-time bound on ||Q_N - Q*||_inf holding with probability 1 - delta
/// for the synchronous GSQL-w iterate:
///
///   2 gamma1 beta^2 R_max / (w N) + (2 beta^2 R_max / w) sqrt(2 ln(2|S||A|/delta) / N)
///
/// Throws InvalidArgument unless n >= 1, delta in (0,1), r_max > 0 and the
/// state/action counts are positive.
double pac_bound(const RelaxationParams& params, double r_max, std::size_t num_states,
                 std::size_t num_actions, std::size_t n, double delta);

/// The Speedy Q-learning bound
///   2 gamma beta^2 R_max / N + 2 beta^2 R_max sqrt(2 ln(2|S||A|/delta) / N).
double speedy_q_pac_bound(double discount, double r_max, std::size_t num_states,
                          std::size_t num_actions, std::size_t n, double delta);

}  // namespace gsql
