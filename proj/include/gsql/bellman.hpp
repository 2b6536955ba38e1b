#pragma once

#include <cstddef>
#include <vector>

#include "gsql/mdp.hpp"

namespace gsql {

/// (HQ)(i,a) = R(i,a) + gamma sum_j P(j|i,a) max_b Q(j,b), evaluated from the
/// model. Throws ShapeMismatch if q does not match mdp.
QTable apply_bellman(const Mdp& mdp, const QTable& q);

/// Successive-relaxation operator
///   (H^w Q)(i,a) = w (HQ)(i,a) + (1 - w) max_c Q(i,c).
/// At w = 1 the result is bit-identical to apply_bellman.
QTable apply_generalized_bellman(const Mdp& mdp, const QTable& q, const RelaxationParams& params);

/// Single entry of H^w Q given precomputed state values V(j) = max_b Q(j,b).
double generalized_bellman_entry(const Mdp& mdp, std::span<const double> state_values,
                                 const RelaxationParams& params, StateIndex i, ActionIndex a);

struct SolveResult {
  QTable q;
  std::size_t iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

inline constexpr double kDefaultSolverTolerance = 1e-8;
inline constexpr std::size_t kDefaultSolverMaxIterations = 1'000'000;

/// Fixed-point iteration Q <- H^w Q until ||Q_{k+1} - Q_k||_inf <= tol or
/// max_iter sweeps. Non-convergence is reported through `converged`, not by
/// throwing.
SolveResult value_iterate(const Mdp& mdp, const RelaxationParams& params, QTable q0,
                          double tol = kDefaultSolverTolerance,
                          std::size_t max_iter = kDefaultSolverMaxIterations);

/// V(i) = max_a Q(i,a)
std::vector<double> state_values(const QTable& q);
/// pi(i) = argmax_a Q(i,a), ties to the lowest action index.
std::vector<ActionIndex> greedy_policy(const QTable& q);

}  // namespace gsql
