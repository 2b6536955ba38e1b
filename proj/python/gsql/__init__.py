"""Generalized speedy Q-learning: tabular learners, exact solvers and experiments."""

from ._core import (
    Mdp,
    RelaxationParams,
    apply_bellman,
    apply_generalized_bellman,
    average_error,
    greedy_policy,
    mu_distribution,
    pac_bound,
    random_mdp,
    run_ensemble,
    run_learner,
    speedy_q_pac_bound,
    state_values,
    value_iterate,
    w_star,
)

__all__ = [
    "Mdp",
    "RelaxationParams",
    "apply_bellman",
    "apply_generalized_bellman",
    "average_error",
    "greedy_policy",
    "mu_distribution",
    "pac_bound",
    "random_mdp",
    "run_ensemble",
    "run_learner",
    "speedy_q_pac_bound",
    "state_values",
    "value_iterate",
    "w_star",
]
