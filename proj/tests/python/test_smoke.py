import json

import numpy as np
import pytest

import gsql


def single_state():
    return gsql.Mdp(np.ones((1, 1, 1)), np.ones((1, 1)), 0.5)


def test_mdp_round_trip_and_arrays():
    m = gsql.random_mdp(6, 3, min_self_loop=0.1, discount=0.7, seed=4)
    assert m.transitions.shape == (6, 3, 6)
    assert m.rewards.shape == (6, 3)
    np.testing.assert_allclose(m.transitions.sum(axis=2), 1.0, atol=1e-12)
    assert gsql.Mdp.from_json(m.to_json()) == m


def test_w_star_and_params():
    p = np.full((2, 1, 2), 0.1)
    p[0, 0, 0] = p[1, 0, 1] = 0.9
    m = gsql.Mdp(p, np.zeros((2, 1)), 0.9)
    assert gsql.w_star(m) == pytest.approx(1 / 0.19)
    params = gsql.RelaxationParams.make(m, 2.0)
    assert params.gamma1 == pytest.approx(1 - 2 + 0.9 * 2)
    with pytest.raises(ValueError):
        gsql.RelaxationParams.make(m, 6.0)


def test_bellman_and_solver():
    m = single_state()
    np.testing.assert_array_equal(gsql.apply_bellman(m, np.array([[2.0]])), [[2.0]])
    np.testing.assert_array_equal(gsql.apply_generalized_bellman(m, np.array([[2.0]]), 1.5), [[2.0]])
    result = gsql.value_iterate(m, w=None, tol=1e-12)
    assert result["converged"]
    assert result["w"] == 2.0
    np.testing.assert_allclose(result["q"], [[2.0]], atol=1e-10)
    assert gsql.state_values(np.array([[1.0, 3.0], [2.0, 2.0]])) == [3.0, 2.0]
    assert gsql.greedy_policy(np.array([[1.0, 3.0], [2.0, 2.0]])) == [1, 0]


def test_mu_distribution_example():
    m = gsql.Mdp(np.full((2, 1, 2), 0.5), np.zeros((2, 1)), 0.5)
    mu = gsql.mu_distribution(m, 1.2)
    np.testing.assert_allclose(mu[0, 0], [0.25, 0.75], atol=1e-15)


def test_learners_converge_and_collapse():
    m = gsql.random_mdp(5, 2, min_self_loop=0.2, discount=0.7, seed=1)
    v_star = gsql.state_values(gsql.value_iterate(m)["q"])
    for alg in ["ql", "sql", "dql", "gsql1", "gsql2"]:
        q = gsql.run_learner(alg, m, 3000, seed=2)
        err = gsql.average_error([q], [v_star])
        assert err < 0.5, alg
    sql = gsql.run_learner("sql", m, 500, seed=3)
    for alg in ["gsql1", "gsql2"]:
        np.testing.assert_array_equal(gsql.run_learner(alg, m, 500, w=1.0, seed=3), sql)


def test_bounds():
    m = single_state()
    p1 = gsql.RelaxationParams.make(m, 1.0)
    assert gsql.pac_bound(p1, 1.0, 1, 1, 100, 0.1) == gsql.speedy_q_pac_bound(0.5, 1.0, 1, 1, 100, 0.1)


def test_run_ensemble():
    cfg = {
        "experiment_id": "py",
        "ensemble_size": 2,
        "mdp": {"num_states": 4, "num_actions": 2, "discount": 0.6, "min_self_loop": 0.1},
        "algorithms": [{"id": "sql"}, {"id": "gsql1", "w": "auto"}],
        "iterations": 100,
        "error_record_stride": 25,
    }
    curves = gsql.run_ensemble(json.dumps(cfg))
    assert [c["algorithm"] for c in curves] == ["sql", "gsql1"]
    assert curves[0]["iterations"] == [25, 50, 75, 100]
    assert curves == gsql.run_ensemble(json.dumps(cfg))
    cfg["bogus"] = 1
    with pytest.raises(ValueError):
        gsql.run_ensemble(json.dumps(cfg))
