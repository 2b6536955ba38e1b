#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "gsql/agents.hpp"
#include "gsql/bellman.hpp"
#include "gsql/error.hpp"
#include "gsql/sampling.hpp"
#include "test_util.hpp"

namespace gsql {
namespace {

using test::random_q;
using test::single_state_mdp;
using test::small_random_mdp;

std::optional<RelaxationParams> params_for(Algorithm alg, const Mdp& m, double w) {
  if (!uses_relaxation(alg)) return std::nullopt;
  return RelaxationParams::make(m, w);
}

QTable run(Algorithm alg, const Mdp& m, std::optional<RelaxationParams> p, std::size_t n,
           SampleStream stream, StepSizeRule rule = {}) {
  Learner learner(alg, m, p, QTable::zeros_like(m), rule);
  for (std::size_t k = 0; k < n; ++k) learner.sweep(stream);
  return learner.estimate();
}

TEST(step_size, harmonic_default) {
  EXPECT_EQ(step_size(0), 1.0);
  EXPECT_DOUBLE_EQ(step_size(9), 0.1);
}

TEST(step_size, polynomial_exponent_range) {
  EXPECT_THROW(StepSizeRule(0.5), InvalidArgument);
  EXPECT_THROW(StepSizeRule(1.01), InvalidArgument);
  EXPECT_NO_THROW(StepSizeRule(0.51));
  EXPECT_NEAR(step_size(3, StepSizeRule(0.75)), std::pow(4.0, -0.75), 1e-15);
}

TEST(algorithm, names_round_trip) {
  for (auto alg : {Algorithm::q_learning, Algorithm::speedy_q, Algorithm::double_q, Algorithm::gsql1,
                   Algorithm::gsql2}) {
    EXPECT_EQ(parse_algorithm(algorithm_name(alg)), alg);
  }
  EXPECT_THROW(parse_algorithm("zap"), InvalidArgument);
}

TEST(agent_state, previous_equals_current_at_start) {
  const Mdp m = small_random_mdp(1);
  SampleStream s(1, {0, 0, 0});
  const QTable q0 = random_q(m.num_states(), m.num_actions(), s);
  const auto st = make_agent_state(Algorithm::gsql1, q0);
  EXPECT_TRUE(st.q_previous == st.q_current);
  EXPECT_EQ(st.iteration, 0u);
}

TEST(learner, relaxation_learners_need_params) {
  const Mdp m = small_random_mdp(1);
  EXPECT_THROW(Learner(Algorithm::gsql1, m, std::nullopt, QTable::zeros_like(m)), InvalidArgument);
  EXPECT_THROW(Learner(Algorithm::speedy_q, m, std::nullopt, QTable(2, 2)), ShapeMismatch);
}

TEST(sweeps, first_iterate_is_sampled_operator_of_q0) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Mdp m = small_random_mdp(seed);
    SampleStream init(seed, {0, 9, 0});
    const QTable q0 = random_q(m.num_states(), m.num_actions(), init);
    const auto p = RelaxationParams::at_w_star(m);
    const auto p1 = RelaxationParams::make(m, 1.0);
    const MuDistribution mu(m, p);

    for (auto alg : {Algorithm::gsql1, Algorithm::gsql2, Algorithm::speedy_q}) {
      auto st = make_agent_state(alg, q0);
      SampleStream s(seed, {0, 1, 0});
      SampleStream replay(seed, {0, 1, 0});
      if (alg == Algorithm::gsql1) gsql1_sweep(st, m, p, mu, s);
      if (alg == Algorithm::gsql2) gsql2_sweep(st, m, p, s);
      if (alg == Algorithm::speedy_q) sql_sweep(st, m, s);
      for (StateIndex i = 0; i < m.num_states(); ++i) {
        for (ActionIndex a = 0; a < m.num_actions(); ++a) {
          double expected = 0.0;
          if (alg == Algorithm::gsql1) expected = empirical_gsql1(m, p, q0, i, a, sample_mu(mu, i, a, replay));
          if (alg == Algorithm::gsql2) {
            expected = empirical_gsql2(m, p, q0, i, a, sample_transition(m, i, a, replay));
          }
          if (alg == Algorithm::speedy_q) {
            expected = empirical_gsql1(m, p1, q0, i, a, sample_transition(m, i, a, replay));
          }
          EXPECT_NEAR(st.q_current(i, a), expected, 1e-12);
        }
      }
      EXPECT_TRUE(st.q_previous == q0);
      EXPECT_EQ(st.iteration, 1u);
    }
  }
}

TEST(sweeps, w_one_collapse_is_bit_identical) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const Mdp m = small_random_mdp(seed, 6, 3);
    const auto p = RelaxationParams::make(m, 1.0);
    const MuDistribution mu(m, p);
    auto sql = make_agent_state(Algorithm::speedy_q, QTable::zeros_like(m));
    auto g1 = make_agent_state(Algorithm::gsql1, QTable::zeros_like(m));
    auto g2 = make_agent_state(Algorithm::gsql2, QTable::zeros_like(m));
    SampleStream s0(seed, {seed, 0, 0}), s1(seed, {seed, 0, 0}), s2(seed, {seed, 0, 0});
    for (int n = 0; n < 1000; ++n) {
      sql_sweep(sql, m, s0);
      gsql1_sweep(g1, m, p, mu, s1);
      gsql2_sweep(g2, m, p, s2);
      ASSERT_TRUE(sql.q_current == g1.q_current) << "n=" << n;
      ASSERT_TRUE(sql.q_current == g2.q_current) << "n=" << n;
    }
  }
}

TEST(sweeps, single_state_convergence) {
  const Mdp m = single_state_mdp();
  const SampleStream s(3, {0, 0, 0});
  EXPECT_NEAR(run(Algorithm::gsql1, m, RelaxationParams::at_w_star(m), 10000, s)(0, 0), 2.0, 0.01);
  EXPECT_NEAR(run(Algorithm::gsql2, m, RelaxationParams::make(m, 2.0), 10000, s)(0, 0), 2.0, 0.01);
  EXPECT_NEAR(run(Algorithm::speedy_q, m, std::nullopt, 10000, s)(0, 0), 2.0, 0.01);
  EXPECT_NEAR(run(Algorithm::double_q, m, std::nullopt, 10000, s)(0, 0), 2.0, 0.05);
  EXPECT_NEAR(run(Algorithm::q_learning, m, std::nullopt, 10000, s)(0, 0), 2.0, 0.05);
}

TEST(sweeps, single_state_w_star_is_two) {
  const Mdp m = single_state_mdp();
  EXPECT_DOUBLE_EQ(w_star(m), 2.0);
  const auto p = RelaxationParams::at_w_star(m);
  EXPECT_EQ(p.gamma1, 0.0);
}

TEST(sweeps, q_learning_first_step_is_value_iteration_on_deterministic_mdp) {
  const Mdp m(3, 2, {0, 1, 0, 0, 0, 1, 1, 0, 0, 0, 1, 0, 0, 0, 1, 1, 0, 0}, {1, 0, 0.5, 0.2, 0, 1}, 0.8);
  SampleStream init(1, {0, 0, 0});
  const QTable q0 = random_q(3, 2, init);
  auto st = make_agent_state(Algorithm::q_learning, q0);
  SampleStream s(2, {0, 0, 0});
  ql_sweep(st, m, s);
  EXPECT_TRUE(max_norm_distance(st.q_current, apply_bellman(m, q0)) < 1e-14);
}

TEST(sweeps, double_q_tables_stay_equal_on_deterministic_single_action_mdp) {
  const Mdp m(3, 1, {0, 1, 0, 0, 0, 1, 1, 0, 0}, {1.0, 0.0, 0.5}, 0.7);
  const QTable qstar = value_iterate(m, RelaxationParams::make(m, 1.0), QTable::zeros_like(m), 1e-13).q;
  auto st = make_agent_state(Algorithm::double_q, qstar);
  SampleStream s(5, {0, 0, 0});
  for (int n = 0; n < 200; ++n) {
    dql_sweep(st, m, s);
    ASSERT_LT(max_norm_distance(st.q_current, st.q_b), 1e-12);
  }
  EXPECT_LT(max_norm_distance(estimate(st), qstar), 1e-12);
}

TEST(sweeps, double_q_estimate_is_mean_of_tables) {
  const Mdp m = small_random_mdp(8);
  auto st = make_agent_state(Algorithm::double_q, QTable::zeros_like(m));
  SampleStream s(5, {0, 0, 0});
  for (int n = 0; n < 20; ++n) dql_sweep(st, m, s);
  const QTable e = estimate(st);
  for (StateIndex i = 0; i < m.num_states(); ++i) {
    for (ActionIndex a = 0; a < m.num_actions(); ++a) {
      EXPECT_DOUBLE_EQ(e(i, a), 0.5 * (st.q_current(i, a) + st.q_b(i, a)));
    }
  }
  EXPECT_FALSE(st.q_current == st.q_b);
}

TEST(sweeps, gsql1_stays_within_v_max) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Mdp m = small_random_mdp(seed, 5, 3, 0.9, 0.5);
    for (double w : {1.0, w_star(m)}) {
      const auto p = RelaxationParams::make(m, w);
      Learner learner(Algorithm::gsql1, m, p, QTable::zeros_like(m));
      SampleStream s(seed, {seed, 3, 0});
      for (int n = 0; n < 2000; ++n) {
        learner.sweep(s);
        ASSERT_LE(learner.state().q_current.max_norm(), p.v_max + 1e-9);
      }
    }
  }
}

TEST(sweeps, gsql_converges_on_five_state_mdps) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const Mdp m = small_random_mdp(seed, 5, 2, 0.7, 0.2);
    const auto p = RelaxationParams::at_w_star(m);
    const QTable qstar = value_iterate(m, p, QTable::zeros_like(m), 1e-10).q;
    for (auto alg : {Algorithm::gsql1, Algorithm::gsql2}) {
      double total = 0.0;
      for (std::uint64_t r = 0; r < 5; ++r) {
        total += max_norm_distance(run(alg, m, p, 20000, SampleStream(seed, {seed, 1, r})), qstar);
      }
      EXPECT_LT(total / 5.0, 0.05 * p.v_max) << algorithm_name(alg) << " seed " << seed;
    }
  }
}

TEST(sweeps, deterministic_given_stream) {
  const Mdp m = small_random_mdp(4);
  for (auto alg : {Algorithm::q_learning, Algorithm::speedy_q, Algorithm::double_q, Algorithm::gsql1,
                   Algorithm::gsql2}) {
    const auto p = params_for(alg, m, w_star(m));
    const SampleStream s(7, {1, 2, 3});
    EXPECT_TRUE(run(alg, m, p, 100, s) == run(alg, m, p, 100, s));
  }
}

}  // namespace
}  // namespace gsql
