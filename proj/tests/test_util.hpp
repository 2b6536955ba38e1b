#pragma once

#include <cstdint>
#include <vector>

#include "gsql/mdp.hpp"
#include "gsql/rng.hpp"

namespace gsql::test {

// One state, one action, R = r, discount gamma. V* = r / (1 - gamma).
inline Mdp single_state_mdp(double r = 1.0, double gamma = 0.5) {
  return Mdp(1, 1, {1.0}, {r}, gamma);
}

inline Mdp small_random_mdp(std::uint64_t seed, std::size_t ns = 5, std::size_t na = 3,
                            double discount = 0.7, double min_self_loop = 0.1) {
  return random_mdp(MdpRecipe{ns, na, min_self_loop, 1.0, 1.0, discount}, seed);
}

inline QTable random_q(std::size_t ns, std::size_t na, SampleStream& stream, double scale = 3.0) {
  QTable q(ns, na);
  for (double& v : q.values()) v = scale * (2.0 * stream.next_uniform() - 1.0);
  return q;
}

}  // namespace gsql::test
