#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "gsql/agents.hpp"
#include "gsql/bellman.hpp"
#include "gsql/bounds.hpp"
#include "gsql/config.hpp"
#include "gsql/error.hpp"
#include "gsql/harness.hpp"
#include "gsql/io.hpp"
#include "gsql/sampling.hpp"

namespace py = pybind11;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

gsql::QTable to_qtable(const Array& q) {
  if (q.ndim() != 2) throw gsql::ShapeMismatch("Q must be a 2-D array (states x actions)");
  const auto ns = static_cast<std::size_t>(q.shape(0));
  const auto na = static_cast<std::size_t>(q.shape(1));
  return gsql::QTable(ns, na, std::vector<double>(q.data(), q.data() + ns * na));
}

Array to_array(const gsql::QTable& q) {
  Array out({q.num_states(), q.num_actions()});
  std::copy(q.values().begin(), q.values().end(), out.mutable_data());
  return out;
}

Array to_array3(const std::vector<double>& flat, std::size_t ns, std::size_t na) {
  Array out({ns, na, ns});
  std::copy(flat.begin(), flat.end(), out.mutable_data());
  return out;
}

gsql::Mdp make_mdp(const Array& transitions, const Array& rewards, double discount,
                   std::optional<double> r_max) {
  if (transitions.ndim() != 3 || rewards.ndim() != 2) {
    throw gsql::ShapeMismatch("transitions must be (S, A, S) and rewards (S, A)");
  }
  const auto ns = static_cast<std::size_t>(transitions.shape(0));
  const auto na = static_cast<std::size_t>(transitions.shape(1));
  std::vector<double> p(transitions.data(), transitions.data() + transitions.size());
  std::vector<double> r(rewards.data(), rewards.data() + rewards.size());
  return gsql::Mdp(ns, na, std::move(p), std::move(r), discount, r_max);
}

py::dict curve_to_dict(const gsql::ErrorCurve& c) {
  py::dict d;
  d["experiment_id"] = c.experiment_id;
  d["algorithm"] = c.algorithm_id;
  d["w"] = c.w_label;
  d["mdp_count"] = c.mdp_count;
  d["iterations"] = c.iterations;
  d["errors"] = c.errors;
  d["state_mean_errors"] = c.state_mean_errors;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Generalized speedy Q-learning core";

  py::register_exception<gsql::RelaxationOutOfRange>(m, "RelaxationOutOfRange", PyExc_ValueError);
  py::register_exception<gsql::ConfigInvalid>(m, "ConfigInvalid", PyExc_ValueError);
  py::register_exception<gsql::InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<gsql::ShapeMismatch>(m, "ShapeMismatch", PyExc_ValueError);
  py::register_exception<gsql::ParseError>(m, "ParseError", PyExc_ValueError);

  py::class_<gsql::Mdp>(m, "Mdp")
      .def(py::init(&make_mdp), py::arg("transitions"), py::arg("rewards"), py::arg("discount"),
           py::arg("r_max") = py::none())
      .def_property_readonly("num_states", &gsql::Mdp::num_states)
      .def_property_readonly("num_actions", &gsql::Mdp::num_actions)
      .def_property_readonly("discount", &gsql::Mdp::discount)
      .def_property_readonly("r_max", &gsql::Mdp::r_max)
      .def_property_readonly("transitions",
                             [](const gsql::Mdp& mdp) {
                               return to_array3(mdp.transitions(), mdp.num_states(), mdp.num_actions());
                             })
      .def_property_readonly("rewards",
                             [](const gsql::Mdp& mdp) {
                               Array out({mdp.num_states(), mdp.num_actions()});
                               std::copy(mdp.rewards().begin(), mdp.rewards().end(), out.mutable_data());
                               return out;
                             })
      .def("to_json", [](const gsql::Mdp& mdp) { return gsql::mdp_to_json(mdp).dump(); })
      .def_static("from_json",
                  [](const std::string& text) {
                    try {
                      return gsql::mdp_from_json(nlohmann::json::parse(text));
                    } catch (const nlohmann::json::parse_error& e) {
                      throw gsql::ParseError(e.what());
                    }
                  })
      .def("__eq__", [](const gsql::Mdp& a, const gsql::Mdp& b) { return a == b; });

  py::class_<gsql::RelaxationParams>(m, "RelaxationParams")
      .def_static("make", &gsql::RelaxationParams::make, py::arg("mdp"), py::arg("w"))
      .def_static("at_w_star", &gsql::RelaxationParams::at_w_star, py::arg("mdp"))
      .def_readonly("w", &gsql::RelaxationParams::w)
      .def_readonly("gamma", &gsql::RelaxationParams::gamma)
      .def_readonly("gamma1", &gsql::RelaxationParams::gamma1)
      .def_readonly("beta", &gsql::RelaxationParams::beta)
      .def_readonly("beta1", &gsql::RelaxationParams::beta1)
      .def_readonly("v_max", &gsql::RelaxationParams::v_max)
      .def_readonly("w_star", &gsql::RelaxationParams::w_star);

  m.def(
      "random_mdp",
      [](std::size_t num_states, std::size_t num_actions, double min_self_loop, double r_max,
         double discount, std::uint64_t seed, double self_loop_spread) {
        return gsql::random_mdp(
            gsql::MdpRecipe{num_states, num_actions, min_self_loop, self_loop_spread, r_max, discount},
            seed);
      },
      py::arg("num_states"), py::arg("num_actions"), py::arg("min_self_loop") = 0.0,
      py::arg("r_max") = 1.0, py::arg("discount") = 0.6, py::arg("seed") = 0,
      py::arg("self_loop_spread") = 1.0);

  m.def("w_star", &gsql::w_star, py::arg("mdp"));

  m.def(
      "apply_bellman",
      [](const gsql::Mdp& mdp, const Array& q) { return to_array(gsql::apply_bellman(mdp, to_qtable(q))); },
      py::arg("mdp"), py::arg("q"));
  m.def(
      "apply_generalized_bellman",
      [](const gsql::Mdp& mdp, const Array& q, double w) {
        return to_array(gsql::apply_generalized_bellman(mdp, to_qtable(q), gsql::RelaxationParams::make(mdp, w)));
      },
      py::arg("mdp"), py::arg("q"), py::arg("w"));

  m.def(
      "value_iterate",
      [](const gsql::Mdp& mdp, std::optional<double> w, double tol, std::size_t max_iter) {
        const auto params = gsql::RelaxationParams::make(mdp, w.value_or(gsql::w_star(mdp)));
        const auto r = gsql::value_iterate(mdp, params, gsql::QTable::zeros_like(mdp), tol, max_iter);
        py::dict d;
        d["q"] = to_array(r.q);
        d["iterations"] = r.iterations;
        d["residual"] = r.residual;
        d["converged"] = r.converged;
        d["w"] = params.w;
        return d;
      },
      py::arg("mdp"), py::arg("w") = 1.0, py::arg("tol") = gsql::kDefaultSolverTolerance,
      py::arg("max_iter") = gsql::kDefaultSolverMaxIterations,
      "Fixed point of the relaxed operator; w=None selects w*.");

  m.def("state_values", [](const Array& q) { return gsql::state_values(to_qtable(q)); }, py::arg("q"));
  m.def("greedy_policy", [](const Array& q) { return gsql::greedy_policy(to_qtable(q)); }, py::arg("q"));

  m.def("pac_bound", &gsql::pac_bound, py::arg("params"), py::arg("r_max"), py::arg("num_states"),
        py::arg("num_actions"), py::arg("n"), py::arg("delta"));
  m.def("speedy_q_pac_bound", &gsql::speedy_q_pac_bound, py::arg("discount"), py::arg("r_max"),
        py::arg("num_states"), py::arg("num_actions"), py::arg("n"), py::arg("delta"));

  m.def(
      "mu_distribution",
      [](const gsql::Mdp& mdp, double w) {
        const gsql::MuDistribution mu(mdp, gsql::RelaxationParams::make(mdp, w));
        return to_array3(mu.probs(), mdp.num_states(), mdp.num_actions());
      },
      py::arg("mdp"), py::arg("w"));

  m.def(
      "run_learner",
      [](const std::string& algorithm, const gsql::Mdp& mdp, std::size_t iterations,
         std::optional<double> w, std::uint64_t seed, std::uint64_t stream, double step_exponent) {
        const auto alg = gsql::parse_algorithm(algorithm);
        std::optional<gsql::RelaxationParams> params;
        if (gsql::uses_relaxation(alg)) params = gsql::RelaxationParams::make(mdp, w.value_or(gsql::w_star(mdp)));
        gsql::Learner learner(alg, mdp, params, gsql::QTable::zeros_like(mdp), gsql::StepSizeRule(step_exponent));
        gsql::SampleStream s(seed, gsql::StreamId{0, stream, 0});
        {
          py::gil_scoped_release release;
          for (std::size_t n = 0; n < iterations; ++n) learner.sweep(s);
        }
        return to_array(learner.estimate());
      },
      py::arg("algorithm"), py::arg("mdp"), py::arg("iterations"), py::arg("w") = py::none(),
      py::arg("seed") = 0, py::arg("stream") = 0, py::arg("step_exponent") = 1.0,
      "Runs N synchronous sweeps from Q0 = 0 and returns the final estimate. Equal (seed, stream) "
      "pairs give paired sample sequences across algorithms.");

  m.def(
      "average_error",
      [](const std::vector<Array>& q_tables, const std::vector<std::vector<double>>& v_stars) {
        std::vector<gsql::QTable> qs;
        qs.reserve(q_tables.size());
        for (const auto& q : q_tables) qs.push_back(to_qtable(q));
        return gsql::average_error(qs, v_stars);
      },
      py::arg("q_tables"), py::arg("v_stars"));

  m.def(
      "run_ensemble",
      [](const std::string& config_json, std::size_t jobs) {
        nlohmann::json doc;
        try {
          doc = nlohmann::json::parse(config_json);
        } catch (const nlohmann::json::parse_error& e) {
          throw gsql::ParseError(e.what());
        }
        const auto config = gsql::parse_config(doc);
        gsql::EnsembleResult result;
        {
          py::gil_scoped_release release;
          result = gsql::run_ensemble(config, {jobs});
        }
        py::list curves;
        for (const auto& c : result.curves) curves.append(curve_to_dict(c));
        return curves;
      },
      py::arg("config_json"), py::arg("jobs") = 1,
      "Runs an experiment configuration (JSON text) and returns its error curves.");
}
