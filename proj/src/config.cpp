#include "gsql/config.hpp"

#include <cmath>
#include <initializer_list>
#include <string_view>

#include <fmt/format.h>

#include "gsql/error.hpp"
#include "gsql/io.hpp"

namespace gsql {
namespace {

using nlohmann::json;

std::string join(std::string_view prefix, std::string_view key) {
  return prefix.empty() ? std::string(key) : fmt::format("{}.{}", prefix, key);
}

void reject_unknown(const json& obj, std::string_view prefix,
                    std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw ConfigInvalid(prefix.empty() ? "<root>" : std::string(prefix), "must be an object");
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (auto a : allowed) known = known || a == key;
    if (!known) throw ConfigInvalid(join(prefix, key), "unknown key");
  }
}

std::uint64_t as_uint(const json& v, const std::string& field) {
  if (!v.is_number_unsigned()) throw ConfigInvalid(field, "must be a non-negative integer");
  return v.get<std::uint64_t>();
}

double as_double(const json& v, const std::string& field) {
  if (!v.is_number()) throw ConfigInvalid(field, "must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigInvalid(field, "must be finite");
  return d;
}

std::string as_string(const json& v, const std::string& field) {
  if (!v.is_string()) throw ConfigInvalid(field, "must be a string");
  return v.get<std::string>();
}

bool as_bool(const json& v, const std::string& field) {
  if (!v.is_boolean()) throw ConfigInvalid(field, "must be true or false");
  return v.get<bool>();
}

std::optional<double> as_w(const json& v, const std::string& field) {
  if (v.is_string()) {
    if (v.get<std::string>() == "auto") return std::nullopt;
    throw ConfigInvalid(field, "must be a number or \"auto\"");
  }
  return as_double(v, field);
}

json w_to_json(const std::optional<double>& w) { return w ? json(*w) : json("auto"); }

MdpRecipe parse_recipe(const json& doc) {
  reject_unknown(doc, "mdp",
                 {"num_states", "num_actions", "min_self_loop", "self_loop_spread", "r_max", "discount"});
  MdpRecipe r;
  if (!doc.contains("num_states")) throw ConfigInvalid("mdp.num_states", "required");
  if (!doc.contains("num_actions")) throw ConfigInvalid("mdp.num_actions", "required");
  if (!doc.contains("discount")) throw ConfigInvalid("mdp.discount", "required");
  r.num_states = as_uint(doc["num_states"], "mdp.num_states");
  r.num_actions = as_uint(doc["num_actions"], "mdp.num_actions");
  r.discount = as_double(doc["discount"], "mdp.discount");
  if (doc.contains("min_self_loop")) r.min_self_loop = as_double(doc["min_self_loop"], "mdp.min_self_loop");
  if (doc.contains("self_loop_spread")) {
    r.self_loop_spread = as_double(doc["self_loop_spread"], "mdp.self_loop_spread");
  }
  if (doc.contains("r_max")) r.r_max = as_double(doc["r_max"], "mdp.r_max");
  return r;
}

AlgorithmSpec parse_algorithm_spec(const json& doc, const std::string& field) {
  reject_unknown(doc, field, {"id", "w", "step_exponent", "label"});
  if (!doc.contains("id")) throw ConfigInvalid(field + ".id", "required");
  AlgorithmSpec spec;
  try {
    spec.algorithm = parse_algorithm(as_string(doc["id"], field + ".id"));
  } catch (const InvalidArgument& e) {
    throw ConfigInvalid(field + ".id", e.what());
  }
  if (doc.contains("w")) {
    spec.w = as_w(doc["w"], field + ".w");
    if (!uses_relaxation(spec.algorithm) && spec.w && *spec.w != 1.0) {
      throw ConfigInvalid(field + ".w", "only gsql1 and gsql2 take a relaxation parameter");
    }
  }
  if (!uses_relaxation(spec.algorithm)) spec.w = 1.0;
  if (doc.contains("step_exponent")) {
    spec.step_exponent = as_double(doc["step_exponent"], field + ".step_exponent");
  }
  if (doc.contains("label")) spec.label = as_string(doc["label"], field + ".label");
  return spec;
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
  reject_unknown(doc, "",
                 {"experiment_id", "ensemble_size", "mdp", "algorithms", "iterations", "replicates",
                  "master_seed", "error_record_stride", "paired_streams", "w_values", "sizes",
                  "iterations_per_state", "delta", "solver_tolerance", "solver_max_iterations",
                  "outputs"});
  ExperimentConfig c;
  if (!doc.contains("experiment_id")) throw ConfigInvalid("experiment_id", "required");
  if (!doc.contains("mdp")) throw ConfigInvalid("mdp", "required");
  c.experiment_id = as_string(doc["experiment_id"], "experiment_id");
  c.mdp = parse_recipe(doc["mdp"]);

  if (doc.contains("ensemble_size")) c.ensemble_size = as_uint(doc["ensemble_size"], "ensemble_size");
  if (doc.contains("iterations")) c.iterations = as_uint(doc["iterations"], "iterations");
  if (doc.contains("replicates")) c.replicates = as_uint(doc["replicates"], "replicates");
  if (doc.contains("master_seed")) c.master_seed = as_uint(doc["master_seed"], "master_seed");
  if (doc.contains("error_record_stride")) {
    c.error_record_stride = as_uint(doc["error_record_stride"], "error_record_stride");
  }
  if (doc.contains("paired_streams")) c.paired_streams = as_bool(doc["paired_streams"], "paired_streams");
  if (doc.contains("iterations_per_state")) {
    c.iterations_per_state = as_uint(doc["iterations_per_state"], "iterations_per_state");
  }
  if (doc.contains("delta")) c.delta = as_double(doc["delta"], "delta");
  if (doc.contains("solver_tolerance")) c.solver_tolerance = as_double(doc["solver_tolerance"], "solver_tolerance");
  if (doc.contains("solver_max_iterations")) {
    c.solver_max_iterations = as_uint(doc["solver_max_iterations"], "solver_max_iterations");
  }

  if (doc.contains("algorithms")) {
    const auto& algs = doc["algorithms"];
    if (!algs.is_array()) throw ConfigInvalid("algorithms", "must be an array");
    for (std::size_t m = 0; m < algs.size(); ++m) {
      c.algorithms.push_back(parse_algorithm_spec(algs[m], fmt::format("algorithms[{}]", m)));
    }
  }
  if (doc.contains("w_values")) {
    const auto& ws = doc["w_values"];
    if (!ws.is_array()) throw ConfigInvalid("w_values", "must be an array");
    for (std::size_t m = 0; m < ws.size(); ++m) c.w_values.push_back(as_w(ws[m], fmt::format("w_values[{}]", m)));
  }
  if (doc.contains("sizes")) {
    const auto& sizes = doc["sizes"];
    if (!sizes.is_array()) throw ConfigInvalid("sizes", "must be an array");
    for (std::size_t m = 0; m < sizes.size(); ++m) c.sizes.push_back(as_uint(sizes[m], fmt::format("sizes[{}]", m)));
  }
  if (doc.contains("outputs")) {
    const auto& out = doc["outputs"];
    reject_unknown(out, "outputs", {"csv", "svg", "manifest"});
    if (out.contains("csv")) c.outputs.csv = as_string(out["csv"], "outputs.csv");
    if (out.contains("svg")) c.outputs.svg = as_string(out["svg"], "outputs.svg");
    if (out.contains("manifest")) c.outputs.manifest = as_string(out["manifest"], "outputs.manifest");
    for (const auto* name : {&c.outputs.csv, &c.outputs.svg, &c.outputs.manifest}) {
      if (name->empty() || name->find('/') != std::string::npos || name->find('\\') != std::string::npos) {
        throw ConfigInvalid("outputs", "file names must be non-empty and contain no path separators");
      }
    }
  }
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_json_file(path));
}

json config_to_json(const ExperimentConfig& c) {
  json algs = json::array();
  for (const auto& spec : c.algorithms) {
    algs.push_back({{"id", std::string(algorithm_name(spec.algorithm))},
                    {"w", uses_relaxation(spec.algorithm) ? w_to_json(spec.w) : json(1.0)},
                    {"step_exponent", spec.step_exponent},
                    {"label", spec.label}});
  }
  json ws = json::array();
  for (const auto& w : c.w_values) ws.push_back(w_to_json(w));
  return json{{"experiment_id", c.experiment_id},
              {"ensemble_size", c.ensemble_size},
              {"mdp",
               {{"num_states", c.mdp.num_states},
                {"num_actions", c.mdp.num_actions},
                {"min_self_loop", c.mdp.min_self_loop},
                {"self_loop_spread", c.mdp.self_loop_spread},
                {"r_max", c.mdp.r_max},
                {"discount", c.mdp.discount}}},
              {"algorithms", algs},
              {"iterations", c.iterations},
              {"replicates", c.replicates},
              {"master_seed", c.master_seed},
              {"error_record_stride", c.error_record_stride},
              {"paired_streams", c.paired_streams},
              {"w_values", ws},
              {"sizes", c.sizes},
              {"iterations_per_state", c.iterations_per_state},
              {"delta", c.delta},
              {"solver_tolerance", c.solver_tolerance},
              {"solver_max_iterations", c.solver_max_iterations},
              {"outputs", {{"csv", c.outputs.csv}, {"svg", c.outputs.svg}, {"manifest", c.outputs.manifest}}}};
}

std::string config_hash(const ExperimentConfig& config) {
  return fnv1a_hex(config_to_json(config).dump());
}

}  // namespace gsql
