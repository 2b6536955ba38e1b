#include "gsql/io.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "gsql/error.hpp"

namespace gsql {
namespace {

using nlohmann::json;

template <class T>
T required(const json& doc, const char* key) {
  if (!doc.contains(key)) throw ParseError(fmt::format("missing key '{}'", key));
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("key '{}': {}", key, e.what()));
  }
}

json tensor_rows(std::span<const double> flat, std::size_t ns, std::size_t na) {
  json out = json::array();
  for (std::size_t i = 0; i < ns; ++i) {
    json per_state = json::array();
    for (std::size_t a = 0; a < na; ++a) {
      const auto begin = flat.begin() + static_cast<std::ptrdiff_t>((i * na + a) * ns);
      per_state.push_back(std::vector<double>(begin, begin + static_cast<std::ptrdiff_t>(ns)));
    }
    out.push_back(std::move(per_state));
  }
  return out;
}

}  // namespace

json mdp_to_json(const Mdp& mdp) {
  const std::size_t ns = mdp.num_states();
  const std::size_t na = mdp.num_actions();
  json rewards = json::array();
  for (std::size_t i = 0; i < ns; ++i) {
    const auto begin = mdp.rewards().begin() + static_cast<std::ptrdiff_t>(i * na);
    rewards.push_back(std::vector<double>(begin, begin + static_cast<std::ptrdiff_t>(na)));
  }
  return json{{"num_states", ns},
              {"num_actions", na},
              {"discount", mdp.discount()},
              {"r_max", mdp.r_max()},
              {"rewards", std::move(rewards)},
              {"transitions", tensor_rows(mdp.transitions(), ns, na)}};
}

Mdp mdp_from_json(const json& doc) {
  if (!doc.is_object()) throw ParseError("MDP document must be a JSON object");
  for (const auto& [key, _] : doc.items()) {
    if (key != "num_states" && key != "num_actions" && key != "discount" && key != "r_max" &&
        key != "rewards" && key != "transitions") {
      throw ParseError(fmt::format("unknown key '{}' in MDP document", key));
    }
  }
  const auto ns = required<std::size_t>(doc, "num_states");
  const auto na = required<std::size_t>(doc, "num_actions");
  const auto discount = required<double>(doc, "discount");
  const auto rewards = required<std::vector<std::vector<double>>>(doc, "rewards");
  const auto transitions = required<std::vector<std::vector<std::vector<double>>>>(doc, "transitions");

  std::vector<double> flat_r;
  if (rewards.size() != ns) throw ParseError("rewards: wrong number of states");
  for (const auto& row : rewards) {
    if (row.size() != na) throw ParseError("rewards: wrong number of actions");
    flat_r.insert(flat_r.end(), row.begin(), row.end());
  }
  std::vector<double> flat_p;
  if (transitions.size() != ns) throw ParseError("transitions: wrong number of states");
  for (const auto& per_state : transitions) {
    if (per_state.size() != na) throw ParseError("transitions: wrong number of actions");
    for (const auto& row : per_state) {
      if (row.size() != ns) throw ParseError("transitions: row length differs from num_states");
      flat_p.insert(flat_p.end(), row.begin(), row.end());
    }
  }
  std::optional<double> r_max;
  if (doc.contains("r_max")) r_max = required<double>(doc, "r_max");
  return Mdp(ns, na, std::move(flat_p), std::move(flat_r), discount, r_max);
}

json qtable_to_json(const QTable& q) {
  json values = json::array();
  for (std::size_t i = 0; i < q.num_states(); ++i) {
    const auto r = q.row(i);
    values.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return json{{"num_states", q.num_states()}, {"num_actions", q.num_actions()}, {"values", values}};
}

QTable qtable_from_json(const json& doc) {
  if (!doc.is_object()) throw ParseError("Q-table document must be a JSON object");
  const auto ns = required<std::size_t>(doc, "num_states");
  const auto na = required<std::size_t>(doc, "num_actions");
  const auto rows = required<std::vector<std::vector<double>>>(doc, "values");
  std::vector<double> flat;
  if (rows.size() != ns) throw ParseError("values: wrong number of states");
  for (const auto& row : rows) {
    if (row.size() != na) throw ParseError("values: wrong number of actions");
    flat.insert(flat.end(), row.begin(), row.end());
  }
  return QTable(ns, na, std::move(flat));
}

json mu_to_json(const MuDistribution& mu) {
  return json{{"num_states", mu.num_states()},
              {"num_actions", mu.num_actions()},
              {"w", mu.w()},
              {"transitions", tensor_rows(mu.probs(), mu.num_states(), mu.num_actions())}};
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << text;
  out.flush();
  if (!out) throw IoError(path.string(), "write failed");
}

void write_json_file(const std::filesystem::path& path, const json& doc) {
  write_text_file(path, doc.dump(2) + "\n");
}

Mdp load_mdp(const std::filesystem::path& path) { return mdp_from_json(read_json_file(path)); }

void save_mdp(const std::filesystem::path& path, const Mdp& mdp) {
  write_json_file(path, mdp_to_json(mdp));
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace gsql
