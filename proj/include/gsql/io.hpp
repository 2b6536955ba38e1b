#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "gsql/mdp.hpp"
#include "gsql/sampling.hpp"

namespace gsql {

// MDP documents:
//   {"num_states", "num_actions", "discount", "r_max" (optional),
//    "rewards": [[R(i,a)]], "transitions": [[[P(j|i,a)]]]}   index order [i][a][j]
// Doubles are written with shortest round-trip precision, so write/read is lossless.

nlohmann::json mdp_to_json(const Mdp& mdp);
/// Throws ParseError on layout problems; model validation errors propagate
/// as InvalidArgument.
Mdp mdp_from_json(const nlohmann::json& doc);

/// {"num_states", "num_actions", "values": [[Q(i,a)]]}
nlohmann::json qtable_to_json(const QTable& q);
QTable qtable_from_json(const nlohmann::json& doc);

/// mu in the transition layout of an MDP document, plus "w".
nlohmann::json mu_to_json(const MuDistribution& mu);

/// Throws IoError when the file cannot be opened and ParseError on invalid JSON.
nlohmann::json read_json_file(const std::filesystem::path& path);
/// Writes `doc.dump(2)` plus a trailing newline; throws IoError on failure.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);
void write_text_file(const std::filesystem::path& path, const std::string& text);

Mdp load_mdp(const std::filesystem::path& path);
void save_mdp(const std::filesystem::path& path, const Mdp& mdp);

/// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace gsql
