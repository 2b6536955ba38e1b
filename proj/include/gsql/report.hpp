#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "json.hpp"

#include "gsql/harness.hpp"

namespace gsql {

inline constexpr std::string_view kCurveCsvHeader =
    "experiment_id,algorithm,w,mdp_count,iteration,avg_error,avg_error_state_mean";

/// One row per recorded iteration of every curve, `\n` line endings. Output
/// is a pure function of the curves. Throws InvalidArgument (and writes
/// nothing) for an empty curve list.
std::string curves_to_csv(std::span<const ErrorCurve> curves);
void emit_csv(std::span<const ErrorCurve> curves, const std::filesystem::path& path);

/// Deterministic per-run summary (no timings):
/// mdp_index,algorithm,replicate,w,final_error,bound_violation
std::string runs_to_csv(std::span<const RunRecord> records);
void emit_runs_csv(std::span<const RunRecord> records, const std::filesystem::path& path);

/// Line chart with a log-scaled error axis, one polyline per curve and a
/// legend keyed by algorithm id.
std::string curves_to_svg(std::span<const ErrorCurve> curves, std::string_view title);
void emit_svg(std::span<const ErrorCurve> curves, const std::filesystem::path& path,
              std::string_view title = "average error");

/// Manifest document: config hash, seed, command and per-run summaries.
nlohmann::json make_manifest(const ExperimentConfig& config, std::string_view command,
                             std::span<const ErrorCurve> curves, std::span<const RunRecord> records);

}  // namespace gsql
