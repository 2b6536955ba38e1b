#include "gsql/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "gsql/config.hpp"
#include "gsql/error.hpp"
#include "gsql/io.hpp"

namespace gsql {
namespace {

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\n") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string xml_escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string curves_to_csv(std::span<const ErrorCurve> curves) {
  if (curves.empty()) throw InvalidArgument("no curves to write");
  std::string out(kCurveCsvHeader);
  out += '\n';
  for (const auto& c : curves) {
    for (std::size_t s = 0; s < c.iterations.size(); ++s) {
      out += fmt::format("{},{},{},{},{},{},{}\n", csv_field(c.experiment_id), csv_field(c.algorithm_id),
                         csv_field(c.w_label), c.mdp_count, c.iterations[s], c.errors[s],
                         c.state_mean_errors[s]);
    }
  }
  return out;
}

void emit_csv(std::span<const ErrorCurve> curves, const std::filesystem::path& path) {
  write_text_file(path, curves_to_csv(curves));
}

std::string runs_to_csv(std::span<const RunRecord> records) {
  if (records.empty()) throw InvalidArgument("no run records to write");
  std::string out = "mdp_index,algorithm,replicate,w,final_error,bound_violation\n";
  for (const auto& r : records) {
    out += fmt::format("{},{},{},{},{},{}\n", r.mdp_index, csv_field(r.algorithm_id), r.replicate, r.w,
                       r.final_error, r.bound_violation ? 1 : 0);
  }
  return out;
}

void emit_runs_csv(std::span<const RunRecord> records, const std::filesystem::path& path) {
  write_text_file(path, runs_to_csv(records));
}

std::string curves_to_svg(std::span<const ErrorCurve> curves, std::string_view title) {
  if (curves.empty()) throw InvalidArgument("no curves to plot");

  constexpr double kWidth = 820, kHeight = 480;
  constexpr double kLeft = 70, kRight = 190, kTop = 40, kBottom = 50;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  double max_iter = 1.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const auto& c : curves) {
    for (std::size_t s = 0; s < c.iterations.size(); ++s) {
      max_iter = std::max(max_iter, static_cast<double>(c.iterations[s]));
      if (c.errors[s] > 0.0 && std::isfinite(c.errors[s])) {
        lo = std::min(lo, c.errors[s]);
        hi = std::max(hi, c.errors[s]);
      }
    }
  }
  if (!(hi > 0.0)) {
    lo = 1e-3;
    hi = 1.0;
  }
  double decade_lo = std::floor(std::log10(lo));
  double decade_hi = std::ceil(std::log10(hi));
  if (decade_hi <= decade_lo) decade_hi = decade_lo + 1;
  const double floor_value = std::pow(10.0, decade_lo);

  auto x_of = [&](double n) { return kLeft + plot_w * n / max_iter; };
  auto y_of = [&](double e) {
    const double l = std::log10(std::max(e, floor_value));
    return kTop + plot_h * (decade_hi - l) / (decade_hi - decade_lo);
  };

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" "
      "viewBox=\"0 0 {:.0f} {:.0f}\" font-family=\"sans-serif\" font-size=\"12\">\n",
      kWidth, kHeight, kWidth, kHeight);
  svg += fmt::format("<rect width=\"{:.0f}\" height=\"{:.0f}\" fill=\"white\"/>\n", kWidth, kHeight);
  svg += fmt::format("<text x=\"{:.2f}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
                     kLeft + plot_w / 2, xml_escape(title));
  svg += fmt::format(
      "<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"none\" stroke=\"black\"/>\n",
      kLeft, kTop, plot_w, plot_h);

  for (double d = decade_lo; d <= decade_hi; d += 1.0) {
    const double y = y_of(std::pow(10.0, d));
    svg += fmt::format(
        "<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"#dddddd\"/>\n"
        "<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">1e{:.0f}</text>\n",
        kLeft, y, kLeft + plot_w, y, kLeft - 6, y + 4, d);
  }
  for (int t = 0; t <= 5; ++t) {
    const double n = max_iter * t / 5.0;
    const double x = x_of(n);
    svg += fmt::format(
        "<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"#dddddd\"/>\n"
        "<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{:.0f}</text>\n",
        x, kTop, x, kTop + plot_h, x, kTop + plot_h + 18, n);
  }
  svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">iteration</text>\n",
                     kLeft + plot_w / 2, kHeight - 10);
  svg += fmt::format(
      "<text x=\"16\" y=\"{:.2f}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.2f})\">"
      "average error</text>\n",
      kTop + plot_h / 2, kTop + plot_h / 2);

  for (std::size_t k = 0; k < curves.size(); ++k) {
    const auto& c = curves[k];
    const char* color = kPalette[k % std::size(kPalette)];
    std::string points;
    for (std::size_t s = 0; s < c.iterations.size(); ++s) {
      if (!std::isfinite(c.errors[s])) continue;
      if (!points.empty()) points += ' ';
      points += fmt::format("{:.2f},{:.2f}", x_of(static_cast<double>(c.iterations[s])), y_of(c.errors[s]));
    }
    svg += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
                       color, points);
    const double ly = kTop + 14 + 18 * static_cast<double>(k);
    const double lx = kLeft + plot_w + 14;
    svg += fmt::format(
        "<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"{}\" stroke-width=\"2\"/>\n"
        "<text x=\"{:.2f}\" y=\"{:.2f}\">{}</text>\n",
        lx, ly, lx + 22, ly, color, lx + 28, ly + 4, xml_escape(c.algorithm_id));
  }
  svg += "</svg>\n";
  return svg;
}

void emit_svg(std::span<const ErrorCurve> curves, const std::filesystem::path& path,
              std::string_view title) {
  write_text_file(path, curves_to_svg(curves, title));
}

nlohmann::json make_manifest(const ExperimentConfig& config, std::string_view command,
                             std::span<const ErrorCurve> curves, std::span<const RunRecord> records) {
  nlohmann::json curve_docs = nlohmann::json::array();
  for (const auto& c : curves) {
    curve_docs.push_back({{"algorithm", c.algorithm_id},
                          {"w", c.w_label},
                          {"mdp_count", c.mdp_count},
                          {"final_iteration", c.iterations.empty() ? 0 : c.iterations.back()},
                          {"final_avg_error", c.errors.empty() ? 0.0 : c.errors.back()},
                          {"ensemble_hash", c.ensemble_hash}});
  }
  nlohmann::json run_docs = nlohmann::json::array();
  for (const auto& r : records) {
    run_docs.push_back({{"mdp_index", r.mdp_index},
                        {"algorithm", r.algorithm_id},
                        {"replicate", r.replicate},
                        {"w", r.w},
                        {"final_error", r.final_error},
                        {"bound_violation", r.bound_violation}});
  }
  return {{"command", std::string(command)},
          {"experiment_id", config.experiment_id},
          {"config_hash", config_hash(config)},
          {"master_seed", config.master_seed},
          {"config", config_to_json(config)},
          {"curves", curve_docs},
          {"runs", run_docs}};
}

}  // namespace gsql
