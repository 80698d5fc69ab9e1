#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cevoi/io.hpp"
#include "cevoi/plot.hpp"

namespace cevoi {

/// SVG 1.1 document for a PlotSpec. Output depends only on its input: fixed ids,
/// fixed number formatting, no timestamps.
std::string render_svg(const PlotSpec& spec);

/// Figures produced for one plot kind. Per-comparison kinds give one spec per
/// comparison; evi gives the risk-aversion pair as well when attached.
struct NamedSpec {
  std::string name;  // file stem
  PlotSpec spec;
};
std::vector<NamedSpec> build_plots(const Analysis& analysis, const io::AttachedExtensions& ext,
                                   PlotKind kind, double k,
                                   std::optional<std::size_t> comparison = std::nullopt,
                                   const PlotOptions& options = {});

inline const std::vector<PlotKind> kDefaultReportPlots{PlotKind::ceplane, PlotKind::eib,
                                                       PlotKind::ceac, PlotKind::evi};

struct ReportOptions {
  double k = 0.0;
  std::vector<PlotKind> plots = kDefaultReportPlots;
  std::filesystem::path out_dir;
  std::string title = "Cost-effectiveness analysis report";
  std::size_t sim_rows = 6;
  /// Parameters for the value-of-information section; omitted when empty.
  std::optional<ParameterInputs> inputs;
  PlotOptions plot_options;
};

struct ReportDoc {
  std::string markdown;
  std::filesystem::path path;                 // report.md inside out_dir
  std::vector<std::filesystem::path> assets;  // relative to out_dir
};

/// Writes report.md and figures/*.svg under options.out_dir. Throws IoError
/// when the directory cannot be created or written.
ReportDoc make_report(const Analysis& analysis, const io::ExtensionState& state,
                      const ReportOptions& options);

}  // namespace cevoi
