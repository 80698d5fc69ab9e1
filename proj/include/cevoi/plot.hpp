#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cevoi/analysis.hpp"
#include "cevoi/extensions.hpp"
#include "cevoi/voi.hpp"

namespace cevoi {

enum class PlotKind { ceplane, ceac, ceaf, ceef, eib, evi, ib_density, contour, contour2, info_rank, grid };

std::string_view to_string(PlotKind kind);
std::optional<PlotKind> plot_kind_from_string(std::string_view name);

enum class SeriesType {
  points,
  line,
  step,
  /// Consecutive (x, y) pairs form separate segments; used for contours.
  segments,
  /// Horizontal bars from 0 to x at category position y.
  bars,
  /// Filled area between y and the x axis.
  area,
};

struct Series {
  SeriesType type = SeriesType::line;
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::size_t color = 0;  // palette slot, by arm index where one applies
  bool dashed = false;
  bool in_legend = true;
  double marker_size = 1.8;  // points only, in px
};

struct Axis {
  std::string title;
  double min = 0.0;
  double max = 1.0;
  /// Category names for bar charts, indexed by position.
  std::vector<std::string> categories;
};

/// Non-series decorations. `kind` is one of: "icer-marker", "icer-label",
/// "wtp-line", "sustainability-area", "vline", "hline", "text", "quadrant",
/// "point-note" (below right of a point), "segment-label" (above left).
struct Annotation {
  std::string kind;
  std::vector<double> x;
  std::vector<double> y;
  std::string text;
};

enum class LegendPosition { top_right, top_left, bottom_right, bottom_left, none };

std::string_view to_string(LegendPosition position);
std::optional<LegendPosition> legend_position_from_string(std::string_view name);

struct PlotSpec {
  PlotKind kind = PlotKind::ceplane;
  std::string title;
  Axis x_axis;
  Axis y_axis;
  std::vector<Series> series;
  std::vector<Annotation> annotations;
  LegendPosition legend = LegendPosition::top_right;
  /// Fallbacks and caveats, e.g. a degenerate sample.
  std::vector<std::string> notes;
  /// Sub-plots of a grid, row-major.
  std::vector<PlotSpec> panels;
};

/// Finite data, axis ranges covering every datum, unique legend labels.
/// Returns the violations; empty when the PlotSpec is valid.
std::vector<std::string> check_spec(const PlotSpec& spec);

nlohmann::json to_json(const PlotSpec& spec);

struct PlotOptions {
  std::optional<LegendPosition> legend;
};

// Comparison arguments are positions in analysis.comparisons().

/// Scatter of (delta e, delta c) per simulation, the sustainability area below
/// delta c = k delta e, and, for a single comparison, the ICER marker.
PlotSpec ceplane_spec(const Analysis& analysis, std::optional<std::size_t> comparison, double k,
                      const PlotOptions& options = {});

/// Pairwise acceptability curves, one per comparison.
PlotSpec ceac_spec(const Analysis& analysis, const PlotOptions& options = {});
/// Simultaneous curves, one per included arm; they sum to one at every k.
PlotSpec ceac_spec(const Analysis& analysis, const MultiCeResult& multi,
                   const PlotOptions& options = {});

PlotSpec ceaf_spec(const Analysis& analysis, const MultiCeResult& multi,
                   const PlotOptions& options = {});

/// One line per comparison with vertical markers at the break-even points.
PlotSpec eib_spec(const Analysis& analysis, const PlotOptions& options = {});

PlotSpec evi_spec(const Analysis& analysis, const PlotOptions& options = {});
/// EVPI of the optimal strategy and of the mixed strategy.
PlotSpec evi_spec(const Analysis& analysis, const MixedStrategy& mixed,
                  const PlotOptions& options = {});

/// EIB and EVI curves, one per risk-aversion value.
struct RiskAversionPlots {
  PlotSpec eib;
  PlotSpec evi;
};
RiskAversionPlots risk_aversion_specs(const Analysis& analysis, const RiskAversionSet& set,
                                      const PlotOptions& options = {});

/// Gaussian kernel density estimate with Scott's bandwidth.
struct Density {
  std::vector<double> x;
  std::vector<double> y;
  double bandwidth = 0.0;
  bool degenerate = false;
};
Density kernel_density(std::span<const double> sample, std::size_t points = 512);

PlotSpec ib_density_spec(const Analysis& analysis, std::size_t comparison, double k,
                         const PlotOptions& options = {});

inline const std::vector<double> kDefaultContourLevels{0.5, 0.75, 0.95};

/// Shares of the cost-effectiveness plane quadrants, counting points on an
/// axis toward the positive side. Order: NE, NW, SW, SE.
std::vector<double> quadrant_proportions(std::span<const double> de, std::span<const double> dc);

/// Highest-density contours of a product-Gaussian 2-D kernel estimate over a
/// 100 x 100 grid. `annotated` adds quadrant shares and the k line (contour2).
PlotSpec contour_spec(const Analysis& analysis, std::size_t comparison,
                      const std::vector<double>& levels = kDefaultContourLevels,
                      bool annotated = false, double k = 0.0, const PlotOptions& options = {});

/// Efficiency frontier over (mean effect, mean cost) per arm.
enum class FrontierStatus { frontier, dominated, extended_dominated };
std::string_view to_string(FrontierStatus status);

struct Frontier {
  std::vector<double> mean_e;
  std::vector<double> mean_c;
  std::vector<FrontierStatus> status;  // per arm
  std::vector<std::size_t> path;       // frontier arms by increasing effect
  std::vector<double> icers;           // between consecutive frontier arms
};
Frontier efficiency_frontier(std::span<const double> mean_e, std::span<const double> mean_c);

PlotSpec ceef_spec(const Analysis& analysis, const PlotOptions& options = {});

PlotSpec info_rank_spec(const InfoRankResult& rank, const PlotOptions& options = {});

/// 2 x 2 panels: ceplane, eib, ceac, evi.
PlotSpec grid_spec(const Analysis& analysis, double k, const PlotOptions& options = {});

}  // namespace cevoi
