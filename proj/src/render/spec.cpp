#include <array>
#include <cmath>
#include <set>
#include <utility>

#include <fmt/format.h>

#include "cevoi/plot.hpp"

namespace cevoi {

namespace {

constexpr std::array<std::pair<PlotKind, std::string_view>, 11> kKindNames{{
    {PlotKind::ceplane, "ceplane"},
    {PlotKind::ceac, "ceac"},
    {PlotKind::ceaf, "ceaf"},
    {PlotKind::ceef, "ceef"},
    {PlotKind::eib, "eib"},
    {PlotKind::evi, "evi"},
    {PlotKind::ib_density, "ib-density"},
    {PlotKind::contour, "contour"},
    {PlotKind::contour2, "contour2"},
    {PlotKind::info_rank, "info-rank"},
    {PlotKind::grid, "grid"},
}};

constexpr std::array<std::pair<LegendPosition, std::string_view>, 5> kLegendNames{{
    {LegendPosition::top_right, "top-right"},
    {LegendPosition::top_left, "top-left"},
    {LegendPosition::bottom_right, "bottom-right"},
    {LegendPosition::bottom_left, "bottom-left"},
    {LegendPosition::none, "none"},
}};

std::string_view series_type_name(SeriesType t) {
  switch (t) {
    case SeriesType::points:
      return "points";
    case SeriesType::line:
      return "line";
    case SeriesType::step:
      return "step";
    case SeriesType::segments:
      return "segments";
    case SeriesType::bars:
      return "bars";
    case SeriesType::area:
      return "area";
  }
  return "line";
}

void check_into(const PlotSpec& spec, const std::string& where, std::vector<std::string>& out) {
  auto inside = [](double v, const Axis& a) { return v >= a.min && v <= a.max; };
  if (!(spec.x_axis.min < spec.x_axis.max) || !(spec.y_axis.min < spec.y_axis.max)) {
    if (spec.kind != PlotKind::grid) out.push_back(where + "empty axis range");
  }
  std::set<std::string> labels;
  for (const Series& s : spec.series) {
    if (s.x.size() != s.y.size()) {
      out.push_back(fmt::format("{}series '{}': x and y lengths differ", where, s.label));
      continue;
    }
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
        out.push_back(fmt::format("{}series '{}': non-finite datum at {}", where, s.label, i));
        break;
      }
      if (!inside(s.x[i], spec.x_axis) || !inside(s.y[i], spec.y_axis)) {
        out.push_back(fmt::format("{}series '{}': datum {} outside the axes", where, s.label, i));
        break;
      }
    }
    if (s.in_legend && !labels.insert(s.label).second) {
      out.push_back(fmt::format("{}duplicate legend label '{}'", where, s.label));
    }
  }
  for (const Annotation& a : spec.annotations) {
    for (std::size_t i = 0; i < a.x.size() && i < a.y.size(); ++i) {
      if (!std::isfinite(a.x[i]) || !std::isfinite(a.y[i])) {
        out.push_back(fmt::format("{}annotation '{}': non-finite coordinate", where, a.kind));
        break;
      }
    }
  }
  for (std::size_t p = 0; p < spec.panels.size(); ++p) {
    check_into(spec.panels[p], fmt::format("{}panel {}: ", where, p + 1), out);
  }
}

}  // namespace

std::string_view to_string(PlotKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<PlotKind> plot_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

std::string_view to_string(LegendPosition position) {
  for (const auto& [p, name] : kLegendNames) {
    if (p == position) return name;
  }
  return "top-right";
}

std::optional<LegendPosition> legend_position_from_string(std::string_view name) {
  for (const auto& [p, n] : kLegendNames) {
    if (n == name) return p;
  }
  return std::nullopt;
}

std::vector<std::string> check_spec(const PlotSpec& spec) {
  std::vector<std::string> out;
  check_into(spec, "", out);
  return out;
}

nlohmann::json to_json(const PlotSpec& spec) {
  using nlohmann::json;
  auto axis = [](const Axis& a) {
    json j{{"title", a.title}, {"min", a.min}, {"max", a.max}};
    if (!a.categories.empty()) j["categories"] = a.categories;
    return j;
  };
  json series = json::array();
  for (const Series& s : spec.series) {
    series.push_back(json{{"type", series_type_name(s.type)},
                          {"label", s.label},
                          {"x", s.x},
                          {"y", s.y},
                          {"color", s.color},
                          {"dashed", s.dashed},
                          {"in_legend", s.in_legend},
                          {"marker_size", s.marker_size}});
  }
  json annotations = json::array();
  for (const Annotation& a : spec.annotations) {
    annotations.push_back(json{{"kind", a.kind}, {"x", a.x}, {"y", a.y}, {"text", a.text}});
  }
  json panels = json::array();
  for (const PlotSpec& p : spec.panels) panels.push_back(to_json(p));
  return json{{"kind", to_string(spec.kind)},
              {"title", spec.title},
              {"x_axis", axis(spec.x_axis)},
              {"y_axis", axis(spec.y_axis)},
              {"series", std::move(series)},
              {"annotations", std::move(annotations)},
              {"legend", to_string(spec.legend)},
              {"notes", spec.notes},
              {"panels", std::move(panels)}};
}

}  // namespace cevoi
