#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "cevoi/error.hpp"
#include "cevoi/plot.hpp"

namespace cevoi {

namespace {

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void add(std::span<const double> vs) {
    for (double v : vs) add(v);
  }

  Axis axis(std::string title, double pad = 0.05) const {
    double a = lo;
    double b = hi;
    if (!(a <= b)) {
      a = 0.0;
      b = 1.0;
    }
    if (a == b) {
      const double w = std::max(std::fabs(a) * 0.1, 1.0);
      a -= w;
      b += w;
    } else {
      const double w = (b - a) * pad;
      a -= w;
      b += w;
    }
    return Axis{std::move(title), a, b, {}};
  }
};

Axis unit_axis(std::string title) { return Axis{std::move(title), 0.0, 1.0, {}}; }

Axis wtp_axis(const Analysis& a) { return Axis{"Willingness to pay", 0.0, a.grid().kmax(), {}}; }

void apply(PlotSpec& spec, const PlotOptions& options) {
  if (options.legend) spec.legend = *options.legend;
}

std::string comparison_label(const Analysis& a, std::size_t j) {
  const auto& labels = a.dataset().labels;
  return fmt::format("{} vs {}", labels[a.ref()], labels[a.comparisons()[j]]);
}

void check_comparison(const Analysis& a, std::size_t j) {
  if (j >= a.n_comparisons()) {
    throw ValidationError(
        fmt::format("comparison {} out of range (1..{})", j + 1, a.n_comparisons()), "comparison");
  }
}

void check_wtp(double k) {
  if (!std::isfinite(k) || k < 0.0) {
    throw ValidationError(fmt::format("willingness to pay {} must be >= 0", k), "k");
  }
}

std::string number(double v) { return fmt::format("{:.6g}", v); }

struct Point {
  double x;
  double y;
};

/// Clips the axis box to the half-plane y <= k x.
std::vector<Point> sustainability_polygon(const Axis& xa, const Axis& ya, double k) {
  const std::vector<Point> box{{xa.min, ya.min}, {xa.max, ya.min}, {xa.max, ya.max}, {xa.min, ya.max}};
  auto f = [k](const Point& p) { return k * p.x - p.y; };
  std::vector<Point> out;
  for (std::size_t i = 0; i < box.size(); ++i) {
    const Point& p = box[i];
    const Point& q = box[(i + 1) % box.size()];
    const double fp = f(p);
    const double fq = f(q);
    if (fp >= 0.0) out.push_back(p);
    if ((fp >= 0.0) != (fq >= 0.0)) {
      const double t = fp / (fp - fq);
      out.push_back({p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)});
    }
  }
  return out;
}

/// The segment of y = k x inside the box, if any.
std::optional<std::pair<Point, Point>> wtp_segment(const Axis& xa, const Axis& ya, double k) {
  double x0 = xa.min;
  double x1 = xa.max;
  if (k > 0.0) {
    x0 = std::max(x0, ya.min / k);
    x1 = std::min(x1, ya.max / k);
  } else if (ya.min > 0.0 || ya.max < 0.0) {
    return std::nullopt;
  }
  if (!(x0 < x1)) return std::nullopt;
  return std::make_pair(Point{x0, k * x0}, Point{x1, k * x1});
}

void add_wtp_line(PlotSpec& spec, double k) {
  if (auto seg = wtp_segment(spec.x_axis, spec.y_axis, k)) {
    spec.annotations.push_back(
        {"wtp-line", {seg->first.x, seg->second.x}, {seg->first.y, seg->second.y}, "k = " + number(k)});
  }
}

Series line(std::string label, std::vector<double> x, std::vector<double> y, std::size_t color,
            bool dashed = false) {
  Series s;
  s.type = SeriesType::line;
  s.label = std::move(label);
  s.x = std::move(x);
  s.y = std::move(y);
  s.color = color;
  s.dashed = dashed;
  return s;
}

}  // namespace

PlotSpec ceplane_spec(const Analysis& a, std::optional<std::size_t> comparison, double k,
                      const PlotOptions& options) {
  check_wtp(k);
  std::vector<std::size_t> shown;
  if (comparison) {
    check_comparison(a, *comparison);
    shown.push_back(*comparison);
  } else {
    for (std::size_t j = 0; j < a.n_comparisons(); ++j) shown.push_back(j);
  }

  PlotSpec spec;
  spec.kind = PlotKind::ceplane;
  spec.title = "Cost-effectiveness plane";
  Range xr, yr;
  xr.add(0.0);
  yr.add(0.0);
  const auto& cmp = a.comparison_statistics();
  for (std::size_t j : shown) {
    Series s;
    s.type = SeriesType::points;
    s.label = comparison_label(a, j);
    s.color = a.comparisons()[j];
    s.x = cmp.delta_e.col(j);
    s.y = cmp.delta_c.col(j);
    xr.add(s.x);
    yr.add(s.y);
    spec.series.push_back(std::move(s));
  }
  spec.x_axis = xr.axis("Effectiveness differential");
  spec.y_axis = yr.axis("Cost differential");

  Annotation area{"sustainability-area", {}, {}, "Cost-effective region"};
  for (const Point& p : sustainability_polygon(spec.x_axis, spec.y_axis, k)) {
    area.x.push_back(p.x);
    area.y.push_back(p.y);
  }
  spec.annotations.push_back(std::move(area));
  add_wtp_line(spec, k);

  if (shown.size() == 1) {
    const Icer& icer = a.icer(shown[0]);
    spec.annotations.push_back(
        {"icer-marker", {icer.mean_delta_e}, {icer.mean_delta_c}, "mean"});
    spec.annotations.push_back({"icer-label",
                                {spec.x_axis.max},
                                {spec.y_axis.max},
                                "ICER = " + (icer.value ? number(*icer.value) : std::string("NA"))});
  } else {
    spec.notes.emplace_back("ICER not shown for more than one comparison");
  }
  apply(spec, options);
  return spec;
}

PlotSpec ceac_spec(const Analysis& a, const PlotOptions& options) {
  PlotSpec spec;
  spec.kind = PlotKind::ceac;
  spec.title = "Cost-effectiveness acceptability curve";
  spec.x_axis = wtp_axis(a);
  spec.y_axis = unit_axis("Probability of cost-effectiveness");
  for (std::size_t j = 0; j < a.n_comparisons(); ++j) {
    spec.series.push_back(line(comparison_label(a, j), a.grid().values(),
                               a.comparison_statistics().ceac.col(j), a.comparisons()[j]));
  }
  spec.legend = LegendPosition::bottom_right;
  apply(spec, options);
  return spec;
}

PlotSpec ceac_spec(const Analysis& a, const MultiCeResult& multi, const PlotOptions& options) {
  PlotSpec spec;
  spec.kind = PlotKind::ceac;
  spec.title = "Probability of being the most cost-effective";
  spec.x_axis = wtp_axis(a);
  spec.y_axis = unit_axis("Probability of most cost-effective");
  for (std::size_t t : multi.included) {
    spec.series.push_back(line(a.dataset().labels[t], a.grid().values(), multi.p_best.col(t), t));
  }
  apply(spec, options);
  return spec;
}

PlotSpec ceaf_spec(const Analysis& a, const MultiCeResult& multi, const PlotOptions& options) {
  PlotSpec spec;
  spec.kind = PlotKind::ceaf;
  spec.title = "Cost-effectiveness acceptability frontier";
  spec.x_axis = wtp_axis(a);
  spec.y_axis = unit_axis("Probability of most cost-effective");
  Series s = line("Frontier", a.grid().values(), multi.ceaf, 0);
  s.type = SeriesType::step;
  spec.series.push_back(std::move(s));
  const auto& grid = a.grid();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (k == 0 || multi.best[k] != multi.best[k - 1]) {
      spec.annotations.push_back({"text", {grid[k]}, {multi.ceaf[k]}, a.dataset().labels[multi.best[k]]});
    }
  }
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (multi.best[k] != multi.best[k - 1]) {
      spec.annotations.push_back({"vline", {grid[k]}, {}, "k = " + number(grid[k])});
    }
  }
  apply(spec, options);
  return spec;
}

PlotSpec eib_spec(const Analysis& a, const PlotOptions& options) {
  PlotSpec spec;
  spec.kind = PlotKind::eib;
  spec.title = "Expected incremental benefit";
  spec.x_axis = wtp_axis(a);
  Range yr;
  yr.add(0.0);
  for (std::size_t j = 0; j < a.n_comparisons(); ++j) {
    auto y = a.comparison_statistics().eib.col(j);
    yr.add(y);
    spec.series.push_back(line(comparison_label(a, j), a.grid().values(), std::move(y),
                               a.comparisons()[j]));
  }
  spec.y_axis = yr.axis("EIB");
  spec.annotations.push_back({"hline", {}, {0.0}, ""});
  for (double k : a.kstar()) spec.annotations.push_back({"vline", {k}, {}, "k* = " + number(k)});
  apply(spec, options);
  return spec;
}

PlotSpec evi_spec(const Analysis& a, const PlotOptions& options) {
  PlotSpec spec;
  spec.kind = PlotKind::evi;
  spec.title = "Expected value of perfect information";
  spec.x_axis = wtp_axis(a);
  Range yr;
  yr.add(0.0);
  yr.add(a.evi());
  spec.y_axis = yr.axis("EVPI");
  spec.series.push_back(line("EVPI", a.grid().values(), a.evi(), 0));
  spec.legend = LegendPosition::top_left;
  apply(spec, options);
  return spec;
}

PlotSpec evi_spec(const Analysis& a, const MixedStrategy& mixed, const PlotOptions& options) {
  PlotSpec spec;
  spec.kind = PlotKind::evi;
  spec.title = "EVPI: optimal and mixed strategy";
  spec.x_axis = wtp_axis(a);
  Range yr;
  yr.add(0.0);
  yr.add(a.evi());
  yr.add(mixed.evi);
  spec.y_axis = yr.axis("EVPI");
  spec.series.push_back(line("Optimal strategy", a.grid().values(), a.evi(), 0));
  spec.series.push_back(line("Mixed strategy", a.grid().values(), mixed.evi, 1, true));
  spec.legend = LegendPosition::top_left;
  apply(spec, options);
  return spec;
}

RiskAversionPlots risk_aversion_specs(const Analysis& a, const RiskAversionSet& set,
                                      const PlotOptions& options) {
  if (set.scenarios.empty()) throw ValidationError("no risk aversion scenarios", "riskav");
  RiskAversionPlots out;
  out.eib.kind = PlotKind::eib;
  out.eib.title = "Expected incremental benefit by risk aversion";
  out.eib.x_axis = wtp_axis(a);
  out.evi.kind = PlotKind::evi;
  out.evi.title = "EVPI by risk aversion";
  out.evi.x_axis = wtp_axis(a);
  Range eib_r, evi_r;
  eib_r.add(0.0);
  evi_r.add(0.0);
  for (std::size_t i = 0; i < set.scenarios.size(); ++i) {
    const auto& sc = set.scenarios[i];
    const std::string r = "r = " + number(sc.r);
    for (std::size_t j = 0; j < a.n_comparisons(); ++j) {
      auto y = sc.eib.col(j);
      eib_r.add(y);
      const std::string label =
          a.n_comparisons() == 1 ? r : fmt::format("{}: {}", r, comparison_label(a, j));
      out.eib.series.push_back(line(label, a.grid().values(), std::move(y), i, j > 0));
    }
    evi_r.add(sc.evi);
    out.evi.series.push_back(line(r, a.grid().values(), sc.evi, i));
    if (sc.saturated) {
      out.evi.notes.push_back(r + ": utility saturated for very negative benefits");
    }
  }
  out.eib.y_axis = eib_r.axis("EIB");
  out.eib.annotations.push_back({"hline", {}, {0.0}, ""});
  out.evi.y_axis = evi_r.axis("EVPI");
  out.evi.legend = LegendPosition::top_left;
  apply(out.eib, options);
  apply(out.evi, options);
  return out;
}

PlotSpec ib_density_spec(const Analysis& a, std::size_t comparison, double k,
                         const PlotOptions& options) {
  check_wtp(k);
  check_comparison(a, comparison);
  if (k > a.grid().kmax()) {
    throw ValidationError(fmt::format("k = {} is above kmax = {}", k, a.grid().kmax()), "k");
  }
  const std::size_t ki = a.grid().nearest(k);
  std::vector<double> sample(a.n_sim());
  for (std::size_t s = 0; s < a.n_sim(); ++s) sample[s] = a.ib(s, ki, comparison);
  const Density d = kernel_density(sample);

  PlotSpec spec;
  spec.kind = PlotKind::ib_density;
  spec.title = fmt::format("Incremental benefit distribution, k = {}", number(a.grid()[ki]));
  Range xr, yr;
  xr.add(d.x);
  xr.add(0.0);
  yr.add(0.0);
  yr.add(d.y);
  spec.x_axis = xr.axis(comparison_label(a, comparison), 0.0);
  spec.y_axis = yr.axis("Density");
  spec.y_axis.min = 0.0;

  Series positive;
  positive.type = SeriesType::area;
  positive.label = "IB > 0";
  positive.color = a.comparisons()[comparison];
  for (std::size_t i = 0; i < d.x.size(); ++i) {
    if (d.x[i] < 0.0) continue;
    if (positive.x.empty() && i > 0) {
      const double t = -d.x[i - 1] / (d.x[i] - d.x[i - 1]);
      positive.x.push_back(0.0);
      positive.y.push_back(d.y[i - 1] + t * (d.y[i] - d.y[i - 1]));
    }
    positive.x.push_back(d.x[i]);
    positive.y.push_back(d.y[i]);
  }
  if (!positive.x.empty()) spec.series.push_back(std::move(positive));
  spec.series.push_back(line("Density", d.x, d.y, a.comparisons()[comparison]));
  spec.annotations.push_back({"vline", {0.0}, {}, ""});
  if (d.degenerate) {
    spec.notes.push_back(fmt::format("degenerate sample; nominal bandwidth {}", number(d.bandwidth)));
  }
  apply(spec, options);
  return spec;
}

std::string_view to_string(FrontierStatus status) {
  switch (status) {
    case FrontierStatus::frontier:
      return "frontier";
    case FrontierStatus::dominated:
      return "dominated";
    case FrontierStatus::extended_dominated:
      return "extended dominance";
  }
  return "frontier";
}

Frontier efficiency_frontier(std::span<const double> mean_e, std::span<const double> mean_c) {
  const std::size_t n = mean_e.size();
  Frontier f;
  f.mean_e.assign(mean_e.begin(), mean_e.end());
  f.mean_c.assign(mean_c.begin(), mean_c.end());
  f.status.assign(n, FrontierStatus::frontier);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n && f.status[i] == FrontierStatus::frontier; ++j) {
      if (j == i) continue;
      const bool weakly = mean_e[j] >= mean_e[i] && mean_c[j] <= mean_c[i];
      const bool strictly = mean_e[j] > mean_e[i] || mean_c[j] < mean_c[i];
      // identical arms: the lower index stays
      if (weakly && (strictly || j < i)) f.status[i] = FrontierStatus::dominated;
    }
  }
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < n; ++i) {
    if (f.status[i] == FrontierStatus::frontier) candidates.push_back(i);
  }
  std::sort(candidates.begin(), candidates.end(),
            [&](std::size_t x, std::size_t y) { return mean_e[x] < mean_e[y]; });

  auto icer = [&](std::size_t x, std::size_t y) {
    return (mean_c[y] - mean_c[x]) / (mean_e[y] - mean_e[x]);
  };
  for (std::size_t c : candidates) {
    f.path.push_back(c);
    while (f.path.size() >= 3) {
      const std::size_t m = f.path.size();
      if (icer(f.path[m - 3], f.path[m - 2]) < icer(f.path[m - 2], f.path[m - 1])) break;
      f.status[f.path[m - 2]] = FrontierStatus::extended_dominated;
      f.path.erase(f.path.begin() + static_cast<std::ptrdiff_t>(m - 2));
    }
  }
  for (std::size_t i = 1; i < f.path.size(); ++i) f.icers.push_back(icer(f.path[i - 1], f.path[i]));
  return f;
}

PlotSpec ceef_spec(const Analysis& a, const PlotOptions& options) {
  const std::size_t n = a.n_int();
  std::vector<double> me(n, 0.0), mc(n, 0.0);
  const auto& d = a.dataset();
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t s = 0; s < a.n_sim(); ++s) {
      me[t] += d.effects(s, t);
      mc[t] += d.costs(s, t);
    }
    me[t] /= static_cast<double>(a.n_sim());
    mc[t] /= static_cast<double>(a.n_sim());
  }
  const Frontier f = efficiency_frontier(me, mc);

  PlotSpec spec;
  spec.kind = PlotKind::ceef;
  spec.title = "Cost-effectiveness efficiency frontier";
  Range xr, yr;
  xr.add(me);
  yr.add(mc);
  spec.x_axis = xr.axis("Mean effectiveness", 0.1);
  spec.y_axis = yr.axis("Mean cost", 0.1);
  Series frontier;
  frontier.type = SeriesType::line;
  frontier.label = "Efficiency frontier";
  frontier.color = 0;
  for (std::size_t t : f.path) {
    frontier.x.push_back(me[t]);
    frontier.y.push_back(mc[t]);
  }
  spec.series.push_back(std::move(frontier));
  for (std::size_t t = 0; t < n; ++t) {
    Series s;
    s.type = SeriesType::points;
    s.label = d.labels[t];
    s.color = t;
    s.x = {me[t]};
    s.y = {mc[t]};
    s.marker_size = 4.5;
    spec.series.push_back(std::move(s));
    if (f.status[t] != FrontierStatus::frontier) {
      spec.annotations.push_back({"point-note", {me[t]}, {mc[t]}, std::string(to_string(f.status[t]))});
    }
  }
  for (std::size_t i = 0; i < f.icers.size(); ++i) {
    const std::size_t x = f.path[i];
    const std::size_t y = f.path[i + 1];
    spec.annotations.push_back({"segment-label",
                                {(me[x] + me[y]) / 2},
                                {(mc[x] + mc[y]) / 2},
                                "ICER " + number(f.icers[i])});
  }
  spec.legend = LegendPosition::bottom_right;
  apply(spec, options);
  return spec;
}

PlotSpec info_rank_spec(const InfoRankResult& rank, const PlotOptions& options) {
  PlotSpec spec;
  spec.kind = PlotKind::info_rank;
  spec.title = fmt::format("Info-rank plot, k = {}", number(rank.k));
  spec.x_axis = unit_axis("Proportion of EVPI");
  spec.y_axis = Axis{"Parameter", -0.5, static_cast<double>(rank.entries.size()) - 0.5, {}};
  if (rank.entries.empty()) spec.y_axis.max = 0.5;
  Series bars;
  bars.type = SeriesType::bars;
  bars.label = "EVPPI / EVPI";
  bars.in_legend = false;
  const std::size_t m = rank.entries.size();
  spec.y_axis.categories.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    // the largest share on top
    const std::size_t pos = m - 1 - i;
    bars.x.push_back(rank.entries[i].proportion);
    bars.y.push_back(static_cast<double>(pos));
    spec.y_axis.categories[pos] = rank.entries[i].param;
  }
  spec.series.push_back(std::move(bars));
  spec.legend = LegendPosition::none;
  apply(spec, options);
  return spec;
}

PlotSpec grid_spec(const Analysis& a, double k, const PlotOptions& options) {
  PlotSpec spec;
  spec.kind = PlotKind::grid;
  spec.title = "Cost-effectiveness overview";
  spec.x_axis = unit_axis("");
  spec.y_axis = unit_axis("");
  spec.legend = LegendPosition::none;
  spec.panels.push_back(ceplane_spec(a, std::nullopt, k, options));
  spec.panels.push_back(eib_spec(a, options));
  spec.panels.push_back(ceac_spec(a, options));
  spec.panels.push_back(evi_spec(a, options));
  return spec;
}

}  // namespace cevoi
