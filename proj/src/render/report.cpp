#include <system_error>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "cevoi/error.hpp"
#include "cevoi/render.hpp"
#include "cevoi/summary.hpp"

namespace cevoi {

namespace {

std::vector<std::size_t> comparison_positions(const Analysis& a, std::optional<std::size_t> one) {
  if (one) return {*one};
  std::vector<std::size_t> all;
  for (std::size_t j = 0; j < a.n_comparisons(); ++j) all.push_back(j);
  return all;
}

std::string per_comparison_name(std::string_view stem, const Analysis& a, std::size_t j,
                                bool single) {
  if (single) return std::string(stem);
  return fmt::format("{}-{}", stem, a.comparisons()[j] + 1);
}

}  // namespace

std::vector<NamedSpec> build_plots(const Analysis& a, const io::AttachedExtensions& ext,
                                   PlotKind kind, double k, std::optional<std::size_t> comparison,
                                   const PlotOptions& options) {
  std::vector<NamedSpec> out;
  const std::string stem(to_string(kind));
  switch (kind) {
    case PlotKind::ceplane:
      out.push_back({stem, ceplane_spec(a, comparison, k, options)});
      break;
    case PlotKind::ceac:
      out.push_back({stem, ceac_spec(a, options)});
      if (ext.multi) out.push_back({"ceac-simultaneous", ceac_spec(a, *ext.multi, options)});
      break;
    case PlotKind::ceaf:
      out.push_back({stem, ceaf_spec(a, ext.multi ? *ext.multi : multi_ce(a), options)});
      break;
    case PlotKind::ceef:
      out.push_back({stem, ceef_spec(a, options)});
      break;
    case PlotKind::eib:
      out.push_back({stem, eib_spec(a, options)});
      break;
    case PlotKind::evi:
      out.push_back({stem, ext.mixed ? evi_spec(a, *ext.mixed, options) : evi_spec(a, options)});
      if (ext.risk_aversion) {
        RiskAversionPlots pair = risk_aversion_specs(a, *ext.risk_aversion, options);
        out.push_back({"evi-riskav-eib", std::move(pair.eib)});
        out.push_back({"evi-riskav-evi", std::move(pair.evi)});
      }
      break;
    case PlotKind::ib_density:
    case PlotKind::contour:
    case PlotKind::contour2: {
      const auto positions = comparison_positions(a, comparison);
      for (std::size_t j : positions) {
        PlotSpec spec = kind == PlotKind::ib_density
                            ? ib_density_spec(a, j, k, options)
                            : contour_spec(a, j, kDefaultContourLevels, kind == PlotKind::contour2, k,
                                           options);
        out.push_back({per_comparison_name(stem, a, j, positions.size() == 1), std::move(spec)});
      }
      break;
    }
    case PlotKind::info_rank:
      throw ValidationError("info-rank needs parameter inputs", "kind");
    case PlotKind::grid:
      out.push_back({stem, grid_spec(a, k, options)});
      break;
  }
  return out;
}

ReportDoc make_report(const Analysis& a, const io::ExtensionState& state,
                      const ReportOptions& options) {
  const SummaryBlock summary = summarize(a, options.k);
  const double k = summary.k;
  const io::AttachedExtensions ext = io::compute_extensions(a, state);

  const std::filesystem::path dir = options.out_dir.empty() ? "." : options.out_dir;
  std::error_code ec;
  std::filesystem::create_directories(dir / "figures", ec);
  if (ec) {
    throw IoError(fmt::format("cannot create '{}': {}", (dir / "figures").string(), ec.message()));
  }

  ReportDoc doc;
  auto write_figure = [&](const NamedSpec& named) {
    const std::filesystem::path rel = std::filesystem::path("figures") / (named.name + ".svg");
    io::write_text(dir / rel, render_svg(named.spec));
    doc.assets.push_back(rel);
    return fmt::format("![{}]({})\n\n", named.spec.title, rel.generic_string());
  };

  const auto& d = a.dataset();
  std::string md = fmt::format("# {}\n\n", options.title);

  md += "## Dataset\n\n";
  md += fmt::format("- Interventions: {} ({})\n", d.n_int(), fmt::join(d.labels, ", "));
  md += fmt::format("- Simulations: {}\n", d.n_sim());
  md += fmt::format("- Reference: {}\n", d.labels[a.ref()]);
  std::vector<std::string> comps;
  for (std::size_t t : a.comparisons()) comps.push_back(d.labels[t]);
  md += fmt::format("- Comparators: {}\n", fmt::join(comps, ", "));
  md += fmt::format("- Willingness-to-pay grid: 0 to {} in {} points\n\n",
                    format_significant(a.grid().kmax()), a.n_k());

  md += "## Summary\n\n```\n" + to_text(summary) + "```\n\n";

  md += "## Figures\n\n";
  for (PlotKind kind : options.plots) {
    if (kind == PlotKind::info_rank) continue;  // part of the value-of-information section
    for (const NamedSpec& named : build_plots(a, ext, kind, k, std::nullopt, options.plot_options)) {
      md += fmt::format("### {}\n\n", named.spec.title);
      md += write_figure(named);
    }
  }

  const std::size_t shown = std::min(options.sim_rows, a.n_sim());
  md += fmt::format("## Simulation table\n\nFirst {} of {} simulations at k = {}.\n\n```\n", shown,
                    a.n_sim(), format_significant(k));
  md += to_text(sim_table(a, k), options.sim_rows) + "```\n\n";

  if (options.inputs) {
    md += "## Value of information\n\n";
    try {
      const InfoRankResult rank = info_rank(a, *options.inputs, k);
      md += fmt::format("EVPI at k = {}: {}\n\n", format_significant(k), format_significant(rank.evpi));
      md += "| Parameter | EVPPI | Share of EVPI |\n|---|---:|---:|\n";
      for (const auto& e : rank.entries) {
        md += fmt::format("| {} | {} | {:.3f} |\n", e.param, format_significant(e.evppi), e.proportion);
      }
      md += '\n';
      md += write_figure({"info-rank", info_rank_spec(rank, options.plot_options)});
    } catch (const ValidationError& e) {
      md += fmt::format("Not available at k = {}: {}.\n\n", format_significant(k), e.what());
    }
    if (!options.inputs->dropped.empty()) {
      md += "Parameters left out of the analysis:\n\n";
      for (const auto& dc : options.inputs->dropped) {
        md += fmt::format("- {} ({}{})\n", dc.name, to_string(dc.reason),
                          dc.relation.empty() ? "" : ": " + dc.relation);
      }
      md += '\n';
    }
  }

  nlohmann::json config = io::config_to_json(io::config_of(a));
  config["k"] = k;
  config["extensions"] = io::extension_state_to_json(state);
  md += "## Configuration\n\n```json\n" + config.dump(2) + "\n```\n";

  doc.path = dir / "report.md";
  io::write_text(doc.path, md);
  doc.markdown = std::move(md);
  return doc;
}

}  // namespace cevoi
