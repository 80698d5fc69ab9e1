#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "cevoi/error.hpp"
#include "cevoi/extensions.hpp"
#include "cevoi/io.hpp"
#include "cevoi/render.hpp"
#include "cevoi/service.hpp"
#include "cevoi/summary.hpp"
#include "cevoi/voi.hpp"

using namespace cevoi;

namespace {

struct InputOptions {
  std::string manifest;
  std::string effects;
  std::string costs;
  std::string params;
  std::string archive;
  std::vector<std::string> labels;
  std::optional<std::size_t> ref;
  std::vector<std::size_t> comparisons;
  std::optional<double> kmax;
  std::optional<std::size_t> grid_points;
};

struct ExtensionOptions {
  bool multice = false;
  std::vector<double> riskav;
  std::vector<double> shares;
};

struct Loaded {
  Analysis analysis;
  io::ExtensionState state;
  std::optional<RawParameters> params;
};

void add_inputs(CLI::App* cmd, InputOptions& in) {
  cmd->add_option("--manifest", in.manifest, "Dataset manifest (JSON)");
  cmd->add_option("--effects", in.effects, "Effects CSV, one row per simulation");
  cmd->add_option("--costs", in.costs, "Costs CSV, one row per simulation");
  cmd->add_option("--archive", in.archive, "Load the analysis from an archive");
  cmd->add_option("--params", in.params, "Parameter samples (CSV or JSON)");
  cmd->add_option("--labels", in.labels, "Intervention labels")->delimiter(',');
  cmd->add_option("--ref", in.ref, "Reference intervention (1-based)");
  cmd->add_option("--comparisons", in.comparisons, "Comparators (1-based)")->delimiter(',');
  cmd->add_option("--kmax", in.kmax, "Upper end of the willingness-to-pay grid");
  cmd->add_option("--grid-points", in.grid_points, "Number of grid points");
}

void add_extensions(CLI::App* cmd, ExtensionOptions& ext) {
  cmd->add_flag("--multice", ext.multice, "Attach the simultaneous comparison");
  cmd->add_option("--riskav", ext.riskav, "Risk-aversion values r")->delimiter(',');
  cmd->add_option("--shares", ext.shares, "Market shares per intervention")->delimiter(',');
}

void note(const std::vector<std::string>& lines) {
  for (const auto& l : lines) fmt::print(stderr, "note: {}\n", l);
}

RawParameters read_params(const std::string& path) {
  return io::load_params(path);
}

Loaded load(const InputOptions& in, const ExtensionOptions* ext = nullptr) {
  const int sources = !in.manifest.empty() + !in.archive.empty() + (!in.effects.empty() || !in.costs.empty());
  if (sources != 1) {
    throw ValidationError("give one of --manifest, --archive, or --effects with --costs", "input");
  }
  std::optional<Loaded> out;
  if (!in.archive.empty()) {
    io::LoadedArchive arch = io::load_archive(in.archive);
    for (const auto& w : arch.warnings) fmt::print(stderr, "warning: {}\n", w);
    out.emplace(Loaded{std::move(arch.analysis), std::move(arch.state), std::nullopt});
    if (in.ref || !in.comparisons.empty() || in.kmax || in.grid_points) {
      io::AnalysisConfig c = io::config_of(out->analysis);
      if (in.ref) c.ref = *in.ref - 1;
      if (!in.comparisons.empty()) {
        c.comparisons.emplace();
        for (std::size_t t : in.comparisons) c.comparisons->push_back(t - 1);
      } else if (in.ref) {
        c.comparisons.reset();
      }
      if (in.kmax) c.kmax = *in.kmax;
      if (in.grid_points) c.grid_points = *in.grid_points;
      out->analysis = io::build_analysis(out->analysis.dataset(), c);
    }
  } else {
    io::AnalysisConfig config;
    std::optional<std::vector<std::string>> labels;
    if (!in.labels.empty()) labels = in.labels;
    io::LoadedPsa psa;
    std::optional<RawParameters> params;
    if (!in.manifest.empty()) {
      const io::DatasetManifest m = io::load_manifest(in.manifest);
      config = m.config;
      if (!labels && !m.labels.empty()) labels = m.labels;
      psa = io::load_psa(m.effects_path, m.costs_path, labels);
      if (m.params_path) params = read_params(m.params_path->string());
    } else {
      if (in.effects.empty() || in.costs.empty()) {
        throw ValidationError("--effects and --costs must be given together", "input");
      }
      psa = io::load_psa(in.effects, in.costs, labels);
    }
    note(psa.advisories);
    if (in.ref) {
      if (*in.ref < 1) throw ValidationError("--ref is 1-based", "ref");
      config.ref = *in.ref - 1;
      config.comparisons.reset();
    }
    if (!in.comparisons.empty()) {
      config.comparisons.emplace();
      for (std::size_t t : in.comparisons) {
        if (t < 1) throw ValidationError("--comparisons are 1-based", "comparisons");
        config.comparisons->push_back(t - 1);
      }
    }
    if (in.kmax) config.kmax = *in.kmax;
    if (in.grid_points) config.grid_points = *in.grid_points;
    out.emplace(Loaded{io::build_analysis(std::move(psa.dataset), config), {}, std::move(params)});
  }
  if (!in.params.empty()) out->params = read_params(in.params);
  if (out->params && out->params->mat.rows() != out->analysis.n_sim()) {
    throw ValidationError(fmt::format("parameters have {} rows but the PSA has {} simulations",
                                      out->params->mat.rows(), out->analysis.n_sim()),
                          "params");
  }
  if (ext) {
    if (ext->multice) out->state.multi_ce = true;
    if (!ext->riskav.empty()) out->state.risk_aversion = ext->riskav;
    if (!ext->shares.empty()) out->state.shares = ext->shares;
  }
  return std::move(*out);
}

ParameterInputs require_inputs(const Loaded& l) {
  if (!l.params) throw ValidationError("parameter samples are needed (--params or manifest 'params')", "params");
  ParameterInputs in = create_inputs(*l.params);
  for (const auto& d : in.dropped) {
    fmt::print(stderr, "note: dropped {} ({}{})\n", d.name, to_string(d.reason),
               d.relation.empty() ? "" : ": " + d.relation);
  }
  return in;
}

std::vector<PlotKind> parse_kinds(const std::vector<std::string>& names) {
  std::vector<PlotKind> out;
  for (const auto& n : names) {
    auto k = plot_kind_from_string(n);
    if (!k) throw ValidationError(fmt::format("unknown plot kind '{}'", n), "plots");
    out.push_back(*k);
  }
  return out;
}

std::optional<LegendPosition> parse_legend(const std::string& s) {
  if (s.empty()) return std::nullopt;
  auto p = legend_position_from_string(s);
  if (!p) throw ValidationError(fmt::format("unknown legend position '{}'", s), "legend");
  return p;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cost-effectiveness and value-of-information analysis of PSA samples"};
  app.require_subcommand(1);

  InputOptions in;
  ExtensionOptions ext;
  double wtp = 0.0;
  std::optional<double> opt_wtp;
  std::size_t rows = 0;
  std::string out;
  std::vector<std::string> plot_names;
  std::string legend;
  std::string format = "svg";
  std::optional<std::size_t> comparison;
  std::string title = ReportOptions{}.title;
  std::vector<std::string> select;
  std::string method;
  bool full_grid = false;
  bool per_simulation = false;
  bool report_linear = false;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string archive_path;

  auto* summary_cmd = app.add_subcommand("summary", "Print the summary block at one willingness to pay");
  add_inputs(summary_cmd, in);
  summary_cmd->add_option("--wtp", wtp, "Willingness to pay k")->required();

  auto* simtable_cmd = app.add_subcommand("simtable", "Per-simulation utilities, IB, OL and VI at one k");
  add_inputs(simtable_cmd, in);
  simtable_cmd->add_option("--wtp", wtp, "Willingness to pay k")->required();
  simtable_cmd->add_option("--rows", rows, "Print only the first N rows");
  simtable_cmd->add_option("--out", out, "Write the full table as CSV");

  auto* plots_cmd = app.add_subcommand("plots", "Render figures as SVG or PlotSpec JSON");
  add_inputs(plots_cmd, in);
  add_extensions(plots_cmd, ext);
  plots_cmd->add_option("--plots", plot_names, "Figures, e.g. ceplane,ceac,eib,evi")->delimiter(',')->required();
  plots_cmd->add_option("--wtp", opt_wtp, "Willingness to pay k");
  plots_cmd->add_option("--out", out, "Output directory")->required();
  plots_cmd->add_option("--comparison", comparison, "Single comparator (1-based arm index)");
  plots_cmd->add_option("--legend", legend, "top-right, top-left, bottom-right, bottom-left, none");
  plots_cmd->add_option("--format", format, "svg or json")->check(CLI::IsMember({"svg", "json"}));

  auto* report_cmd = app.add_subcommand("report", "Write a markdown report with SVG figures");
  add_inputs(report_cmd, in);
  add_extensions(report_cmd, ext);
  report_cmd->add_option("--wtp", wtp, "Willingness to pay k")->required();
  report_cmd->add_option("--out", out, "Output directory")->required();
  report_cmd->add_option("--plots", plot_names, "Figures to include")->delimiter(',');
  report_cmd->add_option("--title", title, "Report title");
  report_cmd->add_option("--rows", rows, "Simulation rows in the excerpt (default 6)");
  report_cmd->add_option("--legend", legend, "Legend position for all figures");

  auto* evppi_cmd = app.add_subcommand("evppi", "Expected value of partial perfect information");
  add_inputs(evppi_cmd, in);
  evppi_cmd->add_option("--select", select, "Parameter names")->delimiter(',')->required();
  evppi_cmd->add_option("--method", method, "binning or nearest-neighbour")
      ->check(CLI::IsMember({"binning", "nearest-neighbour"}));
  evppi_cmd->add_flag("--full-grid", full_grid, "Estimate at every grid point");
  evppi_cmd->add_option("--out", out, "Write the result as JSON");

  auto* rank_cmd = app.add_subcommand("info-rank", "Rank parameters by EVPPI share of EVPI");
  add_inputs(rank_cmd, in);
  rank_cmd->add_option("--wtp", wtp, "Willingness to pay k")->required();
  rank_cmd->add_option("--out", out, "Write the info-rank figure as SVG");

  auto* inputs_cmd = app.add_subcommand("inputs", "Screen parameter samples for constant and collinear columns");
  add_inputs(inputs_cmd, in);
  inputs_cmd->add_flag("--report-linear", report_linear, "Describe each dropped linear combination");
  inputs_cmd->add_option("--out", out, "Write the retained columns as CSV");

  auto* archive_cmd = app.add_subcommand("archive", "Save or verify a reproducible archive");
  archive_cmd->require_subcommand(1);
  auto* save_cmd = archive_cmd->add_subcommand("save", "Save inputs, configuration and statistics");
  add_inputs(save_cmd, in);
  add_extensions(save_cmd, ext);
  save_cmd->add_option("--out", out, "Archive file")->required();
  save_cmd->add_flag("--per-simulation", per_simulation, "Include per-simulation arrays");
  auto* check_cmd = archive_cmd->add_subcommand("check", "Recompute and compare against the stored hashes");
  check_cmd->add_option("file", archive_path, "Archive file")->required();

  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP JSON API");
  serve_cmd->add_option("--host", host, "Interface to bind");
  serve_cmd->add_option("--port", port, "Port (0 picks a free one)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (summary_cmd->parsed()) {
      const Loaded l = load(in);
      fmt::print("{}", to_text(summarize(l.analysis, wtp)));
    } else if (simtable_cmd->parsed()) {
      const Loaded l = load(in);
      const SimTable t = sim_table(l.analysis, wtp);
      if (!out.empty()) {
        io::write_text(out, io::write_csv(t.rows, t.columns));
      } else {
        fmt::print("{}", to_text(t, rows));
      }
    } else if (plots_cmd->parsed()) {
      const Loaded l = load(in, &ext);
      const auto kinds = parse_kinds(plot_names);
      PlotOptions opts;
      opts.legend = parse_legend(legend);
      std::optional<std::size_t> position;
      if (comparison) {
        position = l.analysis.comparison_position(*comparison - 1);
        if (*comparison < 1 || !position) {
          throw ValidationError(fmt::format("arm {} is not a configured comparison", *comparison), "comparison");
        }
      }
      const io::AttachedExtensions attached = io::compute_extensions(l.analysis, l.state);
      std::filesystem::create_directories(out);
      for (PlotKind kind : kinds) {
        const bool uses_k = kind == PlotKind::ceplane || kind == PlotKind::ib_density ||
                            kind == PlotKind::contour || kind == PlotKind::contour2 ||
                            kind == PlotKind::grid || kind == PlotKind::info_rank;
        if (uses_k && !opt_wtp) {
          throw ValidationError(fmt::format("--wtp is required for {}", to_string(kind)), "wtp");
        }
        const double k = opt_wtp.value_or(0.0);
        std::vector<NamedSpec> specs;
        if (kind == PlotKind::info_rank) {
          specs.push_back({"info-rank", info_rank_spec(info_rank(l.analysis, require_inputs(l), k), opts)});
        } else {
          specs = build_plots(l.analysis, attached, kind, k, position, opts);
        }
        for (const auto& s : specs) {
          for (const auto& n : s.spec.notes) fmt::print(stderr, "note: {}: {}\n", s.name, n);
          const auto path = std::filesystem::path(out) / (s.name + "." + format);
          io::write_text(path, format == "svg" ? render_svg(s.spec) : to_json(s.spec).dump(2) + "\n");
          fmt::print("{}\n", path.string());
        }
      }
    } else if (report_cmd->parsed()) {
      const Loaded l = load(in, &ext);
      ReportOptions opts;
      opts.k = wtp;
      opts.out_dir = out;
      opts.title = title;
      if (rows > 0) opts.sim_rows = rows;
      if (!plot_names.empty()) opts.plots = parse_kinds(plot_names);
      opts.plot_options.legend = parse_legend(legend);
      if (l.params) opts.inputs = require_inputs(l);
      const ReportDoc doc = make_report(l.analysis, l.state, opts);
      fmt::print("{}\n", doc.path.string());
    } else if (evppi_cmd->parsed()) {
      const Loaded l = load(in);
      const ParameterInputs inputs = require_inputs(l);
      EvppiOptions opts;
      if (method == "binning") opts.method = EvppiMethod::binning;
      if (method == "nearest-neighbour") opts.method = EvppiMethod::nearest_neighbour;
      opts.full_grid = full_grid;
      const EvppiResult r = evppi(l.analysis, select, inputs, opts);
      for (const auto& w : r.warnings) fmt::print(stderr, "warning: {}\n", w);
      if (!out.empty()) {
        nlohmann::json doc{{"params", r.params}, {"method", to_string(r.method)}, {"k", r.k},
                           {"evppi", r.evppi},   {"evpi", r.evpi}};
        io::write_text(out, doc.dump(2) + "\n");
      } else {
        fmt::print("EVPPI of {} ({})\n{:>12} {:>12} {:>12}\n", fmt::join(r.params, ", "), to_string(r.method),
                   "k", "EVPPI", "EVPI");
        for (std::size_t i = 0; i < r.k.size(); ++i) {
          fmt::print("{:>12} {:>12} {:>12}\n", format_significant(r.k[i]), format_significant(r.evppi[i]),
                     format_significant(r.evpi[i]));
        }
      }
    } else if (rank_cmd->parsed()) {
      const Loaded l = load(in);
      const InfoRankResult r = info_rank(l.analysis, require_inputs(l), wtp);
      fmt::print("Info-rank at k = {} (EVPI {})\n", format_significant(r.k), format_significant(r.evpi));
      for (const auto& e : r.entries) {
        fmt::print("{:<20} {:>12} {:>8.3f}\n", e.param, format_significant(e.evppi), e.proportion);
      }
      if (!out.empty()) io::write_text(out, render_svg(info_rank_spec(r)));
    } else if (inputs_cmd->parsed()) {
      const Loaded l = load(in);
      if (!l.params) throw ValidationError("parameter samples are needed (--params)", "params");
      const ParameterInputs r = create_inputs(*l.params, report_linear);
      fmt::print("kept {} of {} columns: {}\n", r.names.size(), l.params->names.size(), fmt::join(r.names, ", "));
      for (const auto& d : r.dropped) {
        fmt::print("dropped {} ({}{})\n", d.name, to_string(d.reason), d.relation.empty() ? "" : ": " + d.relation);
      }
      if (!out.empty()) io::write_text(out, io::write_csv(r.mat, r.names));
    } else if (save_cmd->parsed()) {
      const Loaded l = load(in, &ext);
      io::save_archive(out, l.analysis, l.state, io::ArchiveOptions{per_simulation});
      fmt::print("{}\n", out);
    } else if (check_cmd->parsed()) {
      const io::LoadedArchive arch = io::load_archive(archive_path);
      if (!arch.warnings.empty()) {
        for (const auto& w : arch.warnings) fmt::print(stderr, "warning: {}\n", w);
        return 2;
      }
      fmt::print("ok {}\n", arch.statistics_hash);
    } else if (serve_cmd->parsed()) {
      service::Service svc;
      service::HttpServer server(svc);
      const int bound = server.bind(host, port);
      fmt::print("listening on http://{}:{}\n", host, bound);
      std::fflush(stdout);
      server.listen();
    }
  } catch (const ValidationError& e) {
    if (e.field().empty()) {
      fmt::print(stderr, "error: {}\n", e.what());
    } else {
      fmt::print(stderr, "error: {} [{}]\n", e.what(), e.field());
    }
    return 2;
  } catch (const IoError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 3;
  }
  return 0;
}
