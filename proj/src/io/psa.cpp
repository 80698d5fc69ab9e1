#include <fmt/format.h>

#include "cevoi/error.hpp"
#include "cevoi/io.hpp"

namespace cevoi::io {

using nlohmann::json;

namespace {

std::vector<std::string> advisories_for(const PsaDataset& d) {
  std::vector<std::string> out;
  if (d.n_sim() < kRecommendedSims) {
    out.push_back(fmt::format(
        "only {} simulations; at least {} are recommended for stable estimates", d.n_sim(),
        kRecommendedSims));
  }
  return out;
}

LoadedPsa finish(CsvTable effects, CsvTable costs, std::optional<std::vector<std::string>> labels) {
  std::vector<std::string> names;
  if (labels) {
    names = std::move(*labels);
  } else if (!effects.header.empty()) {
    names = effects.header;
  } else if (!costs.header.empty()) {
    names = costs.header;
  }
  LoadedPsa out;
  out.dataset = make_dataset(std::move(effects.values), std::move(costs.values), std::move(names));
  out.advisories = advisories_for(out.dataset);
  if (!labels && !effects.header.empty() && !costs.header.empty() &&
      effects.header != costs.header) {
    out.advisories.emplace_back("effects and costs headers differ; labels taken from effects");
  }
  return out;
}

const json& require(const json& doc, const char* key) {
  if (!doc.is_object()) throw ValidationError("expected a JSON object");
  auto it = doc.find(key);
  if (it == doc.end()) throw ValidationError(fmt::format("missing field '{}'", key), key);
  return *it;
}

std::vector<std::string> string_list(const json& v, std::string_view field) {
  if (!v.is_array()) throw ValidationError(fmt::format("'{}' must be an array of strings", field),
                                           std::string(field));
  std::vector<std::string> out;
  for (const auto& s : v) {
    if (!s.is_string()) {
      throw ValidationError(fmt::format("'{}' must be an array of strings", field),
                            std::string(field));
    }
    out.push_back(s.get<std::string>());
  }
  return out;
}

}  // namespace

LoadedPsa psa_from_csv_text(std::string_view effects, std::string_view costs,
                            std::optional<std::vector<std::string>> labels) {
  return finish(parse_csv(effects, "effects"), parse_csv(costs, "costs"), std::move(labels));
}

LoadedPsa load_psa(const std::filesystem::path& effects, const std::filesystem::path& costs,
                   std::optional<std::vector<std::string>> labels) {
  return finish(read_csv(effects), read_csv(costs), std::move(labels));
}

Matrix matrix_from_json(const json& rows, std::string_view field) {
  const std::string f(field);
  if (!rows.is_array()) throw ValidationError(fmt::format("'{}' must be an array of rows", f), f);
  const std::size_t n_rows = rows.size();
  const std::size_t n_cols = n_rows == 0 ? 0 : (rows[0].is_array() ? rows[0].size() : 0);
  Matrix m(n_rows, n_cols);
  for (std::size_t r = 0; r < n_rows; ++r) {
    const json& row = rows[r];
    if (!row.is_array()) {
      throw ValidationError(fmt::format("{}: row {} is not an array", f, r + 1), f);
    }
    if (row.size() != n_cols) {
      throw ValidationError(
          fmt::format("{}: row {} has {} columns, expected {}", f, r + 1, row.size(), n_cols), f);
    }
    for (std::size_t c = 0; c < n_cols; ++c) {
      if (!row[c].is_number()) {
        throw ValidationError(
            fmt::format("{}: row {}, column {}: non-numeric value", f, r + 1, c + 1), f);
      }
      m(r, c) = row[c].get<double>();
    }
  }
  return m;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return rows;
}

LoadedPsa psa_from_json(const json& doc) {
  Matrix e = matrix_from_json(require(doc, "effects"), "effects");
  Matrix c = matrix_from_json(require(doc, "costs"), "costs");
  std::vector<std::string> labels;
  if (auto it = doc.find("labels"); it != doc.end() && !it->is_null()) {
    labels = string_list(*it, "labels");
  }
  LoadedPsa out;
  out.dataset = make_dataset(std::move(e), std::move(c), std::move(labels));
  out.advisories = advisories_for(out.dataset);
  return out;
}

LoadedPsa load_psa_json(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(fmt::format("{}: {}", path.string(), e.what()));
  }
  return psa_from_json(doc);
}

json psa_to_json(const PsaDataset& d) {
  return json{{"effects", matrix_to_json(d.effects)},
              {"costs", matrix_to_json(d.costs)},
              {"labels", d.labels}};
}

RawParameters params_from_csv_text(std::string_view text) {
  CsvTable t = parse_csv(text, "parameters");
  RawParameters out;
  out.names = std::move(t.header);
  if (out.names.empty()) {
    for (std::size_t c = 0; c < t.values.cols(); ++c) out.names.push_back(fmt::format("theta{}", c + 1));
  }
  out.mat = std::move(t.values);
  if (out.mat.rows() < 2) throw ValidationError("parameters: fewer than 2 simulations");
  return out;
}

RawParameters load_params(const std::filesystem::path& path) {
  return params_from_csv_text(read_text(path));
}

RawParameters params_from_json(const json& doc) {
  RawParameters out;
  out.names = string_list(require(doc, "names"), "names");
  out.mat = matrix_from_json(require(doc, "rows"), "rows");
  if (out.mat.rows() > 0 && out.mat.cols() != out.names.size()) {
    throw ValidationError(fmt::format("{} names for {} parameter columns", out.names.size(),
                                      out.mat.cols()),
                          "names");
  }
  if (out.mat.rows() < 2) throw ValidationError("parameters: fewer than 2 simulations", "rows");
  return out;
}

// --- configuration and manifest ----------------------------------------------

AnalysisConfig config_of(const Analysis& a) {
  AnalysisConfig c;
  c.ref = a.ref();
  c.comparisons = a.comparisons();
  c.kmax = a.grid().kmax();
  c.grid_points = a.n_k();
  return c;
}

json config_to_json(const AnalysisConfig& c) {
  json doc{{"ref", c.ref + 1}, {"kmax", c.kmax}, {"grid_points", c.grid_points}};
  if (c.comparisons) {
    json list = json::array();
    for (std::size_t t : *c.comparisons) list.push_back(t + 1);
    doc["comparisons"] = std::move(list);
  } else {
    doc["comparisons"] = nullptr;
  }
  return doc;
}

namespace {

std::size_t one_based(const json& v, const char* field) {
  if (!v.is_number_integer() || v.get<long long>() < 1) {
    throw ValidationError(fmt::format("'{}' must be a positive 1-based index", field), field);
  }
  return static_cast<std::size_t>(v.get<long long>() - 1);
}

}  // namespace

AnalysisConfig config_from_json(const json& doc) {
  AnalysisConfig c;
  c.ref = one_based(require(doc, "ref"), "ref");
  if (auto it = doc.find("comparisons"); it != doc.end() && !it->is_null()) {
    if (!it->is_array()) throw ValidationError("'comparisons' must be an array", "comparisons");
    std::vector<std::size_t> list;
    for (const auto& v : *it) list.push_back(one_based(v, "comparisons"));
    c.comparisons = std::move(list);
  }
  if (auto it = doc.find("kmax"); it != doc.end() && !it->is_null()) {
    if (!it->is_number()) throw ValidationError("'kmax' must be a number", "kmax");
    c.kmax = it->get<double>();
  }
  if (auto it = doc.find("grid_points"); it != doc.end() && !it->is_null()) {
    if (!it->is_number_integer() || it->get<long long>() < 2) {
      throw ValidationError("'grid_points' must be an integer >= 2", "grid_points");
    }
    c.grid_points = it->get<std::size_t>();
  }
  return c;
}

Analysis build_analysis(PsaDataset dataset, const AnalysisConfig& config) {
  WtpGrid grid;
  try {
    grid = WtpGrid::uniform(config.kmax, config.grid_points);
  } catch (const ValidationError& e) {
    throw ValidationError(e.what(), "kmax");
  }
  return new_analysis(std::make_shared<const PsaDataset>(std::move(dataset)), config.ref,
                      config.comparisons, std::move(grid));
}

DatasetManifest manifest_from_json(const json& doc, const std::filesystem::path& base_dir) {
  DatasetManifest m;
  const json& version = require(doc, "version");
  if (!version.is_number_integer() || version.get<int>() != kFormatVersion) {
    throw ValidationError(
        fmt::format("unsupported manifest version {} (expected {})", version.dump(), kFormatVersion),
        "version");
  }
  auto path_of = [&](const char* key) {
    const json& v = require(doc, key);
    if (!v.is_string()) throw ValidationError(fmt::format("'{}' must be a path", key), key);
    std::filesystem::path p = v.get<std::string>();
    return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
  };
  m.effects_path = path_of("effects");
  m.costs_path = path_of("costs");
  if (auto it = doc.find("params"); it != doc.end() && !it->is_null()) m.params_path = path_of("params");
  if (auto it = doc.find("labels"); it != doc.end() && !it->is_null()) {
    m.labels = string_list(*it, "labels");
  }
  m.config = config_from_json(doc);
  return m;
}

json manifest_to_json(const DatasetManifest& m) {
  json doc = config_to_json(m.config);
  doc["version"] = m.version;
  doc["effects"] = m.effects_path.generic_string();
  doc["costs"] = m.costs_path.generic_string();
  doc["params"] = m.params_path ? json(m.params_path->generic_string()) : json(nullptr);
  doc["labels"] = m.labels;
  return doc;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw ValidationError(fmt::format("{}: {}", path.string(), e.what()));
  }
  return manifest_from_json(doc, path.parent_path());
}

OpenedManifest open_manifest(const std::filesystem::path& path) {
  DatasetManifest m = load_manifest(path);
  std::optional<std::vector<std::string>> labels;
  if (!m.labels.empty()) labels = m.labels;
  LoadedPsa psa = load_psa(m.effects_path, m.costs_path, labels);
  std::optional<RawParameters> params;
  if (m.params_path) {
    params = load_params(*m.params_path);
    if (params->mat.rows() != psa.dataset.n_sim()) {
      throw ValidationError(fmt::format("parameters have {} rows but the PSA has {} simulations",
                                        params->mat.rows(), psa.dataset.n_sim()),
                            "params");
    }
  }
  Analysis a = build_analysis(std::move(psa.dataset), m.config);
  return OpenedManifest{std::move(m), std::move(a), std::move(params), std::move(psa.advisories)};
}

}  // namespace cevoi::io
