#include <openssl/evp.h>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "cevoi/error.hpp"
#include "cevoi/io.hpp"

namespace cevoi::io {

using nlohmann::json;

namespace {

constexpr const char* kArchiveFormat = "cevoi-archive";

json one_based(std::span<const std::size_t> v) {
  json out = json::array();
  for (std::size_t i : v) out.push_back(i + 1);
  return out;
}

json cube_to_json(const Cube& c) {
  json out = json::array();
  for (std::size_t k = 0; k < c.n_k(); ++k) {
    json sims = json::array();
    for (std::size_t s = 0; s < c.n_sim(); ++s) {
      const auto cell = c.cell(k, s);
      sims.push_back(std::vector<double>(cell.begin(), cell.end()));
    }
    out.push_back(std::move(sims));
  }
  return out;
}

json icer_to_json(const Icer& icer) {
  return json{{"value", icer.value ? json(*icer.value) : json(nullptr)},
              {"mean_delta_e", icer.mean_delta_e},
              {"mean_delta_c", icer.mean_delta_c},
              {"direction", icer.direction}};
}

std::vector<double> column(const Matrix& m, std::size_t c) { return m.col(c); }

std::optional<std::vector<double>> optional_numbers(const json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end() || it->is_null()) return std::nullopt;
  if (!it->is_array()) throw ValidationError(fmt::format("'{}' must be an array", key), key);
  std::vector<double> out;
  for (const auto& v : *it) {
    if (!v.is_number()) throw ValidationError(fmt::format("'{}' must hold numbers", key), key);
    out.push_back(v.get<double>());
  }
  return out;
}

/// Top-level keys whose values differ between two statistics objects.
std::vector<std::string> differing_keys(const json& a, const json& b) {
  std::vector<std::string> out;
  for (const auto& [key, value] : a.items()) {
    auto it = b.find(key);
    if (it == b.end() || *it != value) out.push_back(key);
  }
  for (const auto& [key, value] : b.items()) {
    if (!a.contains(key)) out.push_back(key);
  }
  return out;
}

}  // namespace

json extension_state_to_json(const ExtensionState& s) {
  return json{{"multice", s.multi_ce},
              {"riskav", s.risk_aversion ? json(*s.risk_aversion) : json(nullptr)},
              {"shares", s.shares ? json(*s.shares) : json(nullptr)}};
}

ExtensionState extension_state_from_json(const json& doc) {
  ExtensionState s;
  if (!doc.is_object()) throw ValidationError("'extensions' must be an object", "extensions");
  if (auto it = doc.find("multice"); it != doc.end() && !it->is_null()) {
    if (!it->is_boolean()) throw ValidationError("'multice' must be a boolean", "multice");
    s.multi_ce = it->get<bool>();
  }
  s.risk_aversion = optional_numbers(doc, "riskav");
  s.shares = optional_numbers(doc, "shares");
  return s;
}

AttachedExtensions compute_extensions(const Analysis& a, const ExtensionState& state) {
  AttachedExtensions ext;
  if (state.multi_ce) ext.multi = multi_ce(a);
  if (state.risk_aversion) ext.risk_aversion = apply_risk_aversion(a, *state.risk_aversion);
  if (state.shares) ext.mixed = apply_mixed_strategy(a, *state.shares);
  return ext;
}

json statistics_json(const Analysis& a, const AttachedExtensions& ext, bool per_simulation) {
  const ArmStatistics& arms = a.arm_statistics();
  json doc;
  doc["grid"] = a.grid().values();
  doc["expected_utility"] = matrix_to_json(arms.expected_utility);
  doc["best"] = one_based(arms.best);
  doc["kstar"] = arms.kstar;
  doc["evi"] = arms.evi;

  json cmp = json::array();
  for (std::size_t j = 0; j < a.n_comparisons(); ++j) {
    const ComparisonStatistics& c = a.comparison_statistics();
    cmp.push_back(json{{"comparator", a.comparisons()[j] + 1},
                       {"eib", column(c.eib, j)},
                       {"ceac", column(c.ceac, j)},
                       {"icer", icer_to_json(c.icer[j])}});
  }
  doc["comparisons"] = std::move(cmp);

  if (ext.multi) {
    doc["multi_ce"] = json{{"included", one_based(ext.multi->included)},
                           {"p_best", matrix_to_json(ext.multi->p_best)},
                           {"best", one_based(ext.multi->best)},
                           {"ceaf", ext.multi->ceaf}};
  }
  if (ext.risk_aversion) {
    json list = json::array();
    for (const auto& sc : ext.risk_aversion->scenarios) {
      list.push_back(json{{"r", sc.r},
                          {"eib", matrix_to_json(sc.eib)},
                          {"evi", sc.evi},
                          {"best", one_based(sc.best)},
                          {"saturated", sc.saturated}});
    }
    doc["risk_aversion"] = std::move(list);
  }
  if (ext.mixed) {
    doc["mixed"] = json{{"shares", ext.mixed->shares},
                        {"ubar", ext.mixed->ubar},
                        {"evi", ext.mixed->evi}};
  }

  if (per_simulation) {
    const ComparisonStatistics& c = a.comparison_statistics();
    doc["per_simulation"] = json{{"U", cube_to_json(arms.utility)},
                                 {"Ustar", matrix_to_json(arms.ustar)},
                                 {"ol", matrix_to_json(arms.ol)},
                                 {"vi", matrix_to_json(arms.vi)},
                                 {"ib", cube_to_json(c.ib)},
                                 {"delta_e", matrix_to_json(c.delta_e)},
                                 {"delta_c", matrix_to_json(c.delta_c)}};
  }
  return doc;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw IoError("SHA-256 computation failed");
  }
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::string content_hash(const json& doc) { return sha256_hex(doc.dump()); }

json make_archive(const Analysis& a, const ExtensionState& state, const ArchiveOptions& options) {
  json config = config_to_json(config_of(a));
  config["grid"] = a.grid().values();
  json inputs{{"dataset", psa_to_json(a.dataset())},
              {"config", std::move(config)},
              {"extensions", extension_state_to_json(state)}};
  json stats = statistics_json(a, compute_extensions(a, state), options.per_simulation);
  json doc;
  doc["format"] = kArchiveFormat;
  doc["version"] = kFormatVersion;
  doc["hashes"] = json{{"inputs", content_hash(inputs)}, {"statistics", content_hash(stats)}};
  doc["inputs"] = std::move(inputs);
  doc["statistics"] = std::move(stats);
  return doc;
}

void save_archive(const std::filesystem::path& path, const Analysis& a, const ExtensionState& state,
                  const ArchiveOptions& options) {
  write_text(path, make_archive(a, state, options).dump());
}

LoadedArchive archive_from_json(const json& doc) {
  if (!doc.is_object() || doc.value("format", "") != kArchiveFormat) {
    throw ValidationError("not an analysis archive", "format");
  }
  const json& version = doc.at("version");
  if (!version.is_number_integer() || version.get<int>() != kFormatVersion) {
    throw ValidationError(
        fmt::format("unsupported archive version {} (expected {})", version.dump(), kFormatVersion),
        "version");
  }
  if (!doc.contains("inputs") || !doc.contains("statistics")) {
    throw ValidationError("archive lacks inputs or statistics");
  }
  const json& inputs = doc["inputs"];
  const json& stored = doc["statistics"];
  const json hashes = doc.value("hashes", json::object());

  LoadedArchive out;
  if (hashes.value("inputs", "") != content_hash(inputs)) {
    out.warnings.emplace_back("inputs do not match their recorded hash");
  }
  if (hashes.value("statistics", "") != content_hash(stored)) {
    out.warnings.emplace_back("archived statistics do not match their recorded hash");
  }

  PsaDataset dataset = psa_from_json(inputs.at("dataset")).dataset;
  const json& cfg = inputs.at("config");
  AnalysisConfig config = config_from_json(cfg);
  std::optional<std::vector<double>> grid_values = optional_numbers(cfg, "grid");
  WtpGrid grid = grid_values ? WtpGrid::from_values(std::move(*grid_values))
                             : WtpGrid::uniform(config.kmax, config.grid_points);
  out.analysis = new_analysis(std::make_shared<const PsaDataset>(std::move(dataset)), config.ref,
                              config.comparisons, std::move(grid));
  out.state = extension_state_from_json(inputs.at("extensions"));
  out.extensions = compute_extensions(out.analysis, out.state);

  const json recomputed =
      statistics_json(out.analysis, out.extensions, stored.contains("per_simulation"));
  out.statistics_hash = content_hash(recomputed);
  if (out.statistics_hash != hashes.value("statistics", "")) {
    out.warnings.emplace_back("recomputed statistics do not match the recorded hash");
  }
  if (recomputed != stored) {
    const auto keys = differing_keys(recomputed, stored);
    out.warnings.push_back(fmt::format("archived values differ from recomputation in: {}",
                                       fmt::join(keys, ", ")));
  }
  return out;
}

LoadedArchive load_archive(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw ValidationError(fmt::format("{}: {}", path.string(), e.what()));
  }
  try {
    return archive_from_json(doc);
  } catch (const json::exception& e) {
    throw ValidationError(fmt::format("{}: malformed archive: {}", path.string(), e.what()));
  }
}

}  // namespace cevoi::io
