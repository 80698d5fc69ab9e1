#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cevoi/analysis.hpp"
#include "cevoi/extensions.hpp"
#include "cevoi/voi.hpp"

namespace cevoi::io {

inline constexpr int kFormatVersion = 1;
inline constexpr std::size_t kRecommendedSims = 1000;

// --- CSV -------------------------------------------------------------------

/// Numeric table with an optional header row.
struct CsvTable {
  std::vector<std::string> header;  // empty when the file has none
  Matrix values;
};

/// Comma-separated values with RFC-4180 quoting. A first row containing any
/// non-numeric cell is taken as the header. Numbers are parsed independently
/// of the locale; empty cells, NA and non-finite values are rejected. Error
/// messages name the 1-based row and column.
CsvTable parse_csv(std::string_view text, std::string_view source = "<input>");
CsvTable read_csv(const std::filesystem::path& path);

/// Shortest round-trip decimal formatting; header quoted only when needed.
std::string write_csv(const Matrix& values, const std::vector<std::string>& header = {});

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

// --- PSA samples and parameters ----------------------------------------------

struct LoadedPsa {
  PsaDataset dataset;
  std::vector<std::string> advisories;
};

/// Effects and costs from two CSV files. Labels come from `labels`, else the
/// effects header, else "Intervention i".
LoadedPsa load_psa(const std::filesystem::path& effects, const std::filesystem::path& costs,
                   std::optional<std::vector<std::string>> labels = std::nullopt);

/// Same, from CSV text already in memory.
LoadedPsa psa_from_csv_text(std::string_view effects, std::string_view costs,
                            std::optional<std::vector<std::string>> labels = std::nullopt);

/// {"effects": [[...], ...], "costs": [[...], ...], "labels": [...]}; one inner
/// array per simulation.
LoadedPsa psa_from_json(const nlohmann::json& doc);
LoadedPsa load_psa_json(const std::filesystem::path& path);
nlohmann::json psa_to_json(const PsaDataset& dataset);

RawParameters load_params(const std::filesystem::path& path);
RawParameters params_from_csv_text(std::string_view text);
/// {"names": [...], "rows": [[...], ...]}
RawParameters params_from_json(const nlohmann::json& doc);

Matrix matrix_from_json(const nlohmann::json& rows, std::string_view field);
nlohmann::json matrix_to_json(const Matrix& m);

// --- Manifest ----------------------------------------------------------------

/// Analysis configuration. Indices are 0-based in memory and 1-based on disk.
struct AnalysisConfig {
  std::size_t ref = 0;
  std::optional<std::vector<std::size_t>> comparisons;
  double kmax = kDefaultKmax;
  std::size_t grid_points = kDefaultGridPoints;

  friend bool operator==(const AnalysisConfig&, const AnalysisConfig&) = default;
};

AnalysisConfig config_of(const Analysis& analysis);
nlohmann::json config_to_json(const AnalysisConfig& config);
/// "ref" is required; the rest fall back to the defaults.
AnalysisConfig config_from_json(const nlohmann::json& doc);

struct DatasetManifest {
  int version = kFormatVersion;
  std::filesystem::path effects_path;
  std::filesystem::path costs_path;
  std::optional<std::filesystem::path> params_path;
  std::vector<std::string> labels;
  AnalysisConfig config;
};

/// Relative paths are resolved against `base_dir`.
DatasetManifest manifest_from_json(const nlohmann::json& doc,
                                   const std::filesystem::path& base_dir = {});
nlohmann::json manifest_to_json(const DatasetManifest& manifest);
DatasetManifest load_manifest(const std::filesystem::path& path);

struct OpenedManifest {
  DatasetManifest manifest;
  Analysis analysis;
  std::optional<RawParameters> params;
  std::vector<std::string> advisories;
};

OpenedManifest open_manifest(const std::filesystem::path& path);

Analysis build_analysis(PsaDataset dataset, const AnalysisConfig& config);

// --- Archive -----------------------------------------------------------------

/// Which extensions are attached to an analysis. Extension results are pure
/// functions of these settings.
struct ExtensionState {
  bool multi_ce = false;
  std::optional<std::vector<double>> risk_aversion;
  std::optional<std::vector<double>> shares;

  friend bool operator==(const ExtensionState&, const ExtensionState&) = default;
};

struct AttachedExtensions {
  std::optional<MultiCeResult> multi;
  std::optional<RiskAversionSet> risk_aversion;
  std::optional<MixedStrategy> mixed;
};

/// {"multice": bool, "riskav": [r...] | null, "shares": [q...] | null}
nlohmann::json extension_state_to_json(const ExtensionState& state);
ExtensionState extension_state_from_json(const nlohmann::json& doc);

AttachedExtensions compute_extensions(const Analysis& analysis, const ExtensionState& state);

/// Canonical JSON of every grid- and comparison-indexed statistic plus the
/// attached extension results. Per-simulation arrays are included on request.
nlohmann::json statistics_json(const Analysis& analysis, const AttachedExtensions& ext,
                               bool per_simulation = false);

/// Hex SHA-256 of the compact dump of `doc`.
std::string sha256_hex(std::string_view bytes);
std::string content_hash(const nlohmann::json& doc);

struct ArchiveOptions {
  bool per_simulation = false;
};

nlohmann::json make_archive(const Analysis& analysis, const ExtensionState& state,
                            const ArchiveOptions& options = {});
void save_archive(const std::filesystem::path& path, const Analysis& analysis,
                  const ExtensionState& state, const ArchiveOptions& options = {});

struct LoadedArchive {
  Analysis analysis;
  ExtensionState state;
  AttachedExtensions extensions;
  /// Hash of the statistics recomputed from the archived inputs.
  std::string statistics_hash;
  /// Tamper and determinism findings; empty for a clean archive.
  std::vector<std::string> warnings;
};

/// Rebuilds the analysis from the archived inputs and configuration, then
/// compares recomputed statistics against the stored ones. Version mismatch
/// throws ValidationError; hash mismatches become warnings.
LoadedArchive archive_from_json(const nlohmann::json& doc);
LoadedArchive load_archive(const std::filesystem::path& path);

}  // namespace cevoi::io
