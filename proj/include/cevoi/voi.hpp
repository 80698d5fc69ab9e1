#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cevoi/analysis.hpp"

namespace cevoi {

/// Parameter draws as loaded from disk, before cleaning.
struct RawParameters {
  Matrix mat;
  std::vector<std::string> names;
};

enum class DropReason { constant, linear_combination };

std::string_view to_string(DropReason reason);

struct DroppedColumn {
  std::string name;
  std::size_t index = 0;  // 0-based column in the raw matrix
  DropReason reason = DropReason::constant;
  /// Populated for linear combinations when reporting is requested, e.g.
  /// "b = 2*a + 0".
  std::string relation;
};

/// Cleaned parameter matrix: no constant columns, full column rank after
/// centring.
struct ParameterInputs {
  Matrix mat;
  std::vector<std::string> names;
  std::vector<DroppedColumn> dropped;

  std::optional<std::size_t> find(std::string_view name) const;
};

/// Relative singular-value threshold used for rank decisions.
inline constexpr double kRankTolerance = 1e-10;

/// Drops constant columns, then walks the remaining columns left to right and
/// drops any column that lies in the span of the columns kept so far (affine
/// span: columns are centred first). Throws ValidationError when nothing is
/// left.
ParameterInputs create_inputs(const RawParameters& raw, bool report_linear_combinations = false);

enum class EvppiMethod {
  /// Equal-count bins over a single parameter.
  binning,
  /// Local means over the nearest neighbours in standardised parameter space.
  nearest_neighbour,
};

std::string_view to_string(EvppiMethod method);

struct EvppiDiagnostic {
  std::size_t k_index = 0;
  double k = 0.0;
  double raw = 0.0;  // before clamping to [0, evpi]
  /// Bins (binning) or neighbourhood size (nearest_neighbour) selected by
  /// leave-one-out cross-validation.
  std::size_t smoothing = 0;
  double cv_error = 0.0;
};

struct EvppiOptions {
  std::optional<EvppiMethod> method;
  /// Grid indices to estimate at; others are interpolated.
  std::optional<std::vector<std::size_t>> k_subset;
  bool full_grid = false;
  std::size_t thin = 10;
};

struct EvppiResult {
  std::vector<std::string> params;
  std::vector<double> k;
  std::vector<double> evppi;
  std::vector<double> evpi;
  EvppiMethod method = EvppiMethod::binning;
  std::vector<EvppiDiagnostic> diagnostics;
  std::vector<std::string> warnings;
};

/// Below this many simulations the estimate carries a warning.
inline constexpr std::size_t kMinReliableSims = 100;

EvppiResult evppi(const Analysis& analysis, const std::vector<std::string>& params,
                  const ParameterInputs& inputs, const EvppiOptions& options = {});

/// Single-k estimate with no clamping. Columns of `phi` are the selected
/// parameters (n_sim rows).
struct EvppiPoint {
  double value = 0.0;
  std::size_t smoothing = 0;
  double cv_error = 0.0;
};

EvppiPoint estimate_evppi_at(const PsaDataset& dataset, std::size_t ref, double k,
                             const Matrix& phi, EvppiMethod method);

/// Expected value of perfect information at an arbitrary k.
double evpi_at(const PsaDataset& dataset, std::size_t ref, double k);

struct InfoRankEntry {
  std::string param;
  double evppi = 0.0;
  double proportion = 0.0;
};

struct InfoRankResult {
  double k = 0.0;
  double evpi = 0.0;
  std::vector<InfoRankEntry> entries;  // descending proportion, ties by name
};

InfoRankResult info_rank(const Analysis& analysis, const ParameterInputs& inputs, double k);

}  // namespace cevoi
