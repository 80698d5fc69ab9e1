#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "cevoi/analysis.hpp"

namespace cevoi {

// Mutators return a new Analysis; the input is left untouched.

/// Recomputes comparison-indexed statistics only; arm-level blocks are shared.
Analysis set_comparisons(const Analysis& analysis, std::vector<std::size_t> comparisons);

/// Changes the reference arm. If the new reference was a comparator it takes
/// the old reference's place in the comparison list, so applying the inverse
/// swap restores the original configuration.
Analysis set_reference(const Analysis& analysis, std::size_t ref);

/// Rebuilds the grid on [0, kmax] with the current number of grid points.
Analysis set_kmax(const Analysis& analysis, double kmax);

/// Simultaneous comparison of {ref} and the configured comparators.
struct MultiCeResult {
  std::vector<std::size_t> included;  // sorted arm indices
  Matrix p_best;                      // [k][t] over all arms; 0 for excluded arms
  std::vector<std::size_t> best;      // expected-utility argmax among included arms
  std::vector<double> ceaf;           // p_best[k][best[k]]
};

MultiCeResult multi_ce(const Analysis& analysis);

/// Exponential utility of net benefit: (1 - exp(-r b)) / r, and b for r = 0.
/// The exponent is clamped at 700 so very negative benefits saturate instead
/// of overflowing; `saturated` is set when that happens.
double risk_averse_utility(double benefit, double r, bool* saturated = nullptr);

inline constexpr double kMaxRiskExponent = 700.0;

struct RiskAversionScenario {
  double r = 0.0;
  Cube utility;
  Matrix ustar;  // [k][s]
  Cube ib;
  Matrix eib;    // [k][j]
  Matrix vi;     // [k][s]
  std::vector<double> evi;
  std::vector<std::size_t> best;
  bool saturated = false;
};

struct RiskAversionSet {
  std::vector<double> r_values;
  std::vector<RiskAversionScenario> scenarios;
};

RiskAversionSet apply_risk_aversion(const Analysis& analysis, std::vector<double> r_values);

struct MixedStrategy {
  std::vector<double> shares;  // renormalised, one per arm
  std::vector<double> ubar;    // [k]
  Matrix ol;                   // [k][s]
  std::vector<double> evi;     // [k]
};

/// Shares must be non-negative and sum to 1 within 1e-9; they are then
/// renormalised. No shares means a uniform mix over all arms.
MixedStrategy apply_mixed_strategy(const Analysis& analysis,
                                   std::optional<std::vector<double>> shares = std::nullopt);

}  // namespace cevoi
