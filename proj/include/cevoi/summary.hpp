#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "cevoi/analysis.hpp"

namespace cevoi {

struct SummaryComparison {
  std::string label;  // "<reference> vs <comparator>"
  double eib = 0.0;
  double ceac = 0.0;
  std::optional<double> icer;
};

struct SummaryBlock {
  std::string reference;
  std::vector<std::string> comparators;
  /// "choose A for k < 15 and B for k >= 15"
  std::string decision;
  double requested_k = 0.0;
  double k = 0.0;  // snapped grid value
  std::size_t k_index = 0;
  std::vector<std::string> arm_labels;
  std::vector<double> expected_utility;
  std::vector<SummaryComparison> comparisons;
  std::string optimal;
  double evpi = 0.0;

  bool snapped() const noexcept { return requested_k != k; }
};

/// Snaps k to the nearest grid point. Throws ValidationError for k < 0 or
/// k > kmax.
std::size_t snap_to_grid(const Analysis& analysis, double k);

std::string decision_sentence(const Analysis& analysis);

SummaryBlock summarize(const Analysis& analysis, double k);

/// Plain-text rendering laid out as the classic summary block.
std::string to_text(const SummaryBlock& block);

/// Per-simulation table at one k. Columns: U<t> per arm (1-based), "U*",
/// IB<ref>_<comp> per comparison, "OL", "VI".
struct SimTable {
  double k = 0.0;
  std::vector<std::string> columns;
  Matrix rows;  // n_sim x columns.size()
};

SimTable sim_table(const Analysis& analysis, double k);

/// Fixed-width text, R data-frame style with 1-based row names.
/// `max_rows` = 0 prints everything.
std::string to_text(const SimTable& table, std::size_t max_rows = 0);

/// Number formatting shared by the text outputs.
std::string format_significant(double value, int digits = 5);

}  // namespace cevoi
