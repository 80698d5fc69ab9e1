#include "cevoi/summary.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "cevoi/error.hpp"

namespace cevoi {

std::string format_significant(double value, int digits) {
  if (value == 0.0) return "0";
  if (std::fabs(value) >= std::pow(10.0, digits)) return fmt::format("{:.0f}", value);
  return fmt::format("{:.{}g}", value, digits);
}

std::size_t snap_to_grid(const Analysis& a, double k) {
  if (!std::isfinite(k) || k < 0.0 || k > a.grid().kmax()) {
    throw ValidationError(
        fmt::format("willingness to pay {} outside [0, {}]", k, format_significant(a.grid().kmax(), 6)),
        "k");
  }
  return a.grid().nearest(k);
}

std::string decision_sentence(const Analysis& a) {
  const auto& labels = a.dataset().labels;
  std::vector<std::pair<std::size_t, double>> segments{{a.best(0), 0.0}};
  for (std::size_t k = 1; k < a.n_k(); ++k) {
    if (a.best(k) != a.best(k - 1)) segments.emplace_back(a.best(k), a.grid()[k]);
  }
  if (segments.size() == 1) {
    return fmt::format("choose {} for all k in [0, {}]", labels[segments[0].first],
                       format_significant(a.grid().kmax(), 6));
  }
  std::string out = "choose ";
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& [arm, from] = segments[i];
    if (i > 0) out += (i + 1 == segments.size()) ? " and " : ", ";
    if (i == 0) {
      out += fmt::format("{} for k < {}", labels[arm], format_significant(segments[1].second, 6));
    } else if (i + 1 == segments.size()) {
      out += fmt::format("{} for k >= {}", labels[arm], format_significant(from, 6));
    } else {
      out += fmt::format("{} for {} <= k < {}", labels[arm], format_significant(from, 6),
                         format_significant(segments[i + 1].second, 6));
    }
  }
  return out;
}

SummaryBlock summarize(const Analysis& a, double k) {
  const std::size_t ki = snap_to_grid(a, k);
  const auto& labels = a.dataset().labels;
  SummaryBlock b;
  b.reference = labels[a.ref()];
  for (std::size_t t : a.comparisons()) b.comparators.push_back(labels[t]);
  b.decision = decision_sentence(a);
  b.requested_k = k;
  b.k = a.grid()[ki];
  b.k_index = ki;
  b.arm_labels = labels;
  for (std::size_t t = 0; t < a.n_int(); ++t) b.expected_utility.push_back(a.expected_utility(ki, t));
  for (std::size_t j = 0; j < a.n_comparisons(); ++j) {
    b.comparisons.push_back({fmt::format("{} vs {}", b.reference, labels[a.comparisons()[j]]),
                             a.eib(ki, j), a.ceac(ki, j), a.icer(j).value});
  }
  b.optimal = labels[a.best(ki)];
  b.evpi = a.evi(ki);
  return b;
}

namespace {

std::size_t max_width(const std::vector<std::string>& items, std::size_t floor = 0) {
  std::size_t w = floor;
  for (const auto& s : items) w = std::max(w, s.size());
  return w;
}

}  // namespace

std::string to_text(const SummaryBlock& b) {
  std::string out = "Cost-effectiveness analysis summary \n\n";
  if (b.comparators.size() == 1) {
    out += fmt::format("Reference intervention:  {}\n", b.reference);
    out += fmt::format("Comparator intervention: {}\n", b.comparators[0]);
  } else {
    out += fmt::format("Reference intervention:     {}\n", b.reference);
    out += fmt::format("Comparator intervention(s): {}\n", b.comparators[0]);
    for (std::size_t i = 1; i < b.comparators.size(); ++i) {
      out += fmt::format("                          : {}\n", b.comparators[i]);
    }
  }
  out += fmt::format("\nOptimal decision: {}\n\n", b.decision);
  const std::string k_text = format_significant(b.k, 6);
  out += fmt::format("Analysis for willingness to pay parameter k = {}\n", k_text);
  if (b.snapped()) {
    out += fmt::format("(requested k = {}, snapped to the nearest grid point)\n",
                       format_significant(b.requested_k, 6));
  }
  out += "\n";

  const std::string eu_header = "Expected utility";
  const std::size_t label_w = max_width(b.arm_labels);
  out += fmt::format("{:<{}} {}\n", "", label_w, eu_header);
  for (std::size_t t = 0; t < b.arm_labels.size(); ++t) {
    out += fmt::format("{:<{}} {:>{}}\n", b.arm_labels[t], label_w,
                       format_significant(b.expected_utility[t]), eu_header.size());
  }
  out += "\n";

  std::vector<std::string> rows, eib, ceac, icer;
  for (const auto& c : b.comparisons) {
    rows.push_back(c.label);
    eib.push_back(format_significant(c.eib));
    ceac.push_back(fmt::format("{:.3f}", c.ceac));
    icer.push_back(c.icer ? format_significant(*c.icer) : "NA");
  }
  const std::size_t row_w = max_width(rows);
  const std::size_t eib_w = max_width(eib, 3);
  const std::size_t ceac_w = max_width(ceac, 4);
  const std::size_t icer_w = max_width(icer, 4);
  out += fmt::format("{:<{}} {:>{}} {:>{}} {:>{}}\n", "", row_w, "EIB", eib_w, "CEAC", ceac_w,
                     "ICER", icer_w);
  for (std::size_t j = 0; j < rows.size(); ++j) {
    out += fmt::format("{:<{}} {:>{}} {:>{}} {:>{}}\n", rows[j], row_w, eib[j], eib_w, ceac[j],
                       ceac_w, icer[j], icer_w);
  }
  out += fmt::format("\nOptimal intervention (max expected utility) for k = {}: {}\n\n", k_text,
                     b.optimal);
  out += fmt::format("EVPI {}\n", format_significant(b.evpi));
  return out;
}

SimTable sim_table(const Analysis& a, double k) {
  const std::size_t ki = snap_to_grid(a, k);
  SimTable table;
  table.k = a.grid()[ki];
  for (std::size_t t = 0; t < a.n_int(); ++t) table.columns.push_back(fmt::format("U{}", t + 1));
  table.columns.push_back("U*");
  for (std::size_t t : a.comparisons()) {
    table.columns.push_back(fmt::format("IB{}_{}", a.ref() + 1, t + 1));
  }
  table.columns.push_back("OL");
  table.columns.push_back("VI");

  table.rows = Matrix(a.n_sim(), table.columns.size());
  for (std::size_t s = 0; s < a.n_sim(); ++s) {
    std::size_t c = 0;
    for (std::size_t t = 0; t < a.n_int(); ++t) table.rows(s, c++) = a.U(s, ki, t);
    table.rows(s, c++) = a.Ustar(s, ki);
    for (std::size_t j = 0; j < a.n_comparisons(); ++j) table.rows(s, c++) = a.ib(s, ki, j);
    table.rows(s, c++) = a.ol(s, ki);
    table.rows(s, c++) = a.vi(s, ki);
  }
  return table;
}

std::string to_text(const SimTable& table, std::size_t max_rows) {
  const std::size_t n = (max_rows == 0) ? table.rows.rows() : std::min(max_rows, table.rows.rows());
  std::vector<std::vector<std::string>> cells(table.columns.size());
  std::vector<std::size_t> widths(table.columns.size());
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    widths[c] = table.columns[c].size();
    for (std::size_t r = 0; r < n; ++r) {
      cells[c].push_back(format_significant(table.rows(r, c), 7));
      widths[c] = std::max(widths[c], cells[c].back().size());
    }
  }
  const std::size_t name_w = fmt::format("{}", n).size();
  std::string out = fmt::format("{:<{}}", "", name_w);
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    out += fmt::format(" {:>{}}", table.columns[c], widths[c]);
  }
  out += "\n";
  for (std::size_t r = 0; r < n; ++r) {
    out += fmt::format("{:<{}}", r + 1, name_w);
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      out += fmt::format(" {:>{}}", cells[c][r], widths[c]);
    }
    out += "\n";
  }
  return out;
}

}  // namespace cevoi
