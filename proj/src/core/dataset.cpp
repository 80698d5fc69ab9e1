#include "cevoi/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "cevoi/error.hpp"

namespace cevoi {

namespace {

void check_finite(const Matrix& m, const char* what) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (!std::isfinite(m(r, c))) {
        throw ValidationError(
            fmt::format("non-finite {} value at row {}, column {}", what, r + 1, c + 1), what);
      }
    }
  }
}

}  // namespace

void validate(const PsaDataset& d) {
  if (d.effects.rows() != d.costs.rows() || d.effects.cols() != d.costs.cols()) {
    throw ValidationError(fmt::format("effects are {}x{} but costs are {}x{}", d.effects.rows(),
                                      d.effects.cols(), d.costs.rows(), d.costs.cols()),
                          "costs");
  }
  if (d.n_sim() < 2) throw ValidationError("fewer than 2 simulations", "effects");
  if (d.n_int() < 2) throw ValidationError("fewer than 2 interventions", "effects");
  check_finite(d.effects, "effects");
  check_finite(d.costs, "costs");
  if (d.labels.size() != d.n_int()) {
    throw ValidationError(
        fmt::format("{} labels given for {} interventions", d.labels.size(), d.n_int()), "labels");
  }
  std::set<std::string> seen;
  for (const auto& label : d.labels) {
    if (label.empty()) throw ValidationError("empty intervention label", "labels");
    if (!seen.insert(label).second) {
      throw ValidationError(fmt::format("duplicate intervention label '{}'", label), "labels");
    }
  }
}

PsaDataset make_dataset(Matrix effects, Matrix costs, std::vector<std::string> labels) {
  if (labels.empty()) {
    for (std::size_t t = 0; t < effects.cols(); ++t) {
      labels.push_back(fmt::format("Intervention {}", t + 1));
    }
  }
  PsaDataset d{std::move(effects), std::move(costs), std::move(labels)};
  validate(d);
  return d;
}

WtpGrid WtpGrid::uniform(double kmax, std::size_t points) {
  if (!(kmax > 0.0) || !std::isfinite(kmax)) {
    throw ValidationError(fmt::format("kmax must be positive and finite, got {}", kmax), "kmax");
  }
  if (points < 2) throw ValidationError("grid needs at least 2 points", "grid_points");
  WtpGrid g;
  g.values_.resize(points);
  const auto last = static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) {
    g.values_[i] = kmax * static_cast<double>(i) / last;
  }
  g.values_.back() = kmax;
  return g;
}

WtpGrid WtpGrid::from_values(std::vector<double> values) {
  if (values.size() < 2) throw ValidationError("grid needs at least 2 points", "grid");
  if (values.front() != 0.0) throw ValidationError("grid must start at 0", "grid");
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (!std::isfinite(values[i]) || !(values[i] > values[i - 1])) {
      throw ValidationError("grid must be finite and strictly increasing", "grid");
    }
  }
  WtpGrid g;
  g.values_ = std::move(values);
  return g;
}

std::size_t WtpGrid::nearest(double k) const {
  auto it = std::lower_bound(values_.begin(), values_.end(), k);
  if (it == values_.begin()) return 0;
  if (it == values_.end()) return values_.size() - 1;
  const auto hi = static_cast<std::size_t>(it - values_.begin());
  return (k - values_[hi - 1] <= values_[hi] - k) ? hi - 1 : hi;
}

}  // namespace cevoi
