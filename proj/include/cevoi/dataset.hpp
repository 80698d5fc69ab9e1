#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cevoi/matrix.hpp"

namespace cevoi {

inline constexpr std::size_t kDefaultGridPoints = 501;
inline constexpr double kDefaultKmax = 50000.0;

/// Paired PSA samples: one row per simulation, one column per intervention.
struct PsaDataset {
  Matrix effects;
  Matrix costs;
  std::vector<std::string> labels;

  std::size_t n_sim() const noexcept { return effects.rows(); }
  std::size_t n_int() const noexcept { return effects.cols(); }

  friend bool operator==(const PsaDataset&, const PsaDataset&) = default;
};

/// Throws ValidationError unless the shapes agree, n_sim >= 2, n_int >= 2,
/// every entry is finite and labels are unique and non-empty.
void validate(const PsaDataset& dataset);

/// Validating constructor. Missing labels default to "Intervention i" (1-based).
PsaDataset make_dataset(Matrix effects, Matrix costs, std::vector<std::string> labels = {});

/// Willingness-to-pay grid: strictly increasing, starts at 0, ends at kmax.
class WtpGrid {
 public:
  static WtpGrid uniform(double kmax, std::size_t points = kDefaultGridPoints);
  static WtpGrid from_values(std::vector<double> values);

  const std::vector<double>& values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const noexcept { return values_.size(); }
  double kmax() const { return values_.back(); }

  /// Index of the grid point closest to k (lower index on a tie).
  std::size_t nearest(double k) const;

  friend bool operator==(const WtpGrid&, const WtpGrid&) = default;

 private:
  std::vector<double> values_;
};

}  // namespace cevoi
