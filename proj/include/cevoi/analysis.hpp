#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "cevoi/dataset.hpp"
#include "cevoi/matrix.hpp"

namespace cevoi {

/// Ratio of mean incremental cost to mean incremental effect for one
/// reference-vs-comparator pair. `value` is empty when the mean incremental
/// effect is exactly zero.
struct Icer {
  double mean_delta_e = 0.0;
  double mean_delta_c = 0.0;
  std::optional<double> value;
  /// Sign of mean_delta_e: +1 means the reference is preferred for k above the
  /// ICER, -1 for k below it, 0 when undefined.
  int direction = 0;

  friend bool operator==(const Icer&, const Icer&) = default;
};

// Building blocks. Cubes are indexed at(k, sim, column); matrices documented
// per function.

/// U(k, s, t) = k * e[s][t] - c[s][t].
Cube compute_U(const PsaDataset& dataset, const WtpGrid& grid);

/// Expected utility per arm, [k][t].
Matrix compute_expected_utility(const Cube& utility);

/// Arm with maximum expected utility at each k. Ties go to the reference arm
/// when it is among the maximisers, otherwise to the lowest index.
std::vector<std::size_t> compute_best(const Matrix& expected_utility, std::size_t ref);

/// Grid values where the optimal arm differs from the one at the previous point.
std::vector<double> compute_kstar(const WtpGrid& grid, std::span<const std::size_t> best);

/// Per-simulation maximum utility, [k][s].
Matrix compute_Ustar(const Cube& utility);

/// Opportunity loss Ustar - U[best], [k][s].
Matrix compute_ol(const Cube& utility, const Matrix& ustar, std::span<const std::size_t> best);

/// Value of information Ustar - max_t mean_s U, [k][s].
Matrix compute_vi(const Matrix& ustar, const Matrix& expected_utility,
                  std::span<const std::size_t> best);

/// Mean of each row of a [k][s] matrix.
std::vector<double> compute_EVI(const Matrix& ol);

/// ib(k, s, j) = U(k, s, ref) - U(k, s, comparisons[j]).
Cube compute_IB(const Cube& utility, std::size_t ref, std::span<const std::size_t> comparisons);

/// Mean of ib over simulations, [k][j].
Matrix compute_EIB(const Cube& ib);

/// Share of simulations with ib strictly positive, [k][j].
Matrix compute_CEAC(const Cube& ib);

/// Per-simulation increments of the reference over each comparator, [s][j].
Matrix compute_delta(const Matrix& values, std::size_t ref, std::span<const std::size_t> comparisons);

std::vector<Icer> compute_ICER(const Matrix& delta_e, const Matrix& delta_c);

/// Statistics that depend only on the dataset, the grid and the utility
/// function (plus the reference arm, through tie-breaking).
struct ArmStatistics {
  WtpGrid grid;
  Cube utility;
  Matrix expected_utility;  // [k][t]
  std::vector<std::size_t> best;
  std::vector<double> kstar;
  Matrix ustar;  // [k][s]
  Matrix ol;     // [k][s]
  Matrix vi;     // [k][s]
  std::vector<double> evi;
};

ArmStatistics compute_arm_statistics(Cube utility, WtpGrid grid, std::size_t ref);

/// Statistics indexed by comparison.
struct ComparisonStatistics {
  Cube ib;
  Matrix eib;      // [k][j]
  Matrix ceac;     // [k][j]
  Matrix delta_e;  // [s][j]
  Matrix delta_c;  // [s][j]
  std::vector<Icer> icer;
};

ComparisonStatistics compute_comparison_statistics(const PsaDataset& dataset, const Cube& utility,
                                                   std::size_t ref,
                                                   std::span<const std::size_t> comparisons);

/// Immutable result of post-processing a PSA dataset. Indices are 0-based.
/// Copies share the underlying statistics.
class Analysis {
 public:
  const PsaDataset& dataset() const noexcept { return *dataset_; }
  const std::shared_ptr<const PsaDataset>& dataset_ptr() const noexcept { return dataset_; }
  std::size_t ref() const noexcept { return ref_; }
  const std::vector<std::size_t>& comparisons() const noexcept { return comparisons_; }
  const WtpGrid& grid() const noexcept { return arms_->grid; }

  std::size_t n_sim() const noexcept { return dataset_->n_sim(); }
  std::size_t n_int() const noexcept { return dataset_->n_int(); }
  std::size_t n_k() const noexcept { return arms_->grid.size(); }
  std::size_t n_comparisons() const noexcept { return comparisons_.size(); }

  double U(std::size_t s, std::size_t k, std::size_t t) const { return arms_->utility.at(k, s, t); }
  double Ustar(std::size_t s, std::size_t k) const { return arms_->ustar(k, s); }
  double expected_utility(std::size_t k, std::size_t t) const {
    return arms_->expected_utility(k, t);
  }
  std::size_t best(std::size_t k) const { return arms_->best[k]; }
  const std::vector<double>& kstar() const noexcept { return arms_->kstar; }
  double ol(std::size_t s, std::size_t k) const { return arms_->ol(k, s); }
  double vi(std::size_t s, std::size_t k) const { return arms_->vi(k, s); }
  double evi(std::size_t k) const { return arms_->evi[k]; }
  const std::vector<double>& evi() const noexcept { return arms_->evi; }

  double ib(std::size_t s, std::size_t k, std::size_t j) const { return cmp_->ib.at(k, s, j); }
  double eib(std::size_t k, std::size_t j) const { return cmp_->eib(k, j); }
  double ceac(std::size_t k, std::size_t j) const { return cmp_->ceac(k, j); }
  const Icer& icer(std::size_t j) const { return cmp_->icer[j]; }
  double delta_e(std::size_t s, std::size_t j) const { return cmp_->delta_e(s, j); }
  double delta_c(std::size_t s, std::size_t j) const { return cmp_->delta_c(s, j); }

  const ArmStatistics& arm_statistics() const noexcept { return *arms_; }
  const ComparisonStatistics& comparison_statistics() const noexcept { return *cmp_; }
  const std::shared_ptr<const ArmStatistics>& arm_statistics_ptr() const noexcept { return arms_; }

  /// Position of arm `t` in comparisons(), if configured.
  std::optional<std::size_t> comparison_position(std::size_t t) const;

  /// Assemble from precomputed blocks; validates index invariants.
  static Analysis assemble(std::shared_ptr<const PsaDataset> dataset, std::size_t ref,
                           std::vector<std::size_t> comparisons,
                           std::shared_ptr<const ArmStatistics> arms,
                           std::shared_ptr<const ComparisonStatistics> cmp);

 private:
  std::shared_ptr<const PsaDataset> dataset_;
  std::size_t ref_ = 0;
  std::vector<std::size_t> comparisons_;
  std::shared_ptr<const ArmStatistics> arms_;
  std::shared_ptr<const ComparisonStatistics> cmp_;
};

/// Checks ref and comparison indices against n_int; returns the effective
/// comparison list (all non-reference arms in index order when none given).
std::vector<std::size_t> resolve_comparisons(std::size_t n_int, std::size_t ref,
                                             const std::optional<std::vector<std::size_t>>& comparisons);

Analysis new_analysis(PsaDataset dataset, std::size_t ref,
                      std::optional<std::vector<std::size_t>> comparisons = std::nullopt,
                      double kmax = kDefaultKmax,
                      std::optional<std::size_t> grid_points = std::nullopt);

Analysis new_analysis(std::shared_ptr<const PsaDataset> dataset, std::size_t ref,
                      std::optional<std::vector<std::size_t>> comparisons, WtpGrid grid);

}  // namespace cevoi
