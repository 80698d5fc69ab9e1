#include "cevoi/analysis.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "cevoi/error.hpp"

namespace cevoi {

Cube compute_U(const PsaDataset& d, const WtpGrid& grid) {
  Cube u(grid.size(), d.n_sim(), d.n_int());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double wtp = grid[k];
    for (std::size_t s = 0; s < d.n_sim(); ++s) {
      for (std::size_t t = 0; t < d.n_int(); ++t) {
        u.at(k, s, t) = wtp * d.effects(s, t) - d.costs(s, t);
      }
    }
  }
  return u;
}

Matrix compute_expected_utility(const Cube& u) {
  Matrix out(u.n_k(), u.n_col());
  const auto n = static_cast<double>(u.n_sim());
  for (std::size_t k = 0; k < u.n_k(); ++k) {
    for (std::size_t t = 0; t < u.n_col(); ++t) {
      double sum = 0.0;
      for (std::size_t s = 0; s < u.n_sim(); ++s) sum += u.at(k, s, t);
      out(k, t) = sum / n;
    }
  }
  return out;
}

std::vector<std::size_t> compute_best(const Matrix& eu, std::size_t ref) {
  std::vector<std::size_t> best(eu.rows());
  for (std::size_t k = 0; k < eu.rows(); ++k) {
    std::size_t arg = 0;
    for (std::size_t t = 1; t < eu.cols(); ++t) {
      if (eu(k, t) > eu(k, arg)) arg = t;
    }
    if (ref < eu.cols() && eu(k, ref) == eu(k, arg)) arg = ref;
    best[k] = arg;
  }
  return best;
}

std::vector<double> compute_kstar(const WtpGrid& grid, std::span<const std::size_t> best) {
  std::vector<double> out;
  for (std::size_t k = 1; k < best.size(); ++k) {
    if (best[k] != best[k - 1]) out.push_back(grid[k]);
  }
  return out;
}

Matrix compute_Ustar(const Cube& u) {
  Matrix out(u.n_k(), u.n_sim());
  for (std::size_t k = 0; k < u.n_k(); ++k) {
    for (std::size_t s = 0; s < u.n_sim(); ++s) {
      const auto cell = u.cell(k, s);
      out(k, s) = *std::max_element(cell.begin(), cell.end());
    }
  }
  return out;
}

Matrix compute_ol(const Cube& u, const Matrix& ustar, std::span<const std::size_t> best) {
  Matrix out(u.n_k(), u.n_sim());
  for (std::size_t k = 0; k < u.n_k(); ++k) {
    for (std::size_t s = 0; s < u.n_sim(); ++s) out(k, s) = ustar(k, s) - u.at(k, s, best[k]);
  }
  return out;
}

Matrix compute_vi(const Matrix& ustar, const Matrix& eu, std::span<const std::size_t> best) {
  Matrix out(ustar.rows(), ustar.cols());
  for (std::size_t k = 0; k < ustar.rows(); ++k) {
    const double max_mean = eu(k, best[k]);
    for (std::size_t s = 0; s < ustar.cols(); ++s) out(k, s) = ustar(k, s) - max_mean;
  }
  return out;
}

std::vector<double> compute_EVI(const Matrix& ol) {
  std::vector<double> out(ol.rows());
  const auto n = static_cast<double>(ol.cols());
  for (std::size_t k = 0; k < ol.rows(); ++k) {
    double sum = 0.0;
    for (std::size_t s = 0; s < ol.cols(); ++s) sum += ol(k, s);
    out[k] = sum / n;
  }
  return out;
}

Cube compute_IB(const Cube& u, std::size_t ref, std::span<const std::size_t> comparisons) {
  Cube ib(u.n_k(), u.n_sim(), comparisons.size());
  for (std::size_t k = 0; k < u.n_k(); ++k) {
    for (std::size_t s = 0; s < u.n_sim(); ++s) {
      for (std::size_t j = 0; j < comparisons.size(); ++j) {
        ib.at(k, s, j) = u.at(k, s, ref) - u.at(k, s, comparisons[j]);
      }
    }
  }
  return ib;
}

Matrix compute_EIB(const Cube& ib) { return compute_expected_utility(ib); }

Matrix compute_CEAC(const Cube& ib) {
  Matrix out(ib.n_k(), ib.n_col());
  const auto n = static_cast<double>(ib.n_sim());
  for (std::size_t k = 0; k < ib.n_k(); ++k) {
    for (std::size_t j = 0; j < ib.n_col(); ++j) {
      std::size_t positive = 0;
      for (std::size_t s = 0; s < ib.n_sim(); ++s) {
        if (ib.at(k, s, j) > 0.0) ++positive;
      }
      out(k, j) = static_cast<double>(positive) / n;
    }
  }
  return out;
}

Matrix compute_delta(const Matrix& values, std::size_t ref, std::span<const std::size_t> comparisons) {
  Matrix out(values.rows(), comparisons.size());
  for (std::size_t s = 0; s < values.rows(); ++s) {
    for (std::size_t j = 0; j < comparisons.size(); ++j) {
      out(s, j) = values(s, ref) - values(s, comparisons[j]);
    }
  }
  return out;
}

std::vector<Icer> compute_ICER(const Matrix& delta_e, const Matrix& delta_c) {
  std::vector<Icer> out(delta_e.cols());
  const auto n = static_cast<double>(delta_e.rows());
  for (std::size_t j = 0; j < delta_e.cols(); ++j) {
    double se = 0.0;
    double sc = 0.0;
    for (std::size_t s = 0; s < delta_e.rows(); ++s) {
      se += delta_e(s, j);
      sc += delta_c(s, j);
    }
    Icer& icer = out[j];
    icer.mean_delta_e = se / n;
    icer.mean_delta_c = sc / n;
    if (icer.mean_delta_e != 0.0) {
      icer.value = icer.mean_delta_c / icer.mean_delta_e;
      icer.direction = icer.mean_delta_e > 0.0 ? 1 : -1;
    }
  }
  return out;
}

ArmStatistics compute_arm_statistics(Cube utility, WtpGrid grid, std::size_t ref) {
  ArmStatistics a;
  a.grid = std::move(grid);
  a.utility = std::move(utility);
  a.expected_utility = compute_expected_utility(a.utility);
  a.best = compute_best(a.expected_utility, ref);
  a.kstar = compute_kstar(a.grid, a.best);
  a.ustar = compute_Ustar(a.utility);
  a.ol = compute_ol(a.utility, a.ustar, a.best);
  a.vi = compute_vi(a.ustar, a.expected_utility, a.best);
  a.evi = compute_EVI(a.ol);
  return a;
}

ComparisonStatistics compute_comparison_statistics(const PsaDataset& d, const Cube& utility,
                                                   std::size_t ref,
                                                   std::span<const std::size_t> comparisons) {
  ComparisonStatistics c;
  c.ib = compute_IB(utility, ref, comparisons);
  c.eib = compute_EIB(c.ib);
  c.ceac = compute_CEAC(c.ib);
  c.delta_e = compute_delta(d.effects, ref, comparisons);
  c.delta_c = compute_delta(d.costs, ref, comparisons);
  c.icer = compute_ICER(c.delta_e, c.delta_c);
  return c;
}

std::optional<std::size_t> Analysis::comparison_position(std::size_t t) const {
  auto it = std::find(comparisons_.begin(), comparisons_.end(), t);
  if (it == comparisons_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - comparisons_.begin());
}

std::vector<std::size_t> resolve_comparisons(std::size_t n_int, std::size_t ref,
                                             const std::optional<std::vector<std::size_t>>& comparisons) {
  if (ref >= n_int) {
    throw ValidationError(
        fmt::format("reference {} out of range (1..{})", ref + 1, n_int), "ref");
  }
  if (!comparisons) {
    std::vector<std::size_t> all;
    for (std::size_t t = 0; t < n_int; ++t) {
      if (t != ref) all.push_back(t);
    }
    return all;
  }
  if (comparisons->empty()) throw ValidationError("comparison list is empty", "comparisons");
  std::set<std::size_t> seen;
  for (std::size_t t : *comparisons) {
    if (t >= n_int) {
      throw ValidationError(
          fmt::format("comparison {} out of range (1..{})", t + 1, n_int), "comparisons");
    }
    if (t == ref) {
      throw ValidationError(
          fmt::format("comparison list contains the reference {}", ref + 1), "comparisons");
    }
    if (!seen.insert(t).second) {
      throw ValidationError(fmt::format("comparison {} listed twice", t + 1), "comparisons");
    }
  }
  return *comparisons;
}

Analysis Analysis::assemble(std::shared_ptr<const PsaDataset> dataset, std::size_t ref,
                            std::vector<std::size_t> comparisons,
                            std::shared_ptr<const ArmStatistics> arms,
                            std::shared_ptr<const ComparisonStatistics> cmp) {
  Analysis a;
  a.comparisons_ = resolve_comparisons(dataset->n_int(), ref, std::move(comparisons));
  a.dataset_ = std::move(dataset);
  a.ref_ = ref;
  a.arms_ = std::move(arms);
  a.cmp_ = std::move(cmp);
  return a;
}

Analysis new_analysis(std::shared_ptr<const PsaDataset> dataset, std::size_t ref,
                      std::optional<std::vector<std::size_t>> comparisons, WtpGrid grid) {
  validate(*dataset);
  auto cmp_list = resolve_comparisons(dataset->n_int(), ref, comparisons);
  Cube utility = compute_U(*dataset, grid);
  auto arms = std::make_shared<const ArmStatistics>(
      compute_arm_statistics(std::move(utility), std::move(grid), ref));
  auto cmp = std::make_shared<const ComparisonStatistics>(
      compute_comparison_statistics(*dataset, arms->utility, ref, cmp_list));
  return Analysis::assemble(std::move(dataset), ref, std::move(cmp_list), std::move(arms),
                            std::move(cmp));
}

Analysis new_analysis(PsaDataset dataset, std::size_t ref,
                      std::optional<std::vector<std::size_t>> comparisons, double kmax,
                      std::optional<std::size_t> grid_points) {
  return new_analysis(std::make_shared<const PsaDataset>(std::move(dataset)), ref,
                      std::move(comparisons),
                      WtpGrid::uniform(kmax, grid_points.value_or(kDefaultGridPoints)));
}

}  // namespace cevoi
