#include "cevoi/extensions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "cevoi/error.hpp"

namespace cevoi {

Analysis set_comparisons(const Analysis& a, std::vector<std::size_t> comparisons) {
  auto resolved = resolve_comparisons(a.n_int(), a.ref(), comparisons);
  auto cmp = std::make_shared<const ComparisonStatistics>(compute_comparison_statistics(
      a.dataset(), a.arm_statistics().utility, a.ref(), resolved));
  return Analysis::assemble(a.dataset_ptr(), a.ref(), std::move(resolved), a.arm_statistics_ptr(),
                            std::move(cmp));
}

Analysis set_reference(const Analysis& a, std::size_t ref) {
  if (ref >= a.n_int()) {
    throw ValidationError(fmt::format("reference {} out of range (1..{})", ref + 1, a.n_int()),
                          "ref");
  }
  std::vector<std::size_t> comparisons = a.comparisons();
  std::replace(comparisons.begin(), comparisons.end(), ref, a.ref());
  return new_analysis(a.dataset_ptr(), ref, std::move(comparisons), a.grid());
}

Analysis set_kmax(const Analysis& a, double kmax) {
  return new_analysis(a.dataset_ptr(), a.ref(), a.comparisons(),
                      WtpGrid::uniform(kmax, a.n_k()));
}

namespace {

std::size_t restricted_argmax(std::span<const double> values, std::span<const std::size_t> included,
                              std::optional<std::size_t> preferred) {
  std::size_t arg = included.front();
  for (std::size_t t : included) {
    if (values[t] > values[arg]) arg = t;
  }
  if (preferred && values[*preferred] == values[arg]) arg = *preferred;
  return arg;
}

}  // namespace

MultiCeResult multi_ce(const Analysis& a) {
  MultiCeResult r;
  r.included = a.comparisons();
  r.included.push_back(a.ref());
  std::sort(r.included.begin(), r.included.end());

  const auto& u = a.arm_statistics().utility;
  const auto& eu = a.arm_statistics().expected_utility;
  r.p_best = Matrix(a.n_k(), a.n_int());
  r.best.resize(a.n_k());
  r.ceaf.resize(a.n_k());
  const auto n = static_cast<double>(a.n_sim());
  std::vector<std::size_t> wins(a.n_int());
  for (std::size_t k = 0; k < a.n_k(); ++k) {
    std::fill(wins.begin(), wins.end(), 0);
    for (std::size_t s = 0; s < a.n_sim(); ++s) {
      ++wins[restricted_argmax(u.cell(k, s), r.included, std::nullopt)];
    }
    for (std::size_t t : r.included) r.p_best(k, t) = static_cast<double>(wins[t]) / n;
    r.best[k] = restricted_argmax(eu.row(k), r.included, a.ref());
    r.ceaf[k] = r.p_best(k, r.best[k]);
  }
  return r;
}

double risk_averse_utility(double benefit, double r, bool* saturated) {
  if (r == 0.0) return benefit;
  double exponent = -r * benefit;
  if (exponent > kMaxRiskExponent) {
    exponent = kMaxRiskExponent;
    if (saturated) *saturated = true;
  }
  return -std::expm1(exponent) / r;
}

RiskAversionSet apply_risk_aversion(const Analysis& a, std::vector<double> r_values) {
  if (r_values.empty()) throw ValidationError("no risk aversion values given", "riskav");
  for (double r : r_values) {
    if (!std::isfinite(r) || r < 0.0) {
      throw ValidationError(fmt::format("risk aversion must be finite and >= 0, got {}", r),
                            "riskav");
    }
  }
  RiskAversionSet set;
  set.r_values = r_values;
  const auto& base = a.arm_statistics().utility;
  for (double r : r_values) {
    RiskAversionScenario sc;
    sc.r = r;
    sc.utility = Cube(base.n_k(), base.n_sim(), base.n_col());
    for (std::size_t k = 0; k < base.n_k(); ++k) {
      for (std::size_t s = 0; s < base.n_sim(); ++s) {
        for (std::size_t t = 0; t < base.n_col(); ++t) {
          sc.utility.at(k, s, t) = risk_averse_utility(base.at(k, s, t), r, &sc.saturated);
        }
      }
    }
    const Matrix eu = compute_expected_utility(sc.utility);
    sc.best = compute_best(eu, a.ref());
    sc.ustar = compute_Ustar(sc.utility);
    sc.vi = compute_vi(sc.ustar, eu, sc.best);
    sc.evi = compute_EVI(compute_ol(sc.utility, sc.ustar, sc.best));
    sc.ib = compute_IB(sc.utility, a.ref(), a.comparisons());
    sc.eib = compute_EIB(sc.ib);
    set.scenarios.push_back(std::move(sc));
  }
  return set;
}

MixedStrategy apply_mixed_strategy(const Analysis& a, std::optional<std::vector<double>> shares) {
  std::vector<double> q =
      shares.value_or(std::vector<double>(a.n_int(), 1.0 / static_cast<double>(a.n_int())));
  if (q.size() != a.n_int()) {
    throw ValidationError(
        fmt::format("{} market shares given for {} interventions", q.size(), a.n_int()), "shares");
  }
  for (double v : q) {
    if (!std::isfinite(v) || v < 0.0) {
      throw ValidationError(fmt::format("market share must be finite and >= 0, got {}", v),
                            "shares");
    }
  }
  const double total = std::accumulate(q.begin(), q.end(), 0.0);
  if (total == 0.0) throw ValidationError("market shares sum to zero", "shares");
  if (shares && std::fabs(total - 1.0) > 1e-9) {
    throw ValidationError(fmt::format("market shares sum to {}, expected 1", total), "shares");
  }
  for (double& v : q) v /= total;

  const auto& arms = a.arm_statistics();
  MixedStrategy m;
  m.shares = q;
  m.ubar.resize(a.n_k());
  m.ol = Matrix(a.n_k(), a.n_sim());
  for (std::size_t k = 0; k < a.n_k(); ++k) {
    double ubar = 0.0;
    for (std::size_t t = 0; t < a.n_int(); ++t) ubar += q[t] * arms.expected_utility(k, t);
    m.ubar[k] = ubar;
    for (std::size_t s = 0; s < a.n_sim(); ++s) {
      double mix = 0.0;
      for (std::size_t t = 0; t < a.n_int(); ++t) mix += q[t] * arms.utility.at(k, s, t);
      m.ol(k, s) = arms.ustar(k, s) - mix;
    }
  }
  m.evi = compute_EVI(m.ol);
  return m;
}

}  // namespace cevoi
