#pragma once

#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "cevoi/analysis.hpp"
#include "cevoi/dataset.hpp"
#include "oracle.hpp"

namespace cevoi::testing {

/// Three simulations, "Status quo" vs "New"; the reference is "New" (index 1).
inline PsaDataset tiny_dataset() {
  Matrix e(3, 2);
  Matrix c(3, 2);
  const double e1[] = {2, 3, 1};
  const double c1[] = {25, 35, 15};
  for (std::size_t s = 0; s < 3; ++s) {
    e(s, 0) = 1;
    c(s, 0) = 10;
    e(s, 1) = e1[s];
    c(s, 1) = c1[s];
  }
  return make_dataset(std::move(e), std::move(c), {"Status quo", "New"});
}

/// TINY on the grid {0, 5, ..., 30}.
inline Analysis tiny_analysis() {
  return new_analysis(tiny_dataset(), 1, std::nullopt, 30.0, 7);
}

inline std::size_t grid_index(const Analysis& a, double k) { return a.grid().nearest(k); }

/// Random PSA instance with arm-specific means and correlated cost/effect
/// noise. Costs are in the hundreds so that the break-even points land
/// inside [0, kmax] for kmax around 1000.
inline PsaDataset random_dataset(std::mt19937_64& rng, std::size_t n_sim, std::size_t n_int) {
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix e(n_sim, n_int);
  Matrix c(n_sim, n_int);
  std::vector<double> mu_e(n_int), mu_c(n_int), sd_e(n_int), sd_c(n_int);
  for (std::size_t t = 0; t < n_int; ++t) {
    mu_e[t] = 0.5 + u(rng);
    mu_c[t] = 200.0 + 600.0 * u(rng);
    sd_e[t] = 0.05 + 0.3 * u(rng);
    sd_c[t] = 10.0 + 150.0 * u(rng);
  }
  for (std::size_t s = 0; s < n_sim; ++s) {
    for (std::size_t t = 0; t < n_int; ++t) {
      const double a = z(rng);
      const double b = z(rng);
      e(s, t) = mu_e[t] + sd_e[t] * a;
      c(s, t) = mu_c[t] + sd_c[t] * (0.5 * a + 0.866 * b);
    }
  }
  return make_dataset(std::move(e), std::move(c));
}

inline NaiveInput naive_input(const Analysis& a) {
  NaiveInput in;
  const auto& d = a.dataset();
  in.effects.assign(d.n_sim(), Vec(d.n_int()));
  in.costs.assign(d.n_sim(), Vec(d.n_int()));
  for (std::size_t s = 0; s < d.n_sim(); ++s) {
    for (std::size_t t = 0; t < d.n_int(); ++t) {
      in.effects[s][t] = d.effects(s, t);
      in.costs[s][t] = d.costs(s, t);
    }
  }
  in.ref = a.ref();
  in.comparisons = a.comparisons();
  in.grid = a.grid().values();
  return in;
}

}  // namespace cevoi::testing
