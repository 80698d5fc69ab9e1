#pragma once

// Naive re-implementation of the per-grid statistics used as an independent
// check. Everything is plain nested vectors and explicit loops; nothing here
// calls into the library.

#include <cstddef>
#include <optional>
#include <vector>

namespace cevoi::testing {

using Vec = std::vector<double>;
using Table = std::vector<Vec>;  // [row][col]

struct NaiveInput {
  Table effects;  // [sim][arm]
  Table costs;
  std::size_t ref = 0;
  std::vector<std::size_t> comparisons;
  Vec grid;
};

struct NaiveAtK {
  Table U;                 // [sim][arm]
  Vec mean_u;              // [arm]
  std::size_t best = 0;
  Vec ustar, ol, vi;       // [sim]
  double evi = 0.0;
  Table ib;                // [sim][comparison]
  Vec eib, ceac;           // [comparison]
  Vec p_best;              // [arm], over {ref} + comparisons
};

struct NaiveResult {
  std::vector<NaiveAtK> at;
  Vec kstar;
  Table delta_e, delta_c;  // [sim][comparison]
  std::vector<std::optional<double>> icer;
};

inline NaiveResult naive_analysis(const NaiveInput& in) {
  const std::size_t n_sim = in.effects.size();
  const std::size_t n_int = in.effects[0].size();
  const std::size_t n_cmp = in.comparisons.size();
  NaiveResult out;

  std::vector<bool> included(n_int, false);
  included[in.ref] = true;
  for (std::size_t t : in.comparisons) included[t] = true;

  for (double k : in.grid) {
    NaiveAtK r;
    r.U.assign(n_sim, Vec(n_int));
    for (std::size_t s = 0; s < n_sim; ++s) {
      for (std::size_t t = 0; t < n_int; ++t) r.U[s][t] = k * in.effects[s][t] - in.costs[s][t];
    }
    r.mean_u.assign(n_int, 0.0);
    for (std::size_t t = 0; t < n_int; ++t) {
      double sum = 0.0;
      for (std::size_t s = 0; s < n_sim; ++s) sum += r.U[s][t];
      r.mean_u[t] = sum / static_cast<double>(n_sim);
    }
    double top = r.mean_u[0];
    for (std::size_t t = 1; t < n_int; ++t) {
      if (r.mean_u[t] > top) top = r.mean_u[t];
    }
    r.best = n_int;
    if (r.mean_u[in.ref] == top) r.best = in.ref;
    for (std::size_t t = 0; t < n_int && r.best == n_int; ++t) {
      if (r.mean_u[t] == top) r.best = t;
    }

    r.ustar.assign(n_sim, 0.0);
    r.ol.assign(n_sim, 0.0);
    r.vi.assign(n_sim, 0.0);
    double ol_sum = 0.0;
    for (std::size_t s = 0; s < n_sim; ++s) {
      double m = r.U[s][0];
      for (std::size_t t = 1; t < n_int; ++t) {
        if (r.U[s][t] > m) m = r.U[s][t];
      }
      r.ustar[s] = m;
      r.ol[s] = m - r.U[s][r.best];
      r.vi[s] = m - top;
      ol_sum += r.ol[s];
    }
    r.evi = ol_sum / static_cast<double>(n_sim);

    r.ib.assign(n_sim, Vec(n_cmp));
    r.eib.assign(n_cmp, 0.0);
    r.ceac.assign(n_cmp, 0.0);
    for (std::size_t j = 0; j < n_cmp; ++j) {
      double sum = 0.0;
      std::size_t pos = 0;
      for (std::size_t s = 0; s < n_sim; ++s) {
        r.ib[s][j] = r.U[s][in.ref] - r.U[s][in.comparisons[j]];
        sum += r.ib[s][j];
        if (r.ib[s][j] > 0.0) ++pos;
      }
      r.eib[j] = sum / static_cast<double>(n_sim);
      r.ceac[j] = static_cast<double>(pos) / static_cast<double>(n_sim);
    }

    r.p_best.assign(n_int, 0.0);
    std::vector<std::size_t> wins(n_int, 0);
    for (std::size_t s = 0; s < n_sim; ++s) {
      std::size_t arg = n_int;
      for (std::size_t t = 0; t < n_int; ++t) {
        if (!included[t]) continue;
        if (arg == n_int || r.U[s][t] > r.U[s][arg]) arg = t;
      }
      ++wins[arg];
    }
    for (std::size_t t = 0; t < n_int; ++t) {
      r.p_best[t] = static_cast<double>(wins[t]) / static_cast<double>(n_sim);
    }
    out.at.push_back(std::move(r));
  }

  for (std::size_t i = 1; i < out.at.size(); ++i) {
    if (out.at[i].best != out.at[i - 1].best) out.kstar.push_back(in.grid[i]);
  }

  out.delta_e.assign(n_sim, Vec(n_cmp));
  out.delta_c.assign(n_sim, Vec(n_cmp));
  for (std::size_t j = 0; j < n_cmp; ++j) {
    double se = 0.0;
    double sc = 0.0;
    for (std::size_t s = 0; s < n_sim; ++s) {
      out.delta_e[s][j] = in.effects[s][in.ref] - in.effects[s][in.comparisons[j]];
      out.delta_c[s][j] = in.costs[s][in.ref] - in.costs[s][in.comparisons[j]];
      se += out.delta_e[s][j];
      sc += out.delta_c[s][j];
    }
    const double me = se / static_cast<double>(n_sim);
    const double mc = sc / static_cast<double>(n_sim);
    out.icer.push_back(me == 0.0 ? std::nullopt : std::optional<double>(mc / me));
  }
  return out;
}

}  // namespace cevoi::testing
