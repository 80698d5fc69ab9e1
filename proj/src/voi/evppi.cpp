#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>

#include <fmt/format.h>

#include "cevoi/error.hpp"
#include "cevoi/voi.hpp"

namespace cevoi {

std::string_view to_string(EvppiMethod method) {
  switch (method) {
    case EvppiMethod::binning:
      return "binning";
    case EvppiMethod::nearest_neighbour:
      return "nearest-neighbour";
  }
  return "unknown";
}

namespace {

using Columns = std::vector<std::vector<double>>;

struct Fit {
  Columns fitted;
  std::size_t smoothing = 0;
  double cv_error = 0.0;
};

/// Conditional-expectation smoother over fixed parameter draws. Candidate
/// smoothing levels are compared by leave-one-out squared error summed over
/// all response columns; ties keep the smoother (coarser) candidate.
class Smoother {
 public:
  virtual ~Smoother() = default;
  virtual Fit fit(const Columns& ys) const = 0;
};

double loo_global(double sum, double y, std::size_t n) {
  return (sum - y) / static_cast<double>(n - 1);
}

class BinningSmoother final : public Smoother {
 public:
  explicit BinningSmoother(std::span<const double> phi) : n_(phi.size()) {
    order_.resize(n_);
    std::iota(order_.begin(), order_.end(), 0);
    std::stable_sort(order_.begin(), order_.end(),
                     [&](std::size_t a, std::size_t b) { return phi[a] < phi[b]; });
    std::vector<double> sorted(n_);
    for (std::size_t i = 0; i < n_; ++i) sorted[i] = phi[order_[i]];

    const auto cap = std::min<std::size_t>(
        100, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n_)))));
    std::vector<std::size_t> counts;
    for (std::size_t b = 1; b < cap; b *= 2) counts.push_back(b);
    counts.push_back(std::max<std::size_t>(cap, 1));
    for (std::size_t b : counts) {
      auto edges = make_edges(sorted, b);
      if (std::none_of(candidates_.begin(), candidates_.end(),
                       [&](const auto& c) { return c == edges; })) {
        candidates_.push_back(std::move(edges));
      }
    }
  }

  Fit fit(const Columns& ys) const override {
    std::size_t chosen = 0;
    double best_err = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < candidates_.size(); ++i) {
      const double err = cv_error(candidates_[i], ys);
      if (err < best_err) {
        best_err = err;
        chosen = i;
      }
    }
    const auto& edges = candidates_[chosen];
    Fit f;
    f.smoothing = edges.size() - 1;
    f.cv_error = best_err;
    for (const auto& y : ys) {
      std::vector<double> g(n_);
      for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
        double sum = 0.0;
        for (std::size_t p = edges[b]; p < edges[b + 1]; ++p) sum += y[order_[p]];
        const double mean = sum / static_cast<double>(edges[b + 1] - edges[b]);
        for (std::size_t p = edges[b]; p < edges[b + 1]; ++p) g[order_[p]] = mean;
      }
      f.fitted.push_back(std::move(g));
    }
    return f;
  }

 private:
  // Bin start positions in sorted order plus n. Boundaries never split a run
  // of tied parameter values.
  std::vector<std::size_t> make_edges(const std::vector<double>& sorted, std::size_t bins) const {
    std::vector<std::size_t> edges{0};
    for (std::size_t b = 1; b < bins; ++b) {
      std::size_t e = (b * n_ + bins / 2) / bins;
      while (e < n_ && e > 0 && sorted[e] == sorted[e - 1]) ++e;
      if (e > edges.back() && e < n_) edges.push_back(e);
    }
    edges.push_back(n_);
    return edges;
  }

  double cv_error(const std::vector<std::size_t>& edges, const Columns& ys) const {
    double err = 0.0;
    for (const auto& y : ys) {
      const double total = std::accumulate(y.begin(), y.end(), 0.0);
      for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
        const std::size_t m = edges[b + 1] - edges[b];
        double sum = 0.0;
        for (std::size_t p = edges[b]; p < edges[b + 1]; ++p) sum += y[order_[p]];
        for (std::size_t p = edges[b]; p < edges[b + 1]; ++p) {
          const double v = y[order_[p]];
          const double pred = m > 1 ? (sum - v) / static_cast<double>(m - 1) : loo_global(total, v, n_);
          err += (v - pred) * (v - pred);
        }
      }
    }
    return err;
  }

  std::size_t n_;
  std::vector<std::size_t> order_;
  std::vector<std::vector<std::size_t>> candidates_;
};

class NeighbourSmoother final : public Smoother {
 public:
  explicit NeighbourSmoother(const Matrix& phi) : n_(phi.rows()) {
    const std::size_t p = phi.cols();
    Matrix z(n_, p);
    for (std::size_t c = 0; c < p; ++c) {
      double mean = 0.0;
      for (std::size_t r = 0; r < n_; ++r) mean += phi(r, c);
      mean /= static_cast<double>(n_);
      double ss = 0.0;
      for (std::size_t r = 0; r < n_; ++r) ss += (phi(r, c) - mean) * (phi(r, c) - mean);
      const double sd = std::sqrt(ss / static_cast<double>(n_ - 1));
      for (std::size_t r = 0; r < n_; ++r) z(r, c) = sd > 0.0 ? (phi(r, c) - mean) / sd : 0.0;
    }

    const auto base = std::max<std::size_t>(
        2, static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n_)))));
    const std::size_t largest = std::min(n_ - 1, 8 * base);
    for (std::size_t m = base; m <= largest; m *= 2) sizes_.push_back(m);
    width_ = sizes_.empty() ? 0 : sizes_.back() - 1;

    // Neighbour lists exclude the point itself; ordered by distance then index.
    neighbours_.resize(n_ * width_);
    std::vector<std::pair<double, std::size_t>> dist(n_ - 1);
    for (std::size_t s = 0; s < n_ && width_ > 0; ++s) {
      std::size_t i = 0;
      for (std::size_t o = 0; o < n_; ++o) {
        if (o == s) continue;
        double d = 0.0;
        for (std::size_t c = 0; c < p; ++c) {
          const double diff = z(s, c) - z(o, c);
          d += diff * diff;
        }
        dist[i++] = {d, o};
      }
      std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(width_ - 1),
                       dist.end());
      std::sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(width_));
      for (std::size_t j = 0; j < width_; ++j) neighbours_[s * width_ + j] = dist[j].second;
    }
  }

  Fit fit(const Columns& ys) const override {
    // Candidate 0 is the global mean (neighbourhood = all points).
    const std::size_t n_cand = sizes_.size() + 1;
    std::vector<double> err(n_cand, 0.0);
    for (const auto& y : ys) {
      const double total = std::accumulate(y.begin(), y.end(), 0.0);
      for (std::size_t s = 0; s < n_; ++s) {
        const double g = loo_global(total, y[s], n_);
        err[0] += (y[s] - g) * (y[s] - g);
        double sum = 0.0;
        std::size_t j = 0;
        for (std::size_t c = 0; c < sizes_.size(); ++c) {
          for (; j < sizes_[c] - 1; ++j) sum += y[neighbours_[s * width_ + j]];
          const double pred = sum / static_cast<double>(sizes_[c] - 1);
          err[c + 1] += (y[s] - pred) * (y[s] - pred);
        }
      }
    }
    std::size_t chosen = 0;
    for (std::size_t c = 1; c < n_cand; ++c) {
      if (err[c] < err[chosen]) chosen = c;
    }

    Fit f;
    f.cv_error = err[chosen];
    f.smoothing = chosen == 0 ? n_ : sizes_[chosen - 1];
    for (const auto& y : ys) {
      std::vector<double> g(n_);
      if (chosen == 0) {
        const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n_);
        std::fill(g.begin(), g.end(), mean);
      } else {
        const std::size_t m = sizes_[chosen - 1];
        for (std::size_t s = 0; s < n_; ++s) {
          double sum = y[s];
          for (std::size_t j = 0; j + 1 < m; ++j) sum += y[neighbours_[s * width_ + j]];
          g[s] = sum / static_cast<double>(m);
        }
      }
      f.fitted.push_back(std::move(g));
    }
    return f;
  }

 private:
  std::size_t n_;
  std::vector<std::size_t> sizes_;
  std::size_t width_ = 0;
  std::vector<std::size_t> neighbours_;
};

std::unique_ptr<Smoother> make_smoother(const Matrix& phi, EvppiMethod method) {
  if (method == EvppiMethod::binning) {
    if (phi.cols() != 1) {
      throw ValidationError("binning estimator needs exactly one parameter", "method");
    }
    const auto column = phi.col(0);
    return std::make_unique<BinningSmoother>(column);
  }
  return std::make_unique<NeighbourSmoother>(phi);
}

/// Incremental benefit of every non-reference arm over the reference at k.
Columns incremental_benefit(const PsaDataset& d, std::size_t ref, double k) {
  Columns ys;
  for (std::size_t t = 0; t < d.n_int(); ++t) {
    if (t == ref) continue;
    std::vector<double> y(d.n_sim());
    for (std::size_t s = 0; s < d.n_sim(); ++s) {
      y[s] = (k * d.effects(s, t) - d.costs(s, t)) - (k * d.effects(s, ref) - d.costs(s, ref));
    }
    ys.push_back(std::move(y));
  }
  return ys;
}

EvppiPoint estimate(const Smoother& smoother, const PsaDataset& d, std::size_t ref, double k) {
  const Columns ys = incremental_benefit(d, ref, k);
  const Fit f = smoother.fit(ys);
  const auto n = static_cast<double>(d.n_sim());
  double with_info = 0.0;
  for (std::size_t s = 0; s < d.n_sim(); ++s) {
    double m = 0.0;
    for (const auto& g : f.fitted) m = std::max(m, g[s]);
    with_info += m;
  }
  with_info /= n;
  double current = 0.0;
  for (const auto& y : ys) {
    current = std::max(current, std::accumulate(y.begin(), y.end(), 0.0) / n);
  }
  return {with_info - current, f.smoothing, f.cv_error};
}

Matrix select_columns(const ParameterInputs& inputs, const std::vector<std::string>& params) {
  if (params.empty()) throw ValidationError("no parameters selected", "params");
  std::vector<std::size_t> idx;
  for (const auto& p : params) {
    auto i = inputs.find(p);
    if (!i) throw ValidationError(fmt::format("unknown parameter '{}'", p), "params");
    if (std::find(idx.begin(), idx.end(), *i) != idx.end()) {
      throw ValidationError(fmt::format("parameter '{}' selected twice", p), "params");
    }
    idx.push_back(*i);
  }
  Matrix phi(inputs.mat.rows(), idx.size());
  for (std::size_t r = 0; r < inputs.mat.rows(); ++r) {
    for (std::size_t c = 0; c < idx.size(); ++c) phi(r, c) = inputs.mat(r, idx[c]);
  }
  return phi;
}

}  // namespace

double evpi_at(const PsaDataset& d, std::size_t ref, double k) {
  const auto n = static_cast<double>(d.n_sim());
  std::vector<double> means(d.n_int(), 0.0);
  for (std::size_t t = 0; t < d.n_int(); ++t) {
    double sum = 0.0;
    for (std::size_t s = 0; s < d.n_sim(); ++s) sum += k * d.effects(s, t) - d.costs(s, t);
    means[t] = sum / n;
  }
  std::size_t best = 0;
  for (std::size_t t = 1; t < d.n_int(); ++t) {
    if (means[t] > means[best]) best = t;
  }
  if (means[ref] == means[best]) best = ref;
  double ol = 0.0;
  for (std::size_t s = 0; s < d.n_sim(); ++s) {
    double ustar = k * d.effects(s, 0) - d.costs(s, 0);
    for (std::size_t t = 1; t < d.n_int(); ++t) ustar = std::max(ustar, k * d.effects(s, t) - d.costs(s, t));
    ol += ustar - (k * d.effects(s, best) - d.costs(s, best));
  }
  return ol / n;
}

EvppiPoint estimate_evppi_at(const PsaDataset& dataset, std::size_t ref, double k,
                             const Matrix& phi, EvppiMethod method) {
  if (phi.rows() != dataset.n_sim()) {
    throw ValidationError(fmt::format("parameter matrix has {} rows but the analysis has {} simulations",
                                      phi.rows(), dataset.n_sim()),
                          "params");
  }
  const auto smoother = make_smoother(phi, method);
  return estimate(*smoother, dataset, ref, k);
}

EvppiResult evppi(const Analysis& a, const std::vector<std::string>& params,
                  const ParameterInputs& inputs, const EvppiOptions& options) {
  if (inputs.mat.rows() != a.n_sim()) {
    throw ValidationError(fmt::format("parameter matrix has {} rows but the analysis has {} simulations",
                                      inputs.mat.rows(), a.n_sim()),
                          "params");
  }
  const Matrix phi = select_columns(inputs, params);
  EvppiResult r;
  r.params = params;
  r.method = options.method.value_or(params.size() == 1 ? EvppiMethod::binning
                                                         : EvppiMethod::nearest_neighbour);
  if (a.n_sim() < kMinReliableSims) {
    r.warnings.push_back(fmt::format(
        "only {} simulations; EVPPI estimates below {} simulations are unreliable", a.n_sim(),
        kMinReliableSims));
  }

  std::vector<std::size_t> eval;
  if (options.full_grid) {
    eval.resize(a.n_k());
    std::iota(eval.begin(), eval.end(), 0);
  } else if (options.k_subset) {
    eval = *options.k_subset;
    for (std::size_t i : eval) {
      if (i >= a.n_k()) {
        throw ValidationError(fmt::format("grid index {} out of range", i + 1), "k_subset");
      }
    }
    std::sort(eval.begin(), eval.end());
    eval.erase(std::unique(eval.begin(), eval.end()), eval.end());
    if (eval.empty()) throw ValidationError("empty k subset", "k_subset");
  } else {
    const std::size_t step = std::max<std::size_t>(1, options.thin);
    for (std::size_t i = 0; i < a.n_k(); i += step) eval.push_back(i);
    if (eval.back() != a.n_k() - 1) eval.push_back(a.n_k() - 1);
  }

  const auto smoother = make_smoother(phi, r.method);
  r.k = a.grid().values();
  r.evpi = a.evi();
  std::vector<double> at_eval;
  for (std::size_t i : eval) {
    const EvppiPoint p = estimate(*smoother, a.dataset(), a.ref(), a.grid()[i]);
    r.diagnostics.push_back({i, a.grid()[i], p.value, p.smoothing, p.cv_error});
    at_eval.push_back(std::clamp(p.value, 0.0, a.evi(i)));
  }

  r.evppi.resize(a.n_k());
  std::size_t seg = 0;
  for (std::size_t i = 0; i < a.n_k(); ++i) {
    double v;
    if (i <= eval.front()) {
      v = at_eval.front();
    } else if (i >= eval.back()) {
      v = at_eval.back();
    } else {
      while (eval[seg + 1] < i) ++seg;
      const double k0 = a.grid()[eval[seg]];
      const double k1 = a.grid()[eval[seg + 1]];
      const double w = (a.grid()[i] - k0) / (k1 - k0);
      v = at_eval[seg] + w * (at_eval[seg + 1] - at_eval[seg]);
      if (eval[seg + 1] == i) v = at_eval[seg + 1];
    }
    r.evppi[i] = std::clamp(v, 0.0, a.evi(i));
  }
  return r;
}

InfoRankResult info_rank(const Analysis& a, const ParameterInputs& inputs, double k) {
  if (!std::isfinite(k) || k < 0.0) {
    throw ValidationError(fmt::format("willingness to pay {} must be >= 0", k), "k");
  }
  if (inputs.mat.rows() != a.n_sim()) {
    throw ValidationError(fmt::format("parameter matrix has {} rows but the analysis has {} simulations",
                                      inputs.mat.rows(), a.n_sim()),
                          "params");
  }
  InfoRankResult r;
  r.k = k;
  r.evpi = evpi_at(a.dataset(), a.ref(), k);
  if (!(r.evpi > 0.0)) throw ValidationError("no decision uncertainty to rank", "k");
  for (std::size_t c = 0; c < inputs.names.size(); ++c) {
    Matrix phi(inputs.mat.rows(), 1);
    for (std::size_t s = 0; s < inputs.mat.rows(); ++s) phi(s, 0) = inputs.mat(s, c);
    const EvppiPoint p = estimate_evppi_at(a.dataset(), a.ref(), k, phi, EvppiMethod::binning);
    const double v = std::clamp(p.value, 0.0, r.evpi);
    r.entries.push_back({inputs.names[c], v, v / r.evpi});
  }
  std::sort(r.entries.begin(), r.entries.end(), [](const auto& x, const auto& y) {
    if (x.proportion != y.proportion) return x.proportion > y.proportion;
    return x.param < y.param;
  });
  return r;
}

}  // namespace cevoi
