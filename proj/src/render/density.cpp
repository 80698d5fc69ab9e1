#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <fmt/format.h>

#include "cevoi/error.hpp"
#include "cevoi/plot.hpp"

namespace cevoi {

namespace {

constexpr std::size_t kContourGrid = 100;

struct Moments {
  double mean = 0.0;
  double sd = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

Moments moments(std::span<const double> v) {
  Moments m;
  const auto n = static_cast<double>(v.size());
  m.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - m.mean) * (x - m.mean);
  m.sd = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  m.lo = *lo;
  m.hi = *hi;
  return m;
}

double scott(double sd, std::size_t n) {
  return 1.06 * sd * std::pow(static_cast<double>(n), -0.2);
}

double gauss(double u) { return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi); }

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = i + 1 == n ? b : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return out;
}

/// Kernel weights K[g][s] = phi((grid[g] - x[s]) / h) / h.
std::vector<double> kernel_matrix(const std::vector<double>& grid, std::span<const double> x, double h) {
  std::vector<double> out(grid.size() * x.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    for (std::size_t s = 0; s < x.size(); ++s) out[g * x.size() + s] = gauss((grid[g] - x[s]) / h) / h;
  }
  return out;
}

struct Segment {
  double x0, y0, x1, y1;
};

/// Marching squares over z[i][j] (i along x, j along y) at threshold t.
std::vector<Segment> march(const std::vector<double>& gx, const std::vector<double>& gy,
                           const std::vector<double>& z, double t) {
  const std::size_t nx = gx.size();
  const std::size_t ny = gy.size();
  auto at = [&](std::size_t i, std::size_t j) { return z[i * ny + j]; };
  std::vector<Segment> out;
  for (std::size_t i = 0; i + 1 < nx; ++i) {
    for (std::size_t j = 0; j + 1 < ny; ++j) {
      // corners counter-clockwise from bottom-left
      const double v[4] = {at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)};
      const double px[4] = {gx[i], gx[i + 1], gx[i + 1], gx[i]};
      const double py[4] = {gy[j], gy[j], gy[j + 1], gy[j + 1]};
      int mask = 0;
      for (int c = 0; c < 4; ++c) {
        if (v[c] >= t) mask |= 1 << c;
      }
      if (mask == 0 || mask == 15) continue;
      // crossing point on edge c (corner c to corner c+1)
      auto edge = [&](int c) {
        const int d = (c + 1) % 4;
        const double w = (t - v[c]) / (v[d] - v[c]);
        return std::pair{px[c] + w * (px[d] - px[c]), py[c] + w * (py[d] - py[c])};
      };
      std::vector<int> crossed;
      for (int c = 0; c < 4; ++c) {
        if (((mask >> c) & 1) != ((mask >> ((c + 1) % 4)) & 1)) crossed.push_back(c);
      }
      auto emit = [&](int a, int b) {
        const auto [x0, y0] = edge(a);
        const auto [x1, y1] = edge(b);
        out.push_back({x0, y0, x1, y1});
      };
      if (crossed.size() == 2) {
        emit(crossed[0], crossed[1]);
      } else {
        // saddle: resolve with the cell centre
        const double centre = (v[0] + v[1] + v[2] + v[3]) / 4.0;
        const bool centre_in = centre >= t;
        const bool c0_in = (mask & 1) != 0;
        if (centre_in == c0_in) {
          emit(0, 1);
          emit(2, 3);
        } else {
          emit(3, 0);
          emit(1, 2);
        }
      }
    }
  }
  return out;
}

/// Density threshold enclosing `level` of the probability mass on the grid.
double hdr_threshold(std::vector<double> z, double level) {
  std::sort(z.begin(), z.end(), std::greater<>());
  const double total = std::accumulate(z.begin(), z.end(), 0.0);
  double acc = 0.0;
  for (double v : z) {
    acc += v;
    if (acc >= level * total) return v;
  }
  return z.back();
}

std::string percent(double level) { return fmt::format("{:g}%", level * 100.0); }

}  // namespace

Density kernel_density(std::span<const double> sample, std::size_t points) {
  if (sample.empty()) throw ValidationError("empty sample");
  const Moments m = moments(sample);
  Density d;
  d.bandwidth = scott(m.sd, sample.size());
  if (!(d.bandwidth > 0.0) || !std::isfinite(d.bandwidth)) {
    d.degenerate = true;
    d.bandwidth = std::max(std::fabs(m.mean) * 1e-3, 1e-3);
  }
  d.x = linspace(m.lo - 3.0 * d.bandwidth, m.hi + 3.0 * d.bandwidth, points);
  d.y.resize(points);
  const double scale = 1.0 / (static_cast<double>(sample.size()) * d.bandwidth);
  for (std::size_t i = 0; i < points; ++i) {
    double sum = 0.0;
    for (double s : sample) sum += gauss((d.x[i] - s) / d.bandwidth);
    d.y[i] = sum * scale;
  }
  return d;
}

std::vector<double> quadrant_proportions(std::span<const double> de, std::span<const double> dc) {
  std::vector<double> q(4, 0.0);
  for (std::size_t s = 0; s < de.size(); ++s) {
    const bool east = de[s] >= 0.0;
    const bool north = dc[s] >= 0.0;
    q[east ? (north ? 0 : 3) : (north ? 1 : 2)] += 1.0;
  }
  for (double& v : q) v /= static_cast<double>(de.size());
  return q;
}

PlotSpec contour_spec(const Analysis& a, std::size_t comparison, const std::vector<double>& levels,
                      bool annotated, double k, const PlotOptions& options) {
  if (comparison >= a.n_comparisons()) {
    throw ValidationError(
        fmt::format("comparison {} out of range (1..{})", comparison + 1, a.n_comparisons()),
        "comparison");
  }
  for (double l : levels) {
    if (!(l > 0.0 && l < 1.0)) {
      throw ValidationError(fmt::format("contour level {} must lie in (0, 1)", l), "levels");
    }
  }
  if (!std::isfinite(k) || k < 0.0) {
    throw ValidationError(fmt::format("willingness to pay {} must be >= 0", k), "k");
  }
  const auto de = a.comparison_statistics().delta_e.col(comparison);
  const auto dc = a.comparison_statistics().delta_c.col(comparison);
  const Moments me = moments(de);
  const Moments mc = moments(dc);
  const std::size_t n = de.size();

  // the plain scatter is the starting point and the fallback
  PlotSpec spec = ceplane_spec(a, comparison, k, options);
  spec.kind = annotated ? PlotKind::contour2 : PlotKind::contour;
  spec.title = "Cost-effectiveness plane contour plot";
  std::erase_if(spec.annotations, [&](const Annotation& an) {
    return an.kind == "sustainability-area" || an.kind == "icer-label" ||
           (!annotated && an.kind == "wtp-line");
  });

  const double hx = scott(me.sd, n);
  const double hy = scott(mc.sd, n);
  if (!(hx > 0.0) || !(hy > 0.0)) {
    spec.notes.emplace_back("contour unavailable: zero-variance sample; scatter only");
  } else {
    const auto gx = linspace(me.lo - 3.0 * hx, me.hi + 3.0 * hx, kContourGrid);
    const auto gy = linspace(mc.lo - 3.0 * hy, mc.hi + 3.0 * hy, kContourGrid);
    const auto kx = kernel_matrix(gx, de, hx);
    const auto ky = kernel_matrix(gy, dc, hy);
    std::vector<double> z(kContourGrid * kContourGrid, 0.0);
    for (std::size_t i = 0; i < kContourGrid; ++i) {
      const double* rx = &kx[i * n];
      for (std::size_t j = 0; j < kContourGrid; ++j) {
        const double* ry = &ky[j * n];
        double sum = 0.0;
        for (std::size_t s = 0; s < n; ++s) sum += rx[s] * ry[s];
        z[i * kContourGrid + j] = sum / static_cast<double>(n);
      }
    }
    std::vector<double> sorted_levels = levels;
    std::sort(sorted_levels.begin(), sorted_levels.end());
    for (std::size_t l = 0; l < sorted_levels.size(); ++l) {
      const double t = hdr_threshold(z, sorted_levels[l]);
      Series s;
      s.type = SeriesType::segments;
      s.label = percent(sorted_levels[l]) + " region";
      s.color = l + 1;
      for (const Segment& seg : march(gx, gy, z, t)) {
        s.x.insert(s.x.end(), {seg.x0, seg.x1});
        s.y.insert(s.y.end(), {seg.y0, seg.y1});
      }
      spec.series.push_back(std::move(s));
    }
    spec.x_axis.min = std::min(spec.x_axis.min, gx.front());
    spec.x_axis.max = std::max(spec.x_axis.max, gx.back());
    spec.y_axis.min = std::min(spec.y_axis.min, gy.front());
    spec.y_axis.max = std::max(spec.y_axis.max, gy.back());
  }

  if (annotated) {
    const auto q = quadrant_proportions(de, dc);
    const auto& xa = spec.x_axis;
    const auto& ya = spec.y_axis;
    const double qx[4] = {xa.max, xa.min, xa.min, xa.max};
    const double qy[4] = {ya.max, ya.max, ya.min, ya.min};
    const char* names[4] = {"NE", "NW", "SW", "SE"};
    for (int i = 0; i < 4; ++i) {
      spec.annotations.push_back(
          {"quadrant", {qx[i]}, {qy[i]}, fmt::format("{}: {:.3f}", names[i], q[static_cast<std::size_t>(i)])});
    }
    // the axes may have grown; recompute the k line
    std::erase_if(spec.annotations, [](const Annotation& an) { return an.kind == "wtp-line"; });
    double x0 = xa.min, x1 = xa.max;
    if (k > 0.0) {
      x0 = std::max(x0, ya.min / k);
      x1 = std::min(x1, ya.max / k);
    }
    if (x0 < x1 && (k > 0.0 || (ya.min <= 0.0 && ya.max >= 0.0))) {
      spec.annotations.push_back({"wtp-line", {x0, x1}, {k * x0, k * x1}, fmt::format("k = {:.6g}", k)});
    }
  }
  return spec;
}

}  // namespace cevoi
