#include <array>
#include <cmath>

#include <fmt/format.h>

#include "cevoi/render.hpp"

namespace cevoi {

namespace {

constexpr double kWidth = 640;
constexpr double kHeight = 480;
constexpr double kLeft = 72;
constexpr double kRight = 24;
constexpr double kTop = 40;
constexpr double kBottom = 56;

constexpr std::array<const char*, 8> kPalette{"#1b9e77", "#d95f02", "#7570b3", "#e7298a",
                                              "#66a61e", "#e6ab02", "#a6761d", "#666666"};

const char* colour(std::size_t slot) { return kPalette[slot % kPalette.size()]; }

std::string esc(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string num(double v) {
  std::string s = fmt::format("{:.2f}", v);
  if (s == "-0.00") s = "0.00";
  return s;
}

/// Round tick step: 1, 2 or 5 times a power of ten.
double tick_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  const double nice = f < 1.5 ? 1 : f < 3 ? 2 : f < 7 ? 5 : 10;
  return nice * mag;
}

class Frame {
 public:
  Frame(const PlotSpec& spec, double ox, double oy)
      : spec_(spec), x0_(ox + kLeft), y0_(oy + kTop), w_(kWidth - kLeft - kRight),
        h_(kHeight - kTop - kBottom) {}

  double px(double x) const {
    return x0_ + (x - spec_.x_axis.min) / (spec_.x_axis.max - spec_.x_axis.min) * w_;
  }
  double py(double y) const {
    return y0_ + h_ - (y - spec_.y_axis.min) / (spec_.y_axis.max - spec_.y_axis.min) * h_;
  }
  double left() const { return x0_; }
  double top() const { return y0_; }
  double width() const { return w_; }
  double height() const { return h_; }

 private:
  const PlotSpec& spec_;
  double x0_, y0_, w_, h_;
};

void axes(std::string& out, const PlotSpec& spec, const Frame& f) {
  out += fmt::format(R"~(<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#333"/>)~",
                     num(f.left()), num(f.top()), num(f.width()), num(f.height()));
  out += '\n';
  const Axis& xa = spec.x_axis;
  const Axis& ya = spec.y_axis;
  if (xa.categories.empty()) {
    const double step = tick_step(xa.max - xa.min, 5);
    for (double t = std::ceil(xa.min / step) * step; t <= xa.max + step * 1e-9; t += step) {
      const double x = f.px(t);
      out += fmt::format(
          R"~(<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="#333"/><text x="{0}" y="{3}" font-size="11" text-anchor="middle">{4}</text>)~",
          num(x), num(f.top() + f.height()), num(f.top() + f.height() + 4),
          num(f.top() + f.height() + 17), esc(fmt::format("{:.4g}", std::fabs(t) < step * 1e-9 ? 0.0 : t)));
      out += '\n';
    }
  }
  if (ya.categories.empty()) {
    const double step = tick_step(ya.max - ya.min, 5);
    for (double t = std::ceil(ya.min / step) * step; t <= ya.max + step * 1e-9; t += step) {
      const double y = f.py(t);
      out += fmt::format(
          R"~(<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="#333"/><text x="{3}" y="{4}" font-size="11" text-anchor="end">{5}</text>)~",
          num(f.left() - 4), num(y), num(f.left()), num(f.left() - 6), num(y + 4),
          esc(fmt::format("{:.4g}", std::fabs(t) < step * 1e-9 ? 0.0 : t)));
      out += '\n';
    }
  } else {
    for (std::size_t i = 0; i < ya.categories.size(); ++i) {
      out += fmt::format(R"~(<text x="{}" y="{}" font-size="11" text-anchor="end">{}</text>)~",
                         num(f.left() - 6), num(f.py(static_cast<double>(i)) + 4),
                         esc(ya.categories[i]));
      out += '\n';
    }
  }
  out += fmt::format(R"~(<text x="{}" y="{}" font-size="12" text-anchor="middle">{}</text>)~",
                     num(f.left() + f.width() / 2), num(f.top() + f.height() + 40), esc(xa.title));
  out += '\n';
  const double yx = f.left() - 56;
  const double yy = f.top() + f.height() / 2;
  out += fmt::format(
      R"~(<text x="{0}" y="{1}" font-size="12" text-anchor="middle" transform="rotate(-90 {0} {1})">{2}</text>)~",
      num(yx), num(yy), esc(ya.title));
  out += '\n';
}

std::string path_of(const Series& s, const Frame& f) {
  std::string d;
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    if (s.type == SeriesType::step && i > 0) {
      d += fmt::format("L{},{}", num(f.px(s.x[i])), num(f.py(s.y[i - 1])));
    }
    d += fmt::format("{}{},{}", i == 0 ? 'M' : 'L', num(f.px(s.x[i])), num(f.py(s.y[i])));
  }
  return d;
}

void series(std::string& out, const Series& s, const Frame& f, const std::string& clip) {
  const char* col = colour(s.color);
  const char* dash = s.dashed ? R"~( stroke-dasharray="6,4")~" : "";
  switch (s.type) {
    case SeriesType::points:
      out += fmt::format(R"~(<g fill="{}" fill-opacity="0.6" clip-path="url(#{})">)~", col, clip);
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        out += fmt::format(R"~(<circle cx="{}" cy="{}" r="{}"/>)~", num(f.px(s.x[i])), num(f.py(s.y[i])),
                           num(s.marker_size));
      }
      out += "</g>\n";
      break;
    case SeriesType::line:
    case SeriesType::step:
      if (s.x.empty()) break;
      out += fmt::format(R"~(<path d="{}" fill="none" stroke="{}" stroke-width="1.8"{} clip-path="url(#{})"/>)~",
                         path_of(s, f), col, dash, clip);
      out += '\n';
      break;
    case SeriesType::segments: {
      std::string d;
      for (std::size_t i = 0; i + 1 < s.x.size(); i += 2) {
        d += fmt::format("M{},{}L{},{}", num(f.px(s.x[i])), num(f.py(s.y[i])), num(f.px(s.x[i + 1])),
                         num(f.py(s.y[i + 1])));
      }
      if (d.empty()) break;
      out += fmt::format(R"~(<path d="{}" fill="none" stroke="{}" stroke-width="1.4"{} clip-path="url(#{})"/>)~",
                         d, col, dash, clip);
      out += '\n';
      break;
    }
    case SeriesType::bars:
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        const double y = f.py(s.y[i] + 0.35);
        const double h = f.py(s.y[i] - 0.35) - y;
        out += fmt::format(R"~(<rect x="{}" y="{}" width="{}" height="{}" fill="{}"/>)~", num(f.px(0.0)),
                           num(y), num(f.px(s.x[i]) - f.px(0.0)), num(h), col);
        out += '\n';
      }
      break;
    case SeriesType::area: {
      if (s.x.empty()) break;
      std::string d = path_of(s, f);
      d += fmt::format("L{},{}L{},{}Z", num(f.px(s.x.back())), num(f.py(0.0)), num(f.px(s.x.front())),
                       num(f.py(0.0)));
      out += fmt::format(R"~(<path d="{}" fill="{}" fill-opacity="0.25" stroke="none" clip-path="url(#{})"/>)~",
                         d, col, clip);
      out += '\n';
      break;
    }
  }
}

void annotation(std::string& out, const Annotation& a, const PlotSpec& spec, const Frame& f,
                const std::string& clip) {
  const std::string& k = a.kind;
  if (k == "sustainability-area") {
    std::string pts;
    for (std::size_t i = 0; i < a.x.size(); ++i) {
      pts += fmt::format("{}{},{}", i ? " " : "", num(f.px(a.x[i])), num(f.py(a.y[i])));
    }
    out += fmt::format(R"~(<polygon points="{}" fill="#cccccc" fill-opacity="0.35" stroke="none"/>)~", pts);
  } else if (k == "wtp-line" && a.x.size() == 2) {
    // label three quarters along the line, on the sustainability side
    const double lx = f.px(a.x[0] + 0.75 * (a.x[1] - a.x[0]));
    const double ly = f.py(a.y[0] + 0.75 * (a.y[1] - a.y[0]));
    out += fmt::format(
        R"~(<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#555" stroke-dasharray="4,3"/><text x="{}" y="{}" font-size="11">{}</text>)~",
        num(f.px(a.x[0])), num(f.py(a.y[0])), num(f.px(a.x[1])), num(f.py(a.y[1])), num(lx + 6),
        num(ly + 14), esc(a.text));
  } else if (k == "icer-marker" && !a.x.empty()) {
    out += fmt::format(R"~(<circle cx="{}" cy="{}" r="4.5" fill="#d7191c" stroke="#fff"/>)~",
                       num(f.px(a.x[0])), num(f.py(a.y[0])));
  } else if (k == "icer-label") {
    out += fmt::format(R"~(<text x="{}" y="{}" font-size="12" text-anchor="end" fill="#d7191c">{}</text>)~",
                       num(f.left() + f.width() - 6), num(f.top() + 16), esc(a.text));
  } else if (k == "vline" && !a.x.empty()) {
    const double x = f.px(a.x[0]);
    out += fmt::format(
        R"~(<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="#777" stroke-dasharray="3,3" clip-path="url(#{3})"/>)~",
        num(x), num(f.top()), num(f.top() + f.height()), clip);
    if (!a.text.empty()) {
      out += fmt::format(R"~(<text x="{}" y="{}" font-size="10">{}</text>)~", num(x + 3),
                         num(f.top() + 12), esc(a.text));
    }
  } else if (k == "hline" && !a.y.empty()) {
    const double y = f.py(a.y[0]);
    out += fmt::format(
        R"~(<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="#777" stroke-dasharray="3,3" clip-path="url(#{3})"/>)~",
        num(f.left()), num(y), num(f.left() + f.width()), clip);
  } else if ((k == "point-note" || k == "segment-label") && !a.x.empty()) {
    const bool left = k == "segment-label";
    out += fmt::format(R"~(<text x="{}" y="{}" font-size="10"{}>{}</text>)~", num(f.px(a.x[0]) + (left ? -6 : 6)),
                       num(f.py(a.y[0]) + (left ? -6 : 14)), left ? R"~( text-anchor="end")~" : "", esc(a.text));
  } else if ((k == "text" || k == "quadrant") && !a.x.empty()) {
    const bool right = k == "quadrant" && a.x[0] >= spec.x_axis.max;
    const bool bottom = k == "quadrant" && a.y[0] <= spec.y_axis.min;
    const double dx = k == "quadrant" ? (right ? -6 : 6) : 5;
    const double dy = k == "quadrant" ? (bottom ? -6 : 14) : -5;
    out += fmt::format(R"~(<text x="{}" y="{}" font-size="10"{}>{}</text>)~", num(f.px(a.x[0]) + dx),
                       num(f.py(a.y[0]) + dy), right ? R"~( text-anchor="end")~" : "", esc(a.text));
  } else {
    return;
  }
  out += '\n';
}

void legend(std::string& out, const PlotSpec& spec, const Frame& f) {
  if (spec.legend == LegendPosition::none) return;
  std::vector<const Series*> items;
  for (const Series& s : spec.series) {
    if (s.in_legend) items.push_back(&s);
  }
  if (items.empty()) return;
  std::size_t longest = 0;
  for (const Series* s : items) longest = std::max(longest, s->label.size());
  const double w = 34 + 6.2 * static_cast<double>(longest);
  const double h = 8 + 16 * static_cast<double>(items.size());
  const bool right = spec.legend == LegendPosition::top_right || spec.legend == LegendPosition::bottom_right;
  const bool top = spec.legend == LegendPosition::top_right || spec.legend == LegendPosition::top_left;
  const double x = right ? f.left() + f.width() - w - 8 : f.left() + 8;
  const double y = top ? f.top() + (right ? 24 : 8) : f.top() + f.height() - h - 8;
  out += fmt::format(R"~(<g class="legend"><rect x="{}" y="{}" width="{}" height="{}" fill="#fff" fill-opacity="0.85" stroke="#999"/>)~",
                     num(x), num(y), num(w), num(h));
  for (std::size_t i = 0; i < items.size(); ++i) {
    const double ly = y + 14 + 16 * static_cast<double>(i);
    const Series& s = *items[i];
    if (s.type == SeriesType::points) {
      out += fmt::format(R"~(<circle cx="{}" cy="{}" r="3" fill="{}"/>)~", num(x + 14), num(ly - 4), colour(s.color));
    } else if (s.type == SeriesType::area || s.type == SeriesType::bars) {
      out += fmt::format(R"~(<rect x="{}" y="{}" width="16" height="8" fill="{}" fill-opacity="{}"/>)~", num(x + 6),
                         num(ly - 8), colour(s.color), s.type == SeriesType::area ? "0.25" : "1");
    } else {
      out += fmt::format(R"~(<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{}" stroke-width="2"{}/>)~", num(x + 6),
                         num(ly - 4), num(x + 22), num(ly - 4), colour(s.color),
                         s.dashed ? R"~( stroke-dasharray="6,4")~" : "");
    }
    out += fmt::format(R"~(<text x="{}" y="{}" font-size="11">{}</text>)~", num(x + 28), num(ly), esc(s.label));
  }
  out += "</g>\n";
}

void panel(std::string& out, const PlotSpec& spec, double ox, double oy, const std::string& id) {
  const Frame f(spec, ox, oy);
  const std::string clip = "clip-" + id;
  out += fmt::format(R"~(<g id="{}">)~", id);
  out += '\n';
  out += fmt::format(R"~(<clipPath id="{}"><rect x="{}" y="{}" width="{}" height="{}"/></clipPath>)~", clip,
                     num(f.left()), num(f.top()), num(f.width()), num(f.height()));
  out += '\n';
  out += fmt::format(R"~(<text x="{}" y="{}" font-size="14" font-weight="bold" text-anchor="middle">{}</text>)~",
                     num(ox + kWidth / 2), num(oy + 24), esc(spec.title));
  out += '\n';
  for (const Annotation& a : spec.annotations) {
    if (a.kind == "sustainability-area") annotation(out, a, spec, f, clip);
  }
  axes(out, spec, f);
  for (const Series& s : spec.series) series(out, s, f, clip);
  for (const Annotation& a : spec.annotations) {
    if (a.kind != "sustainability-area") annotation(out, a, spec, f, clip);
  }
  legend(out, spec, f);
  out += "</g>\n";
}

}  // namespace

std::string render_svg(const PlotSpec& spec) {
  const bool grid = spec.kind == PlotKind::grid && !spec.panels.empty();
  const std::size_t cols = grid ? 2 : 1;
  const std::size_t rows = grid ? (spec.panels.size() + 1) / 2 : 1;
  const double header = grid ? 32 : 0;
  const double width = kWidth * static_cast<double>(cols);
  const double height = kHeight * static_cast<double>(rows) + header;

  std::string out;
  out += R"~(<?xml version="1.0" encoding="UTF-8"?>)~";
  out += '\n';
  out += fmt::format(
      R"~(<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{0}" height="{1}" viewBox="0 0 {0} {1}" font-family="Helvetica, Arial, sans-serif">)~",
      num(width), num(height));
  out += '\n';
  out += fmt::format("<title>{}</title>\n", esc(spec.title));
  if (!spec.notes.empty()) {
    out += "<desc>";
    for (std::size_t i = 0; i < spec.notes.size(); ++i) out += (i ? "; " : "") + esc(spec.notes[i]);
    out += "</desc>\n";
  }
  out += fmt::format(R"~(<rect width="{}" height="{}" fill="#ffffff"/>)~", num(width), num(height));
  out += '\n';
  if (grid) {
    out += fmt::format(R"~(<text x="{}" y="22" font-size="16" font-weight="bold" text-anchor="middle">{}</text>)~",
                       num(width / 2), esc(spec.title));
    out += '\n';
    for (std::size_t p = 0; p < spec.panels.size(); ++p) {
      panel(out, spec.panels[p], kWidth * static_cast<double>(p % 2),
            header + kHeight * static_cast<double>(p / 2), fmt::format("panel{}", p + 1));
    }
  } else {
    panel(out, spec, 0, 0, "plot");
  }
  out += "</svg>\n";
  return out;
}

}  // namespace cevoi
