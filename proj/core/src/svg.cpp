#include "kgicu/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "kgicu/errors.hpp"

namespace kgicu::svg {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

struct Scale {
  double lo = 0.0, hi = 1.0, out_lo = 0.0, out_hi = 1.0;
  double operator()(double v) const {
    const double t = hi == lo ? 0.5 : (v - lo) / (hi - lo);
    return out_lo + t * (out_hi - out_lo);
  }
};

std::vector<double> nice_ticks(double lo, double hi, int want = 6) {
  if (hi <= lo) return {lo};
  const double raw = (hi - lo) / want;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 2.5, 5.0, 10.0}) {
    if (mag * m >= raw) {
      step = mag * m;
      break;
    }
  }
  std::vector<double> ticks;
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-12; v += step)
    ticks.push_back(std::abs(v) < 1e-12 ? 0.0 : v);
  return ticks;
}

// White -> deep blue ramp for heatmap cells.
std::string ramp_color(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const int r = static_cast<int>(255 + t * (8 - 255));
  const int g = static_cast<int>(255 + t * (48 - 255));
  const int b = static_cast<int>(255 + t * (107 - 255));
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace

std::string line_chart(const std::string& title, const std::string& x_label,
                       const std::string& y_label,
                       const std::vector<Series>& series) {
  if (series.empty()) throw ContractError("line_chart: no series");
  const double width = 640, height = 420;
  const double left = 64, right = 24, top = 40, bottom = 48;

  double x_lo = 1e300, x_hi = -1e300, y_lo = 1e300, y_hi = -1e300;
  for (const Series& s : series) {
    if (s.x.size() != s.y.size())
      throw ContractError("line_chart: x/y size mismatch in '" + s.label + "'");
    for (size_t i = 0; i < s.x.size(); ++i) {
      x_lo = std::min(x_lo, s.x[i]);
      x_hi = std::max(x_hi, s.x[i]);
      const double band = s.y_std.empty() ? 0.0 : s.y_std[i];
      y_lo = std::min(y_lo, s.y[i] - band);
      y_hi = std::max(y_hi, s.y[i] + band);
    }
  }
  if (x_lo > x_hi) throw ContractError("line_chart: series are empty");
  if (y_lo == y_hi) {
    y_lo -= 0.5;
    y_hi += 0.5;
  }
  const double pad = 0.04 * (y_hi - y_lo);
  y_lo -= pad;
  y_hi += pad;

  Scale sx = {x_lo, x_hi, left, width - right};
  Scale sy = {y_lo, y_hi, height - bottom, top};

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
      << height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"15\">"
      << escape(title) << "</text>\n";

  // Axes and ticks.
  out << "<line x1=\"" << left << "\" y1=\"" << height - bottom << "\" x2=\""
      << width - right << "\" y2=\"" << height - bottom
      << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left
      << "\" y2=\"" << height - bottom << "\" stroke=\"black\"/>\n";
  for (double tick : nice_ticks(x_lo, x_hi)) {
    const double px = sx(tick);
    out << "<line x1=\"" << px << "\" y1=\"" << height - bottom << "\" x2=\""
        << px << "\" y2=\"" << height - bottom + 5 << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << px << "\" y=\"" << height - bottom + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << fmt(tick) << "</text>\n";
  }
  for (double tick : nice_ticks(y_lo, y_hi)) {
    const double py = sy(tick);
    out << "<line x1=\"" << left - 5 << "\" y1=\"" << py << "\" x2=\"" << left
        << "\" y2=\"" << py << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << left - 8 << "\" y=\"" << py + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << fmt(tick) << "</text>\n";
  }
  out << "<text x=\"" << (left + width - right) / 2 << "\" y=\""
      << height - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\">"
      << escape(x_label) << "</text>\n"
      << "<text x=\"16\" y=\"" << (top + height - bottom) / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\" transform=\"rotate(-90 16 "
      << (top + height - bottom) / 2 << ")\">" << escape(y_label)
      << "</text>\n";

  // Shaded std bands first so lines draw on top.
  for (const Series& s : series) {
    if (s.y_std.empty() || s.x.size() < 2) continue;
    std::ostringstream points;
    for (size_t i = 0; i < s.x.size(); ++i)
      points << sx(s.x[i]) << ',' << sy(s.y[i] + s.y_std[i]) << ' ';
    for (size_t i = s.x.size(); i-- > 0;)
      points << sx(s.x[i]) << ',' << sy(s.y[i] - s.y_std[i]) << ' ';
    out << "<polygon points=\"" << points.str() << "\" fill=\"" << s.color
        << "\" opacity=\"0.15\"/>\n";
  }
  for (const Series& s : series) {
    std::ostringstream points;
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (s.step && i > 0)
        points << sx(s.x[i]) << ',' << sy(s.y[i - 1]) << ' ';
      points << sx(s.x[i]) << ',' << sy(s.y[i]) << ' ';
    }
    out << "<polyline points=\"" << points.str()
        << "\" fill=\"none\" stroke=\"" << s.color
        << "\" stroke-width=\"1.8\"/>\n";
  }

  // Legend, top-right.
  double ly = top + 6;
  for (const Series& s : series) {
    out << "<line x1=\"" << width - right - 140 << "\" y1=\"" << ly
        << "\" x2=\"" << width - right - 116 << "\" y2=\"" << ly
        << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << width - right - 110 << "\" y=\"" << ly + 4
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape(s.label)
        << "</text>\n";
    ly += 16;
  }
  out << "</svg>\n";
  return out.str();
}

std::string attention_heatmaps(const std::string& title,
                               const std::vector<AttentionRecord>& records) {
  if (records.empty())
    throw ContractError("attention_heatmaps: no records to draw");
  const double cell = 9.0;
  const double panel_pad = 56.0;
  const double top = 56.0;
  double width = panel_pad;
  double max_n = 0;
  for (const AttentionRecord& r : records) {
    width += r.n * cell + panel_pad;
    max_n = std::max(max_n, static_cast<double>(r.n));
  }
  const double height = top + max_n * cell + 70.0;

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
      << height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"14\">"
      << escape(title) << "</text>\n";

  double x0 = panel_pad;
  for (const AttentionRecord& record : records) {
    double alpha_max = 0.0;
    for (double a : record.alpha) alpha_max = std::max(alpha_max, a);
    if (alpha_max <= 0.0) alpha_max = 1.0;

    out << "<text x=\"" << x0 + record.n * cell / 2 << "\" y=\"" << top - 10
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"12\">layer "
        << record.layer + 1 << " (t=" << record.timestep << ")</text>\n";
    for (size_t u = 0; u < record.n; ++u)
      for (size_t v = 0; v < record.n; ++v)
        out << "<rect x=\"" << x0 + v * cell << "\" y=\"" << top + u * cell
            << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\""
            << ramp_color(record.at(u, v) / alpha_max) << "\"/>\n";
    // Role boundary: first knowledge-graph node index, when present.
    size_t kg_begin = record.n;
    for (size_t i = 0; i < record.roles.size(); ++i)
      if (record.roles[i].kind == NodeRole::Kind::Kg) {
        kg_begin = i;
        break;
      }
    if (kg_begin < record.n) {
      const double px = x0 + kg_begin * cell;
      const double py = top + kg_begin * cell;
      out << "<line x1=\"" << px << "\" y1=\"" << top << "\" x2=\"" << px
          << "\" y2=\"" << top + record.n * cell
          << "\" stroke=\"#d62728\" stroke-dasharray=\"3,2\"/>\n"
          << "<line x1=\"" << x0 << "\" y1=\"" << py << "\" x2=\""
          << x0 + record.n * cell << "\" y2=\"" << py
          << "\" stroke=\"#d62728\" stroke-dasharray=\"3,2\"/>\n";
    }
    out << "<text x=\"" << x0 + record.n * cell / 2 << "\" y=\""
        << top + record.n * cell + 16
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"10\">lower = vitals/text, beyond dashes = KG</text>\n";
    x0 += record.n * cell + panel_pad;
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace kgicu::svg
