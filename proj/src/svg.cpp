#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "sipkit/reports.hpp"

namespace sipkit {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Diverging blue-white-red for rho in [-1, 1].
std::string rho_color(double rho) {
  if (!std::isfinite(rho)) return "#dddddd";
  const double t = std::clamp(rho, -1.0, 1.0);
  const int fade = static_cast<int>(std::lround(255.0 * (1.0 - std::abs(t))));
  char buf[8];
  if (t >= 0) std::snprintf(buf, sizeof buf, "#ff%02x%02x", fade, fade);
  else std::snprintf(buf, sizeof buf, "#%02x%02xff", fade, fade);
  return buf;
}

}  // namespace

std::string correlation_svg(const CorrelationReport& report) {
  const double cell = 28, left = 140, top = 110;
  const auto rows = report.map.rows.size(), cols = report.map.cols.size();
  const double w = left + cell * static_cast<double>(cols) + 20, h = top + cell * static_cast<double>(rows) + 20;
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(w) << "\" height=\"" << fmt(h)
    << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  for (std::size_t c = 0; c < cols; ++c) {
    const double x = left + cell * (static_cast<double>(c) + 0.5);
    o << "<text transform=\"translate(" << fmt(x) << "," << fmt(top - 6) << ") rotate(-60)\">"
      << escape(report.map.cols[c]) << "</text>\n";
  }
  for (std::size_t r = 0; r < rows; ++r) {
    const double y = top + cell * static_cast<double>(r);
    o << "<text x=\"" << fmt(left - 6) << "\" y=\"" << fmt(y + cell * 0.65) << "\" text-anchor=\"end\">"
      << escape(report.map.rows[r]) << "</text>\n";
    for (std::size_t c = 0; c < cols; ++c) {
      const double rho = report.map.rho(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
      const double x = left + cell * static_cast<double>(c);
      o << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\"" << fmt(cell) << "\" height=\"" << fmt(cell)
        << "\" fill=\"" << rho_color(rho) << "\" stroke=\"#ffffff\"/>\n";
      if (report.significant(r, c)) {
        o << "<text x=\"" << fmt(x + cell / 2) << "\" y=\"" << fmt(y + cell * 0.65) << "\" text-anchor=\"middle\">*</text>\n";
      }
    }
  }
  o << "</svg>\n";
  return o.str();
}

std::string descriptives_svg(const std::vector<BoxStats>& stats) {
  std::vector<std::string> datasets;
  for (const auto& b : stats)
    if (std::find(datasets.begin(), datasets.end(), b.dataset) == datasets.end()) datasets.push_back(b.dataset);
  const double panel_w = 150, panel_h = 120, plot_h = 90;
  const std::size_t per_row = 5;
  const double lane = panel_w / static_cast<double>(datasets.size() + 1);
  const double w = panel_w * per_row + 20;
  const double h = panel_h * std::ceil(static_cast<double>(kSipCount) / per_row) + 20;
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(w) << "\" height=\"" << fmt(h)
    << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
  for (std::size_t j = 0; j < kSipCount; ++j) {
    const double px = 10 + panel_w * static_cast<double>(j % per_row);
    const double py = 10 + panel_h * static_cast<double>(j / per_row);
    const double base = py + 14 + plot_h;
    o << "<text x=\"" << fmt(px + panel_w / 2) << "\" y=\"" << fmt(py + 10) << "\" text-anchor=\"middle\">"
      << kSipNames[j] << "</text>\n";
    o << "<rect x=\"" << fmt(px) << "\" y=\"" << fmt(py + 14) << "\" width=\"" << fmt(panel_w - 10) << "\" height=\""
      << fmt(plot_h) << "\" fill=\"none\" stroke=\"#cccccc\"/>\n";
    for (const auto& b : stats) {
      if (b.sip != kSipNames[j] || b.absent) continue;
      const auto d = static_cast<double>(std::find(datasets.begin(), datasets.end(), b.dataset) - datasets.begin());
      const double cx = px + lane * (d + 0.5);
      auto y = [&](double v) { return fmt(base - v * plot_h); };
      o << "<line x1=\"" << fmt(cx) << "\" x2=\"" << fmt(cx) << "\" y1=\"" << y(b.whisker_lo) << "\" y2=\""
        << y(b.whisker_hi) << "\" stroke=\"#333333\"/>\n";
      o << "<rect x=\"" << fmt(cx - lane * 0.3) << "\" y=\"" << y(b.q3) << "\" width=\"" << fmt(lane * 0.6)
        << "\" height=\"" << fmt((b.q3 - b.q1) * plot_h) << "\" fill=\"#9ecae1\" stroke=\"#333333\"/>\n";
      o << "<line x1=\"" << fmt(cx - lane * 0.3) << "\" x2=\"" << fmt(cx + lane * 0.3) << "\" y1=\"" << y(b.median)
        << "\" y2=\"" << y(b.median) << "\" stroke=\"#000000\"/>\n";
    }
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace sipkit
