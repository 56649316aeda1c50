#include "vsgrasp/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace vsgrasp {
namespace {

constexpr int kWidth = 800;
constexpr int kHeight = 520;
constexpr int kMargin = 60;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                          "#8c564b", "#e377c2", "#17becf"};

void open_svg(std::ostringstream& out, const std::string& title) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  out << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\""
      << " text-anchor=\"middle\">" << title << "</text>\n";
}

// round the raw span up to a 1/2/5 ladder step
double nice_step(double span) {
  const double raw = span / 6.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double r = raw / mag;
  if (r <= 1) return mag;
  if (r <= 2) return 2 * mag;
  if (r <= 5) return 5 * mag;
  return 10 * mag;
}

}  // namespace

std::string svg_error_plot(const std::vector<LogRecord>& records, const std::string& title) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : records) {
    if (std::isfinite(r.mean_err_px)) pts.emplace_back(r.t, r.mean_err_px);
  }
  std::ostringstream out;
  open_svg(out, title);
  if (!pts.empty()) {
    double t0 = pts.front().first, t1 = pts.back().first;
    if (t1 <= t0) t1 = t0 + 1;
    double emax = 0;
    for (const auto& [t, e] : pts) emax = std::max(emax, e);
    if (emax <= 0) emax = 1;
    const double px_w = kWidth - 2 * kMargin;
    const double px_h = kHeight - 2 * kMargin;
    const auto sx = [&](double t) { return kMargin + (t - t0) / (t1 - t0) * px_w; };
    const auto sy = [&](double e) { return kHeight - kMargin - e / emax * px_h; };

    out << "<line x1=\"" << kMargin << "\" y1=\"" << kHeight - kMargin << "\" x2=\""
        << kWidth - kMargin << "\" y2=\"" << kHeight - kMargin
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << kMargin << "\" y1=\"" << kMargin << "\" x2=\"" << kMargin
        << "\" y2=\"" << kHeight - kMargin << "\" stroke=\"black\"/>\n";
    const double et = nice_step(emax);
    for (double e = 0; e <= emax + 1e-9; e += et) {
      out << "<line x1=\"" << kMargin - 4 << "\" y1=\"" << num(sy(e)) << "\" x2=\"" << kMargin
          << "\" y2=\"" << num(sy(e)) << "\" stroke=\"black\"/>\n";
      out << "<text x=\"" << kMargin - 8 << "\" y=\"" << num(sy(e) + 4)
          << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" << num(e)
          << "</text>\n";
    }
    const double tt = nice_step(t1 - t0);
    for (double t = t0; t <= t1 + 1e-9; t += tt) {
      out << "<line x1=\"" << num(sx(t)) << "\" y1=\"" << kHeight - kMargin << "\" x2=\""
          << num(sx(t)) << "\" y2=\"" << kHeight - kMargin + 4 << "\" stroke=\"black\"/>\n";
      out << "<text x=\"" << num(sx(t)) << "\" y=\"" << kHeight - kMargin + 18
          << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" << num(t)
          << "</text>\n";
    }
    out << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 12
        << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">time (s)</text>\n";
    out << "<text x=\"16\" y=\"" << kHeight / 2
        << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\""
        << " transform=\"rotate(-90 16 " << kHeight / 2 << ")\">mean error (px)</text>\n";

    out << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
    for (const auto& [t, e] : pts) out << num(sx(t)) << ',' << num(sy(e)) << ' ';
    out << "\"/>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string svg_path_plot(const std::map<int, std::vector<Pixel>>& tracks,
                          const std::map<int, Pixel>& goals, int image_w, int image_h,
                          const std::string& title) {
  std::ostringstream out;
  open_svg(out, title);
  const double px_w = kWidth - 2 * kMargin;
  const double px_h = kHeight - 2 * kMargin;
  const double scale = std::min(px_w / image_w, px_h / image_h);
  const double ox = kMargin + (px_w - image_w * scale) / 2;
  const double oy = kMargin + (px_h - image_h * scale) / 2;
  const auto sx = [&](double u) { return ox + u * scale; };
  const auto sy = [&](double v) { return oy + v * scale; };

  out << "<rect x=\"" << num(ox) << "\" y=\"" << num(oy) << "\" width=\""
      << num(image_w * scale) << "\" height=\"" << num(image_h * scale)
      << "\" fill=\"none\" stroke=\"black\"/>\n";

  int color = 0;
  for (const auto& [id, path] : tracks) {
    if (path.empty()) continue;
    const char* c = kPalette[color++ % 8];
    out << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1\" points=\"";
    for (const auto& p : path) out << num(sx(p.x())) << ',' << num(sy(p.y())) << ' ';
    out << "\"/>\n";
    out << "<circle cx=\"" << num(sx(path.front().x())) << "\" cy=\""
        << num(sy(path.front().y())) << "\" r=\"3\" fill=\"" << c << "\"/>\n";
  }
  for (const auto& [id, g] : goals) {
    const double x = sx(g.x());
    const double y = sy(g.y());
    out << "<path d=\"M" << num(x - 4) << ' ' << num(y - 4) << " L" << num(x + 4) << ' '
        << num(y + 4) << " M" << num(x - 4) << ' ' << num(y + 4) << " L" << num(x + 4) << ' '
        << num(y - 4) << "\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace vsgrasp
