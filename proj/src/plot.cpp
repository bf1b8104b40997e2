#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "ejuggle/sweep.hpp"

namespace ejuggle {

namespace {

constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                                 "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
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

// Rounds up to 1, 2 or 5 times a power of ten.
double nice_ceiling(double v) {
  if (!(v > 0.0)) return 1.0;
  const double p = std::pow(10.0, std::floor(std::log10(v)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * p >= v) return m * p;
  }
  return 10.0 * p;
}

}  // namespace

void write_plot(std::ostream& out, std::span<const SweepResult> curves, const PlotOptions& options) {
  const double left = 70, right = options.show_fidelity ? 70 : 30, top = 40, bottom = 55;
  const double w = options.width, h = options.height;
  const double pw = w - left - right, ph = h - top - bottom;

  double wmin = 0.0, wmax = 0.0, rmax = options.reference_rate.value_or(0.0);
  bool any = false;
  for (const SweepResult& c : curves) {
    for (const SweepRow& r : c.rows) {
      if (!(r.window > 0.0)) continue;
      wmin = any ? std::min(wmin, r.window) : r.window;
      wmax = any ? std::max(wmax, r.window) : r.window;
      any = true;
      if (r.ok() && std::isfinite(r.rate)) rmax = std::max(rmax, r.rate);
    }
  }
  if (!any) {
    wmin = 1e-9;
    wmax = 1e-7;
  }
  // Axis in ns, snapped to decades.
  const double lx0 = std::floor(std::log10(wmin * 1e9));
  const double lx1 = std::max(lx0 + 1.0, std::ceil(std::log10(wmax * 1e9)));
  const double ytop = nice_ceiling(rmax * 1.05);

  auto x_of = [&](double window) { return left + pw * (std::log10(window * 1e9) - lx0) / (lx1 - lx0); };
  auto y_of = [&](double rate) { return top + ph * (1.0 - rate / ytop); };
  auto yf_of = [&](double f) { return top + ph * (1.0 - (f - 0.5) / 0.5); };

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\" viewBox=\"0 0 " << w << ' ' << h << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!options.title.empty()) {
    out << "<text x=\"" << fmt(w / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
        << escape(options.title) << "</text>\n";
  }

  // Grid and ticks.
  out << "<g stroke=\"#dddddd\" stroke-width=\"1\">\n";
  for (double d = lx0; d <= lx1 + 1e-9; d += 1.0) {
    for (int m = 1; m < 10; ++m) {
      const double lx = d + std::log10(static_cast<double>(m));
      if (lx > lx1 + 1e-9) break;
      const double x = left + pw * (lx - lx0) / (lx1 - lx0);
      out << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(top) << "\" x2=\"" << fmt(x) << "\" y2=\""
          << fmt(top + ph) << "\"" << (m == 1 ? "" : " stroke-opacity=\"0.5\"") << "/>\n";
    }
  }
  for (int k = 0; k <= 5; ++k) {
    const double y = top + ph * k / 5.0;
    out << "<line x1=\"" << fmt(left) << "\" y1=\"" << fmt(y) << "\" x2=\"" << fmt(left + pw) << "\" y2=\""
        << fmt(y) << "\"/>\n";
  }
  out << "</g>\n";
  out << "<g text-anchor=\"middle\">\n";
  for (double d = lx0; d <= lx1 + 1e-9; d += 1.0) {
    out << "<text x=\"" << fmt(left + pw * (d - lx0) / (lx1 - lx0)) << "\" y=\"" << fmt(top + ph + 18)
        << "\">" << tick_label(std::pow(10.0, d)) << "</text>\n";
  }
  out << "</g>\n<g text-anchor=\"end\">\n";
  for (int k = 0; k <= 5; ++k) {
    const double v = ytop * k / 5.0;
    out << "<text x=\"" << fmt(left - 6) << "\" y=\"" << fmt(y_of(v) + 4) << "\">" << tick_label(v)
        << "</text>\n";
  }
  out << "</g>\n";
  if (options.show_fidelity) {
    out << "<g text-anchor=\"start\">\n";
    for (int k = 0; k <= 5; ++k) {
      const double f = 0.5 + 0.1 * k;
      out << "<text x=\"" << fmt(left + pw + 6) << "\" y=\"" << fmt(yf_of(f) + 4) << "\">"
          << tick_label(f) << "</text>\n";
    }
    out << "</g>\n";
    out << "<text transform=\"translate(" << fmt(w - 18) << ',' << fmt(top + ph / 2)
        << ") rotate(90)\" text-anchor=\"middle\">fidelity (dashed)</text>\n";
  }
  out << "<rect x=\"" << fmt(left) << "\" y=\"" << fmt(top) << "\" width=\"" << fmt(pw) << "\" height=\""
      << fmt(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
  out << "<text x=\"" << fmt(left + pw / 2) << "\" y=\"" << fmt(h - 12)
      << "\" text-anchor=\"middle\">detection window (ns)</text>\n";
  out << "<text transform=\"translate(18," << fmt(top + ph / 2)
      << ") rotate(-90)\" text-anchor=\"middle\">REG rate (1/s)</text>\n";

  if (options.reference_rate) {
    const double y = y_of(*options.reference_rate);
    out << "<line id=\"reference-line\" x1=\"" << fmt(left) << "\" y1=\"" << fmt(y) << "\" x2=\""
        << fmt(left + pw) << "\" y2=\"" << fmt(y) << "\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
    out << "<text x=\"" << fmt(left + pw - 4) << "\" y=\"" << fmt(y - 4) << "\" text-anchor=\"end\">"
        << tick_label(*options.reference_rate) << " /s</text>\n";
  }

  auto polyline = [&](const SweepResult& c, auto value_of, const char* color, const char* dash) {
    std::string points;
    for (const SweepRow& r : c.rows) {
      if (!r.ok()) {
        if (!points.empty()) {
          out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\"" << dash
              << " points=\"" << points << "\"/>\n";
        }
        points.clear();
        continue;
      }
      points += fmt(x_of(r.window)) + ',' + fmt(value_of(r)) + ' ';
    }
    if (!points.empty()) {
      out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\"" << dash
          << " points=\"" << points << "\"/>\n";
    }
  };

  for (std::size_t k = 0; k < curves.size(); ++k) {
    const SweepResult& c = curves[k];
    const char* color = kPalette[k % kPalette.size()];
    out << "<g class=\"curve\" data-species=\"" << escape(c.species) << "\" data-scenario=\""
        << escape(c.scenario) << "\">\n";
    polyline(c, [&](const SweepRow& r) { return y_of(r.rate); }, color, "");
    if (options.show_fidelity) {
      polyline(c, [&](const SweepRow& r) { return yf_of(std::clamp(r.fidelity, 0.5, 1.0)); }, color,
               " stroke-dasharray=\"5,4\"");
    }
    out << "</g>\n";
    const double ly = top + 14 + 16.0 * static_cast<double>(k);
    out << "<line x1=\"" << fmt(left + 10) << "\" y1=\"" << fmt(ly - 4) << "\" x2=\"" << fmt(left + 30)
        << "\" y2=\"" << fmt(ly - 4) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << fmt(left + 36) << "\" y=\"" << fmt(ly) << "\">" << escape(c.species)
        << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace ejuggle
