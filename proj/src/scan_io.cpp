#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <string>

#include "vapor/experiment.hpp"
#include "vapor/text.hpp"

namespace vapor {
namespace {

std::string cell(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string{};
}

std::string fixed(double v, int digits) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string tick(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

constexpr double kWidth = 640.0;
constexpr double kPanelHeight = 240.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 30.0;
constexpr double kBottom = 40.0;

void panel(std::ostream& os, const std::vector<ScanRecord>& records, double y0,
           const std::string& label,
           const std::function<double(const ScanRecord&)>& value) {
  const double x_lo = records.front().delta_mhz;
  const double x_hi = records.back().delta_mhz;
  double y_lo = value(records.front());
  double y_hi = y_lo;
  for (const auto& r : records) {
    y_lo = std::min(y_lo, value(r));
    y_hi = std::max(y_hi, value(r));
  }
  if (y_hi - y_lo < 1e-300) {
    y_lo -= 0.5 * std::max(std::abs(y_lo), 1e-12);
    y_hi += 0.5 * std::max(std::abs(y_hi), 1e-12);
  }
  const double w = kWidth - kLeft - kRight;
  const double h = kPanelHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x_lo) / (x_hi - x_lo) * w; };
  auto py = [&](double y) { return y0 + kTop + (1.0 - (y - y_lo) / (y_hi - y_lo)) * h; };

  os << "<rect x=\"" << kLeft << "\" y=\"" << y0 + kTop << "\" width=\"" << w
     << "\" height=\"" << h << "\" fill=\"none\" stroke=\"#444\"/>\n";
  os << "<text x=\"" << kLeft << "\" y=\"" << y0 + kTop - 8 << "\" font-size=\"13\">"
     << xml_escape(label) << "</text>\n";
  for (int t = 0; t <= 4; ++t) {
    const double xv = x_lo + (x_hi - x_lo) * t / 4.0;
    const double yv = y_lo + (y_hi - y_lo) * t / 4.0;
    os << "<text x=\"" << fixed(px(xv), 1) << "\" y=\"" << y0 + kTop + h + 16
       << "\" font-size=\"11\" text-anchor=\"middle\">" << fixed(xv, 2) << "</text>\n";
    os << "<text x=\"" << kLeft - 4 << "\" y=\"" << fixed(py(yv) + 4, 1)
       << "\" font-size=\"11\" text-anchor=\"end\">" << tick(yv)
       << "</text>\n";
  }
  os << "<text x=\"" << kLeft + w / 2 << "\" y=\"" << y0 + kPanelHeight - 6
     << "\" font-size=\"12\" text-anchor=\"middle\">probe detuning (MHz)</text>\n";
  os << "<polyline fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (i) os << ' ';
    os << fixed(px(records[i].delta_mhz), 2) << ',' << fixed(py(value(records[i])), 2);
  }
  os << "\"/>\n";
}

}  // namespace

void write_scan_csv(std::ostream& os, const std::vector<ScanRecord>& records) {
  os << "delta_mhz,intensity_ratio,pinhole_raw,pinhole_norm,chi_re,chi_im,gain_shaping\n";
  for (const auto& r : records) {
    os << format_double(r.delta_mhz) << ',' << format_double(r.intensity_ratio) << ','
       << cell(r.pinhole_raw) << ',' << cell(r.pinhole_norm) << ','
       << format_double(r.chi_re) << ',' << format_double(r.chi_im) << ','
       << cell(r.gain_shaping) << '\n';
  }
}

void write_scan_svg(std::ostream& os, const std::vector<ScanRecord>& records,
                    const std::string& title) {
  const bool pinhole =
      !records.empty() && std::all_of(records.begin(), records.end(),
                                      [](const ScanRecord& r) { return r.pinhole_norm.has_value(); });
  const double height = 24.0 + kPanelHeight * (pinhole ? 2 : 1);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
     << "\" height=\"" << height << "\" font-family=\"sans-serif\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"18\" font-size=\"15\" text-anchor=\"middle\">"
     << xml_escape(title) << "</text>\n";
  if (records.size() >= 2) {
    panel(os, records, 24.0, "on-axis intensity ratio",
          [](const ScanRecord& r) { return r.intensity_ratio; });
    if (pinhole) {
      panel(os, records, 24.0 + kPanelHeight, "normalized pinhole transmission",
            [](const ScanRecord& r) { return *r.pinhole_norm; });
    }
  }
  os << "</svg>\n";
}

}  // namespace vapor
