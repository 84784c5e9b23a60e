#include <istream>
#include <ostream>
#include <string>

#include "vapor/error.hpp"
#include "vapor/fit.hpp"
#include "vapor/text.hpp"

namespace vapor {

void write_spectrum_csv(std::ostream& os, const SpectrumData& data) {
  os << "freq_mhz,value,sigma\n";
  for (std::size_t i = 0; i < data.freqs_mhz.size(); ++i) {
    os << format_double(data.freqs_mhz[i]) << ',' << format_double(data.values[i])
       << ',' << format_double(data.sigmas[i]) << '\n';
  }
}

SpectrumData read_spectrum_csv(std::istream& is) {
  std::string line;
  std::size_t lineno = 0;
  auto error = [&](const std::string& what) {
    fail(ErrorCode::DataFormat, "line " + std::to_string(lineno) + ": " + what);
  };

  if (!std::getline(is, line)) {
    fail(ErrorCode::DataFormat, "empty spectrum file");
  }
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line, ',');
  if (header.size() < 2 || header.size() > 3 || header[0] != "freq_mhz" ||
      header[1] != "value" || (header.size() == 3 && header[2] != "sigma")) {
    error("expected header freq_mhz,value[,sigma]");
  }
  const bool has_sigma = header.size() == 3;

  SpectrumData data;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r" || line[0] == '#') continue;
    const auto cols = split(line, ',');
    if (cols.size() != header.size()) error("wrong number of columns");
    const auto f = parse_double(cols[0]);
    const auto v = parse_double(cols[1]);
    const auto s = has_sigma ? parse_double(cols[2]) : std::optional<double>(1.0);
    if (!f || !v || !s) error("unparsable number");
    data.freqs_mhz.push_back(*f);
    data.values.push_back(*v);
    data.sigmas.push_back(*s);
  }
  return data;
}

void write_fit_report(std::ostream& os, const FitResult& r) {
  os << "converged=" << (r.converged ? "true" : "false") << '\n'
     << "iterations=" << r.iterations << '\n'
     << "residual_norm=" << format_double(r.residual_norm) << '\n'
     << "gradient_norm=" << format_double(r.gradient_norm) << '\n'
     << "dof=" << r.dof << '\n'
     << "rank_deficient=" << (r.rank_deficient ? "true" : "false") << '\n'
     << "depth=" << format_double(r.params.depth) << '\n'
     << "depth_fixed=true\n"
     << "resonances=" << r.params.lines.size() << '\n';
  for (std::size_t i = 0; i < r.params.lines.size(); ++i) {
    const auto& l = r.params.lines[i];
    const std::string p = "line" + std::to_string(i) + ".";
    const std::size_t k = 3 * i;
    os << p << "kind=" << to_string(l.kind) << '\n'
       << p << "center_mhz=" << format_double(l.center_mhz) << '\n'
       << p << "center_mhz_stderr=" << format_double(r.std_errors.at(k)) << '\n'
       << p << "hwhm_mhz=" << format_double(l.hwhm_mhz) << '\n'
       << p << "hwhm_mhz_stderr=" << format_double(r.std_errors.at(k + 1)) << '\n'
       << p << "strength=" << format_double(l.strength) << '\n'
       << p << "strength_stderr=" << format_double(r.std_errors.at(k + 2)) << '\n';
  }
  os << "baseline=" << format_double(r.params.baseline) << '\n'
     << "baseline_stderr=" << format_double(r.std_errors.at(3 * r.params.lines.size())) << '\n';
}

void write_chi_prime_csv(std::ostream& os, const ChiPrimeCurve& c) {
  os << "delta_mhz,chi_re,delta_n\n";
  for (std::size_t i = 0; i < c.freqs_mhz.size(); ++i) {
    os << format_double(c.freqs_mhz[i]) << ',' << format_double(c.chi_re[i]) << ','
       << format_double(c.delta_n[i]) << '\n';
  }
}

}  // namespace vapor
