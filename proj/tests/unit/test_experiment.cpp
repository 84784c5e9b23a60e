#include <doctest.h>
#include <omp.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "vapor/error.hpp"
#include "vapor/experiment.hpp"
#include "vapor/fit.hpp"
#include "vapor/lineshape.hpp"

using namespace vapor;

namespace {

// Gain center at -spacing/2, absorption at +spacing/2; negative spacing
// puts the absorption line first.
ScanConfig spacing_config(double spacing_mhz) {
  ScanConfig c;
  c.scenario.gain_control.raman_offset_mhz = -0.5 * spacing_mhz;
  c.scenario.loss_control.raman_offset_mhz = 0.5 * spacing_mhz;
  return c;
}

// 512 x 20 um grid: wide enough for the focused and defocused beam at 2.5 m,
// about four times cheaper per point than the default grid.
ScanConfig small_pinhole_config(double lo, double hi, std::size_t n) {
  ScanConfig c;
  c.pinhole.enabled = true;
  c.grid.size = 512;
  c.grid.pitch_um = 20.0;
  c.freq_start_mhz = lo;
  c.freq_stop_mhz = hi;
  c.n_points = n;
  return c;
}

std::size_t argmax_by(const std::vector<ScanRecord>& r, double (*get)(const ScanRecord&)) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < r.size(); ++i)
    if (get(r[i]) > get(r[best])) best = i;
  return best;
}

std::size_t argmin_by(const std::vector<ScanRecord>& r, double (*get)(const ScanRecord&)) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < r.size(); ++i)
    if (get(r[i]) < get(r[best])) best = i;
  return best;
}

double intensity_of(const ScanRecord& r) { return r.intensity_ratio; }
double norm_of(const ScanRecord& r) { return *r.pinhole_norm; }

// 1 - exp(-2 a^2 / w(z)^2) for the free Gaussian probe.
double free_space_pinhole(const ScanConfig& c) {
  const double w0 = c.probe.waist_mm * 1e-3;
  const double zr = std::numbers::pi * w0 * w0 / (c.probe.wavelength_nm * 1e-9);
  const double z = c.pinhole.distance_m;
  const double w = w0 * std::sqrt(1.0 + (z / zr) * (z / zr));
  const double a = c.pinhole.radius_um * 1e-6;
  return 1.0 - std::exp(-2.0 * a * a / (w * w));
}

void require_records_equal(const std::vector<ScanRecord>& a, const std::vector<ScanRecord>& b,
                           double rel) {
  REQUIRE(a.size() == b.size());
  auto close = [rel](double x, double y) {
    return std::abs(x - y) <= rel * std::max(std::abs(x), std::abs(y));
  };
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].delta_mhz == b[i].delta_mhz);
    CHECK(close(a[i].intensity_ratio, b[i].intensity_ratio));
    CHECK(a[i].pinhole_raw.has_value() == b[i].pinhole_raw.has_value());
    if (a[i].pinhole_raw) {
      CHECK(close(*a[i].pinhole_raw, *b[i].pinhole_raw));
      CHECK(close(*a[i].pinhole_norm, *b[i].pinhole_norm));
      CHECK(close(*a[i].gain_shaping, *b[i].gain_shaping));
    }
  }
}

}  // namespace

TEST_CASE("scan grid and config validation") {
  ScanConfig c;
  CHECK(scan_delta(c, 0) == -1.0);
  CHECK(scan_delta(c, 200) == 1.0);
  CHECK(scan_delta(c, 100) == doctest::Approx(0.0));
  CHECK(scan_delta(c, 1) == doctest::Approx(-0.99).epsilon(1e-14));

  ScanConfig bad = c;
  bad.freq_stop_mhz = bad.freq_start_mhz;
  CHECK_THROWS_AS(validate(bad), Error);
  bad = c;
  bad.n_points = 1;
  CHECK_THROWS_AS(validate(bad), Error);
  bad = c;
  bad.noise.relative_sigma = -0.01;
  CHECK_THROWS_AS(validate(bad), Error);

  CHECK_THROWS_AS(run_pinhole_scan(c), Error);  // pinhole disabled
  ScanConfig waists = small_pinhole_config(-0.1, 0.1, 3);
  waists.scenario.loss_control.waist_mm = 1.0;
  CHECK_THROWS_AS(run_pinhole_scan(waists), Error);

  CHECK(optical_depth_scale(c) ==
        doctest::Approx(2 * std::numbers::pi / 780.2e-9 * 0.075).epsilon(1e-15));
}

TEST_CASE("noise factor statistics and counter-based seeding") {
  CHECK(noise_factor(7, 3, 0, 0.0) == 1.0);
  CHECK(noise_factor(7, 3, 0, 0.01) == noise_factor(7, 3, 0, 0.01));
  CHECK(noise_factor(7, 3, 0, 0.01) != noise_factor(7, 3, 1, 0.01));
  CHECK(noise_factor(7, 3, 0, 0.01) != noise_factor(8, 3, 0, 0.01));
  CHECK(noise_factor(7, 3, 0, 0.01) != noise_factor(7, 4, 0, 0.01));
  // High seed bits take part in seeding.
  CHECK(noise_factor(7, 3, 0, 0.01) != noise_factor(7 + (1ULL << 40), 3, 0, 0.01));

  const int n = 20000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double xi = noise_factor(42, static_cast<std::uint64_t>(i), 0, 1.0) - 1.0;
    sum += xi;
    sum2 += xi * xi;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(std::abs(mean) < 4.0 / std::sqrt(n));
  CHECK(std::abs(std::sqrt(var) - 1.0) < 0.02);
}

TEST_CASE("intensity scan: Beer-Lambert values and spacing orderings") {
  const auto base = run_intensity_scan(ScanConfig{}, Execution::Serial);
  const double depth = optical_depth_scale(ScanConfig{});
  const auto model = build_model(ScanConfig{}.scenario);
  for (const auto& r : base) {
    const ComplexChi chi = model.chi(r.delta_mhz);
    CHECK(r.chi_re == chi.real());
    CHECK(r.chi_im == chi.imag());
    CHECK(r.intensity_ratio == doctest::Approx(std::exp(-depth * chi.imag())).epsilon(1e-14));
    CHECK(r.intensity_ratio > 0.0);
    CHECK_FALSE(r.pinhole_raw.has_value());
  }

  for (double spacing : {0.8, 0.4, -0.4, -0.8}) {
    CAPTURE(spacing);
    const ScanConfig c = spacing_config(spacing);
    const auto rec = run_intensity_scan(c);
    const double hi = rec[argmax_by(rec, intensity_of)].delta_mhz;
    const double lo = rec[argmin_by(rec, intensity_of)].delta_mhz;
    CHECK(std::abs(hi - c.scenario.gain_control.raman_offset_mhz) <= 0.02);
    CHECK(std::abs(lo - c.scenario.loss_control.raman_offset_mhz) <= 0.02);
    CHECK(std::abs(std::abs(lo - hi) - std::abs(spacing)) <= 0.02);
    if (spacing > 0) CHECK(hi < lo);
    else CHECK(lo < hi);
  }
}

TEST_CASE("zero pumping gives a flat unit intensity trace") {
  ScanConfig c;
  c.scenario.pumping_efficiency = 0.0;
  for (const auto& r : run_intensity_scan(c)) {
    CHECK(r.intensity_ratio == 1.0);
    CHECK(r.chi_re == 0.0);
    CHECK(r.chi_im == 0.0);
  }
}

TEST_CASE("serial and parallel scans agree") {
  const int saved = omp_get_max_threads();
  omp_set_num_threads(4);

  ScanConfig c = spacing_config(0.4);
  c.noise.relative_sigma = 0.01;
  c.noise.seed = 99;
  require_records_equal(run_intensity_scan(c, Execution::Serial),
                        run_intensity_scan(c, Execution::Parallel), 1e-12);

  ScanConfig p = small_pinhole_config(-0.3, 0.3, 13);
  p.noise.relative_sigma = 0.01;
  require_records_equal(run_pinhole_scan(p, Execution::Serial),
                        run_pinhole_scan(p, Execution::Parallel), 1e-12);

  omp_set_num_threads(saved);
}

TEST_CASE("determinism under a fixed seed") {
  ScanConfig c;
  c.noise.relative_sigma = 0.02;
  c.noise.seed = 5;
  const auto a = run_intensity_scan(c);
  const auto b = run_intensity_scan(c);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].intensity_ratio == b[i].intensity_ratio);

  std::ostringstream sa, sb;
  write_scan_csv(sa, a);
  write_scan_csv(sb, b);
  CHECK(sa.str() == sb.str());

  c.noise.seed = 6;
  const auto other = run_intensity_scan(c);
  int differing = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    differing += a[i].intensity_ratio != other[i].intensity_ratio;
  CHECK(differing == static_cast<int>(a.size()));
}

TEST_CASE("synthesize_dataset") {
  ScanConfig c;
  const auto clean = synthesize_dataset(c);
  const auto scan = run_intensity_scan(c);
  REQUIRE(clean.values.size() == scan.size());
  for (std::size_t i = 0; i < scan.size(); ++i) {
    CHECK(clean.freqs_mhz[i] == scan[i].delta_mhz);
    CHECK(clean.values[i] == scan[i].intensity_ratio);
    CHECK(clean.sigmas[i] == 1.0);
  }

  c.noise.relative_sigma = 0.01;
  const auto noisy = synthesize_dataset(c);
  for (std::size_t i = 0; i < scan.size(); ++i) {
    CHECK(noisy.sigmas[i] == doctest::Approx(0.01 * scan[i].intensity_ratio).epsilon(1e-14));
    CHECK(noisy.values[i] != scan[i].intensity_ratio);
  }
  const auto again = synthesize_dataset(c);
  CHECK(again.values == noisy.values);

  // Two seeds: fitted centers agree within 3 combined standard errors.
  const double depth = optical_depth_scale(c);
  const ResonanceKind kinds[] = {ResonanceKind::Gain, ResonanceKind::Absorption};
  c.noise.seed = 11;
  const auto d1 = synthesize_dataset(c);
  c.noise.seed = 12;
  const auto d2 = synthesize_dataset(c);
  CHECK(d1.values != d2.values);
  const auto f1 = fit(d1, initial_guess(d1, kinds, depth));
  const auto f2 = fit(d2, initial_guess(d2, kinds, depth));
  REQUIRE(f1.converged);
  REQUIRE(f2.converged);
  for (std::size_t j = 0; j < 2; ++j) {
    const double diff = f1.params.lines[j].center_mhz - f2.params.lines[j].center_mhz;
    const double se = std::hypot(f1.std_errors[3 * j], f2.std_errors[3 * j]);
    CHECK(std::abs(diff) < 3.0 * se);
  }
}

TEST_CASE("pinhole scan at kappa = 0 sits at the free-space value") {
  ScanConfig c = small_pinhole_config(-1.0, 1.0, 5);
  c.scenario.kappa = 0.0;
  const double expected = free_space_pinhole(c);
  CHECK(expected == doctest::Approx(0.00657).epsilon(0.005));
  for (const auto& r : run_pinhole_scan(c)) {
    CHECK(r.intensity_ratio == 1.0);
    CHECK(*r.pinhole_norm == *r.pinhole_raw);
    CHECK(*r.pinhole_norm == doctest::Approx(expected).epsilon(0.02));
    CHECK(*r.gain_shaping == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("pinhole maximum at the zero crossing; swapped kinds give a minimum") {
  const ScanConfig c = small_pinhole_config(-0.2, 0.2, 41);
  const auto rec = run_pinhole_scan(c);
  for (const auto& r : rec) {
    CHECK(*r.pinhole_raw > 0.0);
    CHECK(*r.pinhole_raw <= 1.0);
    CHECK(*r.pinhole_norm > 0.0);
    CHECK(*r.pinhole_norm <= 1.0);
  }
  const double step = 0.01;
  const double hi = rec[argmax_by(rec, norm_of)].delta_mhz;
  CHECK(std::abs(hi) <= 0.02 + step);
  CHECK(*rec[argmax_by(rec, norm_of)].pinhole_norm > free_space_pinhole(c));

  ScanConfig swapped = c;
  swapped.scenario = swap_order(c.scenario);
  const auto srec = run_pinhole_scan(swapped);
  const double lo = srec[argmin_by(srec, norm_of)].delta_mhz;
  CHECK(std::abs(lo) <= 0.02 + step);
  CHECK(*srec[argmin_by(srec, norm_of)].pinhole_norm < free_space_pinhole(c));
}

TEST_CASE("normalization removes pure gain/loss in the weak limit") {
  // Index forced to zero, absorption kept: the normalized pinhole power
  // should not depend on detuning.
  auto trace = [](double kappa_scale) {
    const ScanConfig c = small_pinhole_config(-0.3, 0.3, 7);
    const auto model = build_model(c.scenario);
    const double k0 = 2 * std::numbers::pi / (c.probe.wavelength_nm * 1e-9);
    const auto probe = gaussian_field(c.probe, c.grid);
    const AngularSpectrumPropagator prop(c.grid.size, c.grid.pitch_um, c.probe.wavelength_nm,
                                        c.pinhole.distance_m);
    const auto mask = PinholeMask::build(c.grid.size, c.grid.pitch_um, c.pinhole.radius_um);
    std::vector<double> out;
    for (std::size_t i = 0; i < c.n_points; ++i) {
      const double chi_im = kappa_scale * model.chi(scan_delta(c, i)).imag();
      auto field = apply_medium(probe, InducedLens{0.0, c.scenario.gain_control.waist_mm,
                                                   c.scenario.cell.length_cm, k0 * chi_im});
      const double gain = field.total_power() / probe.total_power();
      prop.apply(field);
      out.push_back(mask.power(field) / probe.total_power() / gain);
    }
    const auto [lo, hi] = std::minmax_element(out.begin(), out.end());
    return (*hi - *lo) / *lo;
  };
  const double weak = trace(0.01);
  const double full = trace(1.0);
  MESSAGE("normalized peak-to-peak with dn = 0: " << weak << " at 1% strength, " << full
                                                  << " at calibrated strength");
  CHECK(weak < 0.005);
  CHECK(full > weak);
}

TEST_CASE("pinhole scan surfaces grid errors") {
  ScanConfig c = small_pinhole_config(-0.1, 0.1, 3);
  c.grid.size = 128;
  c.grid.pitch_um = 15.0;
  try {
    run_pinhole_scan(c);
    FAIL("expected Aliasing");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Aliasing);
    CHECK(category(e.code()) == ErrorCategory::Physics);
  }
  c = small_pinhole_config(-0.1, 0.1, 3);
  c.grid.pitch_um = 100.0;
  try {
    run_pinhole_scan(c);
    FAIL("expected a grid error");
  } catch (const Error& e) {
    CHECK(category(e.code()) == ErrorCategory::Physics);
  }
}

TEST_CASE("scan CSV and SVG output") {
  ScanConfig c;
  c.n_points = 3;
  const auto rec = run_intensity_scan(c);
  std::ostringstream csv;
  write_scan_csv(csv, rec);
  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "delta_mhz,intensity_ratio,pinhole_raw,pinhole_norm,chi_re,chi_im,gain_shaping");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 6);
    CHECK(line.find(",,") != std::string::npos);
  }
  CHECK(rows == 3);
  CHECK(csv.str().find("\n-1,") != std::string::npos);

  // Round-trip formatting: parsing each cell gives back the stored double.
  std::istringstream again(csv.str());
  std::getline(again, line);
  for (const auto& r : rec) {
    std::getline(again, line);
    const auto comma = line.find(',');
    const auto second = line.find(',', comma + 1);
    CHECK(std::stod(line.substr(comma + 1, second - comma - 1)) == r.intensity_ratio);
  }

  std::ostringstream svg;
  write_scan_svg(svg, rec, "a < b & c");
  const std::string s = svg.str();
  CHECK(s.rfind("<svg", 0) == 0);
  CHECK(s.find("a &lt; b &amp; c") != std::string::npos);
  CHECK(s.find("</svg>") != std::string::npos);
  auto count = [&](const std::string& needle) {
    std::size_t n = 0;
    for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
    return n;
  };
  CHECK(count("<polyline") == 1);

  auto with_pinhole = rec;
  for (auto& r : with_pinhole) {
    r.pinhole_raw = 0.0065;
    r.pinhole_norm = 0.0066;
    r.gain_shaping = 1.0;
  }
  std::ostringstream svg2;
  write_scan_svg(svg2, with_pinhole, "fig4");
  const std::string s2 = svg2.str();
  std::size_t lines2 = 0;
  for (auto p = s2.find("<polyline"); p != std::string::npos; p = s2.find("<polyline", p + 1))
    ++lines2;
  CHECK(lines2 == 2);
}
