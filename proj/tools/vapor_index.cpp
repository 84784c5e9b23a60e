// vapor-index: command-line front end for scenario sweeps, scans, fits,
// calibration and beam propagation. Every command writes its files into
// --output-dir together with manifest.json.

#include <omp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "vapor/beam.hpp"
#include "vapor/config.hpp"
#include "vapor/error.hpp"
#include "vapor/experiment.hpp"
#include "vapor/fit.hpp"
#include "vapor/lineshape.hpp"
#include "vapor/manifest.hpp"
#include "vapor/medium.hpp"
#include "vapor/text.hpp"

namespace fs = std::filesystem;
using namespace vapor;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitPhysics = 3;
constexpr int kExitFit = 4;

struct Globals {
  std::string config_path;
  std::string output_dir = ".";
  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::vector<std::string> argv;
};

struct Session {
  ScanConfig config;
  RunManifest manifest;

  std::ofstream create(const std::string& name) {
    std::ofstream os(fs::path(manifest.output_dir) / name, std::ios::binary);
    if (!os) fail(ErrorCode::InvalidArgument, "cannot write " + name);
    return os;
  }

  void finish(std::ofstream& os, const std::string& name) {
    os.close();
    if (!os) fail(ErrorCode::InvalidArgument, "write failed for " + name);
    record_file(manifest, name);
  }

  void write_manifest() {
    std::ofstream os(fs::path(manifest.output_dir) / "manifest.json", std::ios::binary);
    write_manifest_json(os, manifest);
  }
};

Session open_session(const Globals& g, const std::string& command) {
  Session s;
  if (!g.config_path.empty()) s.config = load_config(g.config_path);
  if (g.seed) s.config.noise.seed = *g.seed;
  fs::create_directories(g.output_dir);
  s.manifest.config_path = g.config_path;
  s.manifest.command = command;
  s.manifest.arguments = g.argv;
  s.manifest.output_dir = g.output_dir;
  s.manifest.seed = g.seed;
  return s;
}

std::string join(const std::vector<double>& v) {
  if (v.empty()) return "none";
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += format_double(v[i]);
  }
  return out;
}

double line_midpoint(const VaporScenario& s) {
  return 0.5 * (s.gain_control.raman_offset_mhz + s.loss_control.raman_offset_mhz);
}

// --- chi -------------------------------------------------------------------

struct ChiOptions {
  std::optional<double> from, to;
  std::optional<std::size_t> points;
};

void cmd_chi(const Globals& g, const ChiOptions& o) {
  Session s = open_session(g, "chi");
  const double from = o.from.value_or(s.config.freq_start_mhz);
  const double to = o.to.value_or(s.config.freq_stop_mhz);
  const std::size_t points = o.points.value_or(s.config.n_points);
  require(from < to, "--from must be below --to");
  require(points >= 2, "--points must be >= 2");

  const SusceptibilityModel model = build_model(s.config.scenario);
  const double wavelength = s.config.probe.wavelength_nm;
  const double step = (to - from) / static_cast<double>(points - 1);

  auto os = s.create("chi.csv");
  os << "delta_mhz,chi_re,chi_im,n_minus_1,alpha_per_m\n";
  for (std::size_t i = 0; i < points; ++i) {
    const double d = i + 1 == points ? to : from + step * static_cast<double>(i);
    const ComplexChi chi = model.chi(d);
    os << format_double(d) << ',' << format_double(chi.real()) << ','
       << format_double(chi.imag()) << ','
       << format_double(refractive_index(chi).real() - 1.0) << ','
       << format_double(intensity_absorption(chi, wavelength)) << '\n';
  }
  s.finish(os, "chi.csv");

  if (model.peak_scale() == 0.0) {
    std::cout << "zero_crossings_mhz=none\nchi_re_extremum=none\npeak_delta_n=none\n"
                 "epsilon_at_peak=none\n";
  } else {
    const double scan_step = std::min(step, model.min_hwhm() / 10.0);
    const auto zeros = im_zero_crossings(model, from, to, scan_step);
    std::cout << "zero_crossings_mhz=" << join(zeros) << '\n';
    const double mid = line_midpoint(s.config.scenario);
    try {
      const Extremum ex = re_extremum_near(model, mid);
      std::cout << "chi_re_extremum_mhz=" << format_double(ex.delta_mhz) << '\n'
                << "chi_re_extremum=" << format_double(ex.chi_re) << '\n'
                << "chi_re_extremum_kind="
                << (ex.curvature == Curvature::Maximum ? "maximum" : "minimum") << '\n';
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoExtremum) throw;
      std::cout << "chi_re_extremum=none\n";
    }
    try {
      const PeakIndex p = peak_delta_n(s.config.scenario);
      std::cout << "peak_delta_n_mhz=" << format_double(p.delta_mhz) << '\n'
                << "peak_delta_n=" << format_double(p.delta_n) << '\n'
                << "epsilon_at_peak=" << format_double(1.0 + model.chi(p.delta_mhz).real())
                << '\n';
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoZeroCrossing) throw;
      std::cout << "peak_delta_n=none\n";
    }
  }
  s.write_manifest();
}

// --- scan ------------------------------------------------------------------

struct ScanOptions {
  std::string pinhole;  // "", "on", "off"
  std::optional<double> noise;
  bool svg = false;
  bool serial = false;
};

void cmd_scan(const Globals& g, const ScanOptions& o) {
  Session s = open_session(g, "scan");
  if (!o.pinhole.empty()) s.config.pinhole.enabled = o.pinhole == "on";
  if (o.noise) s.config.noise.relative_sigma = *o.noise;
  validate(s.config);
  const Execution exec = o.serial ? Execution::Serial : Execution::Parallel;
  const auto records = s.config.pinhole.enabled ? run_pinhole_scan(s.config, exec)
                                                : run_intensity_scan(s.config, exec);

  auto csv = s.create("scan.csv");
  write_scan_csv(csv, records);
  s.finish(csv, "scan.csv");
  auto spectrum = s.create("spectrum.csv");
  write_spectrum_csv(spectrum, to_spectrum(s.config, records));
  s.finish(spectrum, "spectrum.csv");
  if (o.svg) {
    auto svg = s.create("scan.svg");
    write_scan_svg(svg, records, s.config.pinhole.enabled
                                     ? "intensity and normalized pinhole transmission"
                                     : "probe intensity ratio");
    s.finish(svg, "scan.svg");
  }

  auto by = [&](auto proj) {
    return std::minmax_element(records.begin(), records.end(),
                               [&](const ScanRecord& a, const ScanRecord& b) {
                                 return proj(a) < proj(b);
                               });
  };
  const auto [imin, imax] = by([](const ScanRecord& r) { return r.intensity_ratio; });
  std::cout << "intensity_max_mhz=" << format_double(imax->delta_mhz) << '\n'
            << "intensity_min_mhz=" << format_double(imin->delta_mhz) << '\n';
  if (s.config.pinhole.enabled) {
    const auto [pmin, pmax] = by([](const ScanRecord& r) { return *r.pinhole_norm; });
    std::cout << "pinhole_norm_max_mhz=" << format_double(pmax->delta_mhz) << '\n'
              << "pinhole_norm_min_mhz=" << format_double(pmin->delta_mhz) << '\n';
  }
  s.write_manifest();
}

// --- fit -------------------------------------------------------------------

struct FitCliOptions {
  std::string data_path;
  std::size_t resonances = 2;
  std::vector<std::string> kinds{"gain", "absorption"};
  std::optional<double> depth;
  int max_iterations = FitOptions{}.max_iterations;
};

ResonanceKind parse_kind(const std::string& s) {
  if (s == "gain") return ResonanceKind::Gain;
  if (s == "absorption") return ResonanceKind::Absorption;
  fail(ErrorCode::InvalidArgument, "unknown resonance kind '" + s + "'");
}

int cmd_fit(const Globals& g, const FitCliOptions& o) {
  Session s = open_session(g, "fit");
  std::ifstream in(o.data_path, std::ios::binary);
  if (!in) fail(ErrorCode::DataFormat, "cannot open " + o.data_path);
  const SpectrumData data = read_spectrum_csv(in);

  require(o.kinds.size() == o.resonances, "--kinds needs one entry per resonance");
  std::vector<ResonanceKind> kinds;
  for (const auto& k : o.kinds) kinds.push_back(parse_kind(k));
  const double depth = o.depth.value_or(optical_depth_scale(s.config));

  const FitParams init = initial_guess(data, kinds, depth);
  FitOptions options;
  options.max_iterations = o.max_iterations;
  const FitResult result = fit(data, init, options);

  auto report = s.create("fit_report.txt");
  write_fit_report(report, result);
  s.finish(report, "fit_report.txt");

  const bool pair = kinds.size() == 2 && kinds[0] != kinds[1];
  if (result.converged && pair) {
    auto os = s.create("chi_prime.csv");
    write_chi_prime_csv(os, predict_chi_prime(result, data.freqs_mhz));
    s.finish(os, "chi_prime.csv");
  }
  s.write_manifest();

  for (std::size_t i = 0; i < result.params.lines.size(); ++i) {
    const auto& line = result.params.lines[i];
    std::cout << "line" << i << "=" << to_string(line.kind) << " center_mhz="
              << format_double(line.center_mhz) << " hwhm_mhz=" << format_double(line.hwhm_mhz)
              << " strength=" << format_double(line.strength) << '\n';
  }
  if (!result.converged) {
    std::cerr << "error: fit did not converge within " << result.iterations
              << " iterations; best-so-far report written\n";
    return kExitFit;
  }
  return 0;
}

// --- calibrate -------------------------------------------------------------

void cmd_calibrate(const Globals& g, double target) {
  Session s = open_session(g, "calibrate");
  s.config.scenario.kappa = calibrate_kappa(s.config.scenario, target);
  auto os = s.create("calibrated.toml");
  write_config(os, s.config);
  s.finish(os, "calibrated.toml");
  s.write_manifest();
  std::cout << "[scenario]\nkappa = " << format_double(s.config.scenario.kappa) << '\n';
}

// --- propagate -------------------------------------------------------------

struct PropagateOptions {
  std::optional<double> delta;
  std::optional<double> distance;
};

void cmd_propagate(const Globals& g, const PropagateOptions& o) {
  Session s = open_session(g, "propagate");
  const ScanConfig& c = s.config;
  const double delta = o.delta.value_or(line_midpoint(c.scenario));
  const double distance = o.distance.value_or(c.pinhole.distance_m);

  const ComplexChi chi = build_model(c.scenario).chi(delta);
  const double k0 = 2.0 * std::numbers::pi / (c.probe.wavelength_nm * 1e-9);
  const InducedLens lens{0.5 * chi.real(), c.scenario.gain_control.waist_mm,
                         c.scenario.cell.length_cm, k0 * chi.imag()};

  const ComplexField probe = gaussian_field(c.probe, c.grid);
  ComplexField field = apply_medium(probe, lens);
  const double power_gain = field.total_power() / probe.total_power();
  field = propagate(std::move(field), distance);

  auto bin = s.create("field.vpfd");
  write_field_binary(bin, field);
  s.finish(bin, "field.vpfd");
  auto slice = s.create("intensity_slice.csv");
  write_intensity_slice_csv(slice, field);
  s.finish(slice, "intensity_slice.csv");
  s.write_manifest();

  const double raw = pinhole_power(field, c.pinhole.radius_um) / probe.total_power();
  std::cout << "delta_mhz=" << format_double(delta) << '\n'
            << "delta_n0=" << format_double(lens.delta_n0) << '\n'
            << "alpha0_per_m=" << format_double(lens.alpha0_per_m) << '\n'
            << "thin_lens_f_m=" << format_double(thin_lens_focal_length(lens)) << '\n'
            << "spot_mm=" << format_double(second_moment_radius(field)) << '\n'
            << "abcd_thin_lens_spot_mm="
            << format_double(abcd_spot_size(c.probe, thin_lens_focal_length(lens), distance))
            << '\n'
            << "abcd_effective_spot_mm="
            << format_double(abcd_spot_size(
                   c.probe, effective_focal_length(lens, c.probe.waist_mm), distance))
            << '\n'
            << "pinhole_raw=" << format_double(raw) << '\n'
            << "pinhole_norm=" << format_double(raw / power_gain) << '\n';
}

int exit_code(ErrorCode code) {
  switch (category(code)) {
    case ErrorCategory::Input: return kExitConfig;
    case ErrorCategory::Physics: return kExitPhysics;
    case ErrorCategory::Fit: return kExitFit;
  }
  return kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Refractive-index enhancement simulator for gain/absorption resonance pairs"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config_path, "TOML scenario/scan file")
      ->check(CLI::ExistingFile);
  app.add_option("--output-dir", g.output_dir, "directory for output files");
  app.add_option("--seed", g.seed, "noise seed override");
  app.add_option("--threads", g.threads, "OpenMP threads (0 keeps the runtime default)")
      ->check(CLI::NonNegativeNumber);

  ChiOptions chi;
  auto* chi_cmd = app.add_subcommand("chi", "susceptibility sweep -> chi.csv");
  chi_cmd->add_option("--from", chi.from, "start detuning (MHz)");
  chi_cmd->add_option("--to", chi.to, "stop detuning (MHz)");
  chi_cmd->add_option("--points", chi.points, "number of samples");

  ScanOptions scan;
  auto* scan_cmd = app.add_subcommand("scan", "frequency scan -> scan.csv");
  scan_cmd->add_option("--pinhole", scan.pinhole, "override pinhole.enabled")
      ->check(CLI::IsMember({"on", "off"}));
  scan_cmd->add_option("--noise", scan.noise, "relative noise sigma");
  scan_cmd->add_flag("--svg", scan.svg, "also write scan.svg");
  scan_cmd->add_flag("--serial", scan.serial, "use the serial reference loop");

  FitCliOptions fitopt;
  auto* fit_cmd = app.add_subcommand("fit", "fit Lorentzians to a spectrum CSV");
  fit_cmd->add_option("data", fitopt.data_path, "freq_mhz,value[,sigma] CSV")->required();
  fit_cmd->add_option("--resonances", fitopt.resonances, "number of lines")
      ->check(CLI::Range(1, 2));
  fit_cmd->add_option("--kinds", fitopt.kinds, "comma-separated gain|absorption")
      ->delimiter(',');
  fit_cmd->add_option("--depth", fitopt.depth, "optical depth scale k0*L (default from config)");
  fit_cmd->add_option("--max-iterations", fitopt.max_iterations, "iteration budget")
      ->check(CLI::PositiveNumber);

  double target_dn = kDefaultTargetDeltaN;
  auto* cal_cmd = app.add_subcommand("calibrate", "solve kappa for a target peak delta n");
  cal_cmd->add_option("--target-dn", target_dn, "target Re n - 1 at the zero crossing");

  PropagateOptions prop;
  auto* prop_cmd =
      app.add_subcommand("propagate", "probe through the induced lens to the pinhole plane");
  prop_cmd->add_option("--delta", prop.delta, "probe detuning (MHz, default line midpoint)");
  prop_cmd->add_option("--distance", prop.distance, "propagation distance (m)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  g.argv.assign(argv + 1, argv + argc);
  if (g.threads > 0) omp_set_num_threads(g.threads);

  try {
    if (*chi_cmd) cmd_chi(g, chi);
    if (*scan_cmd) cmd_scan(g, scan);
    if (*fit_cmd) return cmd_fit(g, fitopt);
    if (*cal_cmd) cmd_calibrate(g, target_dn);
    if (*prop_cmd) cmd_propagate(g, prop);
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return 0;
}
