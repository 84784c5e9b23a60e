#include "vapor/experiment.hpp"

#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <random>

#include "vapor/error.hpp"

namespace vapor {
namespace {

double wavenumber(const ScanConfig& c) {
  return 2.0 * std::numbers::pi / (c.probe.wavelength_nm * 1e-9);
}

// Runs body(i) for every index, serially or with OpenMP. The first exception
// thrown by any point is rethrown after the loop.
template <class Body>
void for_each_point(std::size_t count, Execution exec, Body&& body) {
  if (exec == Execution::Serial) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::exception_ptr first;
  std::mutex guard;
  const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(guard);
      if (!first) first = std::current_exception();
    }
  }
  if (first) std::rethrow_exception(first);
}

ScanRecord intensity_point(const ScanConfig& c, const SusceptibilityModel& model,
                           std::size_t i) {
  ScanRecord rec;
  rec.delta_mhz = scan_delta(c, i);
  const ComplexChi chi = model.chi(rec.delta_mhz);
  rec.chi_re = chi.real();
  rec.chi_im = chi.imag();
  rec.intensity_ratio =
      std::exp(-wavenumber(c) * chi.imag() * c.scenario.cell.length_m()) *
      noise_factor(c.noise.seed, i, 0, c.noise.relative_sigma);
  return rec;
}

}  // namespace

void validate(const ScanConfig& c) {
  validate(c.scenario);
  require(std::isfinite(c.freq_start_mhz) && std::isfinite(c.freq_stop_mhz) &&
              c.freq_start_mhz < c.freq_stop_mhz,
          "scan needs freq_start_mhz < freq_stop_mhz");
  require(c.n_points >= 2, "scan needs n_points >= 2");
  require(c.noise.relative_sigma >= 0.0 && std::isfinite(c.noise.relative_sigma),
          "noise relative_sigma must be >= 0");
  validate(c.probe);
  validate(c.grid);
  require(c.pinhole.radius_um > 0.0, "pinhole radius_um must be > 0");
  require(std::isfinite(c.pinhole.distance_m), "pinhole distance_m must be finite");
}

double scan_delta(const ScanConfig& c, std::size_t index) {
  if (index + 1 == c.n_points) return c.freq_stop_mhz;
  const double step = (c.freq_stop_mhz - c.freq_start_mhz) /
                      static_cast<double>(c.n_points - 1);
  return c.freq_start_mhz + step * static_cast<double>(index);
}

double optical_depth_scale(const ScanConfig& c) {
  return wavenumber(c) * c.scenario.cell.length_m();
}

double noise_factor(std::uint64_t seed, std::uint64_t index, std::uint32_t stream,
                    double relative_sigma) {
  if (relative_sigma == 0.0) return 1.0;
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32), stream};
  std::mt19937_64 gen(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  return 1.0 + relative_sigma * normal(gen);
}

std::vector<ScanRecord> run_intensity_scan(const ScanConfig& config, Execution exec) {
  validate(config);
  const SusceptibilityModel model = build_model(config.scenario);
  std::vector<ScanRecord> out(config.n_points);
  for_each_point(config.n_points, exec,
                 [&](std::size_t i) { out[i] = intensity_point(config, model, i); });
  return out;
}

std::vector<ScanRecord> run_pinhole_scan(const ScanConfig& config, Execution exec) {
  validate(config);
  require(config.pinhole.enabled, "run_pinhole_scan needs pinhole.enabled");
  const auto& sc = config.scenario;
  require(sc.gain_control.waist_mm == sc.loss_control.waist_mm,
          "pinhole scan needs equal gain and loss control waists");

  const SusceptibilityModel model = build_model(sc);
  const ComplexField probe = gaussian_field(config.probe, config.grid);
  const double input_power = probe.total_power();
  const AngularSpectrumPropagator propagator(config.grid.size, config.grid.pitch_um,
                                             config.probe.wavelength_nm,
                                             config.pinhole.distance_m);
  const PinholeMask mask =
      PinholeMask::build(config.grid.size, config.grid.pitch_um, config.pinhole.radius_um);
  const double k0 = wavenumber(config);
  const double length = sc.cell.length_m();

  check_medium_resolution(config.grid.pitch_um, sc.gain_control.waist_mm);

  std::vector<ScanRecord> out(config.n_points);
  for_each_point(config.n_points, exec, [&](std::size_t i) {
    ScanRecord rec = intensity_point(config, model, i);
    const InducedLens lens{0.5 * rec.chi_re, sc.gain_control.waist_mm, sc.cell.length_cm,
                           k0 * rec.chi_im};
    ComplexField field = apply_medium(probe, lens);
    const double power_gain = field.total_power() / input_power;
    propagator.apply(field);
    if (config.pinhole.distance_m != 0.0) {
      const auto rep = sampling_report(field, config.pinhole.distance_m);
      if (!rep.ok) {
        fail(ErrorCode::Aliasing,
             "propagated field reaches the grid border at delta = " +
                 std::to_string(rec.delta_mhz) + " MHz; use N = " +
                 std::to_string(rep.suggested_size));
      }
    }
    const double raw = mask.power(field) / input_power *
                       noise_factor(config.noise.seed, i, 1, config.noise.relative_sigma);
    rec.pinhole_raw = raw;
    rec.pinhole_norm = raw / power_gain;
    rec.gain_shaping = power_gain / std::exp(-lens.alpha0_per_m * length);
    out[i] = rec;
  });
  return out;
}

SpectrumData synthesize_dataset(const ScanConfig& config) {
  return to_spectrum(config, run_intensity_scan(config));
}

SpectrumData to_spectrum(const ScanConfig& config, const std::vector<ScanRecord>& records) {
  SpectrumData data;
  const double sigma = config.noise.relative_sigma;
  const double depth = optical_depth_scale(config);
  for (const auto& r : records) {
    data.freqs_mhz.push_back(r.delta_mhz);
    data.values.push_back(r.intensity_ratio);
    data.sigmas.push_back(sigma > 0.0 ? sigma * std::exp(-depth * r.chi_im) : 1.0);
  }
  return data;
}

}  // namespace vapor
