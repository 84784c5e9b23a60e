#pragma once

// Virtual frequency scans: on-axis intensity (gain/loss) and pinhole
// transmission behind the induced lens.
//
// Every scan point is computed by the same per-point kernel; Execution picks
// a plain loop (the reference) or an OpenMP loop. Results are written by
// grid index and noise is seeded per (seed, index, stream), so both paths
// give identical output.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vapor/beam.hpp"
#include "vapor/fit.hpp"
#include "vapor/medium.hpp"

namespace vapor {

struct PinholeConfig {
  bool enabled = false;
  double radius_um = 75.0;
  double distance_m = 2.5;
};

struct NoiseConfig {
  double relative_sigma = 0.0;
  std::uint64_t seed = 1;
};

struct ScanConfig {
  VaporScenario scenario = default_scenario();
  double freq_start_mhz = -1.0;
  double freq_stop_mhz = 1.0;
  std::size_t n_points = 201;
  PinholeConfig pinhole;
  NoiseConfig noise;
  GaussianBeam probe;
  GridSpec grid;
};

void validate(const ScanConfig& config);

double scan_delta(const ScanConfig& config, std::size_t index);

// k0 * L: converts chi'' into the exponent of the cell's intensity factor.
double optical_depth_scale(const ScanConfig& config);

// 1 + sigma * xi with xi ~ N(0, 1) drawn from a generator seeded only by
// (seed, index, stream).
double noise_factor(std::uint64_t seed, std::uint64_t index, std::uint32_t stream,
                    double relative_sigma);

struct ScanRecord {
  double delta_mhz = 0.0;
  double intensity_ratio = 1.0;  // on-axis I_out / I_in
  std::optional<double> pinhole_raw;   // pinhole power / incident probe power
  std::optional<double> pinhole_norm;  // pinhole power / transmitted power
  // Transmitted-power gain over the on-axis factor exp(-alpha0 L): the
  // residual transverse gain shaping that normalization cannot remove.
  std::optional<double> gain_shaping;
  double chi_re = 0.0;  // model truth, not an observable
  double chi_im = 0.0;
};

enum class Execution { Serial, Parallel };

std::vector<ScanRecord> run_intensity_scan(const ScanConfig& config,
                                           Execution exec = Execution::Parallel);

// Needs pinhole.enabled. Probe and both controls must share one waist for
// the single-profile induced lens.
std::vector<ScanRecord> run_pinhole_scan(const ScanConfig& config,
                                         Execution exec = Execution::Parallel);

// Intensity scan packaged for fitting; sigmas = relative_sigma * noiseless
// value (all ones when relative_sigma is 0).
SpectrumData synthesize_dataset(const ScanConfig& config);

// Packages already computed records the same way synthesize_dataset does.
SpectrumData to_spectrum(const ScanConfig& config, const std::vector<ScanRecord>& records);

// Columns: delta_mhz,intensity_ratio,pinhole_raw,pinhole_norm,chi_re,chi_im,
// gain_shaping. Absent pinhole values are empty cells.
void write_scan_csv(std::ostream& os, const std::vector<ScanRecord>& records);

// Line plots: intensity ratio, plus normalized pinhole transmission when
// present.
void write_scan_svg(std::ostream& os, const std::vector<ScanRecord>& records,
                    const std::string& title);

}  // namespace vapor
