#pragma once

// Experimental knobs -> susceptibility model.
//
// Resonance strengths follow a strictly linear rule with one calibration
// constant kappa:
//
//   S_gain = kappa * N * f87 * eta * P_gain
//   S_loss = kappa * N * f85 * eta * P_loss
//
// Hyperfine splittings, single-photon detuning, temperature and buffer gas
// are carried as metadata only.

#include <string_view>

#include "vapor/lineshape.hpp"

namespace vapor {

struct VaporCellConfig {
  double length_cm = 7.5;
  double temperature_c = 90.0;
  double total_density_cm3 = 2.4e12;
  double fraction_87 = 0.28;
  double fraction_85 = 0.72;
  double buffer_gas_torr = 10.0;

  double length_m() const noexcept { return length_cm * 1e-2; }
};

struct ControlLaserConfig {
  double power_mw = 100.0;
  double waist_mm = 1.2;
  double raman_offset_mhz = 0.0;
  double hwhm_mhz = 0.1;
  double single_photon_detuning_ghz = 16.0;
};

inline constexpr double kHyperfine87Ghz = 6.834;
inline constexpr double kHyperfine85Ghz = 3.035;
inline constexpr double kDefaultTargetDeltaN = 1e-6;

struct VaporScenario {
  VaporCellConfig cell;
  ControlLaserConfig gain_control;  // drives the 87Rb gain line
  ControlLaserConfig loss_control;  // drives the 85Rb absorption line
  double pumping_efficiency = 0.1;
  double kappa = 0.0;  // MHz per (atoms/cm^3 * mW)
  double hyperfine_87_ghz = kHyperfine87Ghz;
  double hyperfine_85_ghz = kHyperfine85Ghz;
};

// Geometry used throughout: gain at -0.1 MHz, absorption at +0.1 MHz, both
// 0.1 MHz hwhm, loss-control power balanced so the two strengths are equal.
// kappa is left at zero.
VaporScenario default_geometry();

// default_geometry() calibrated to delta n = 1e-6.
VaporScenario default_scenario();

// kappa of default_scenario(); used when a config omits kappa.
double default_kappa();

void validate(const VaporScenario& s);

double gain_strength(const VaporScenario& s);
double loss_strength(const VaporScenario& s);

SusceptibilityModel build_model(const VaporScenario& s);

// Exchanges the two Raman offsets so the gain and absorption lines swap
// places (the reduced-index ordering).
VaporScenario swap_order(VaporScenario s);

// Requires the equal-strength, equal-width configuration. Inverts the
// midpoint closed form chi'(mid) = S*s/(hwhm^2 + s^2/4) together with
// n = sqrt(1 + chi'), so peak_delta_n reproduces the target exactly. The
// kappa field of `s` is ignored. A zero target returns 0.
double calibrate_kappa(const VaporScenario& s, double target_delta_n);

struct PeakIndex {
  double delta_mhz;  // chi'' zero crossing between the two lines
  double delta_n;    // Re n - 1 there
};

PeakIndex peak_delta_n(const VaporScenario& s);

struct IndexEstimate {
  double n;
  bool clamped;
  std::string_view label;
};

// Indicative linear scaling anchored at n = 2 for 1e15 atoms/cm^3; not a
// physical model. Clamped (with the flag set) above the anchor density.
IndexEstimate max_index_estimate(double density_cm3);

}  // namespace vapor
