#include "vapor/medium.hpp"

#include <algorithm>
#include <cmath>

#include "vapor/error.hpp"

namespace vapor {
namespace {

constexpr double kAnchorDensity = 1e15;
constexpr double kAnchorIndex = 2.0;

double strength_per_kappa(const VaporScenario& s, double fraction,
                          double power_mw) {
  return s.cell.total_density_cm3 * fraction * s.pumping_efficiency * power_mw;
}

}  // namespace

VaporScenario default_geometry() {
  VaporScenario s;
  s.gain_control.raman_offset_mhz = -0.1;
  s.loss_control.raman_offset_mhz = +0.1;
  s.loss_control.power_mw =
      s.gain_control.power_mw * s.cell.fraction_87 / s.cell.fraction_85;
  return s;
}

VaporScenario default_scenario() {
  VaporScenario s = default_geometry();
  s.kappa = calibrate_kappa(s, kDefaultTargetDeltaN);
  return s;
}

double default_kappa() {
  static const double kappa = default_scenario().kappa;
  return kappa;
}

void validate(const VaporScenario& s) {
  const auto& c = s.cell;
  require(c.length_cm > 0.0, "cell.length_cm must be > 0");
  require(c.total_density_cm3 > 0.0, "cell.total_density_cm3 must be > 0");
  require(c.fraction_87 >= 0.0 && c.fraction_87 <= 1.0,
          "cell.fraction_87 must lie in [0, 1]");
  require(c.fraction_85 >= 0.0 && c.fraction_85 <= 1.0,
          "cell.fraction_85 must lie in [0, 1]");
  require(std::abs(c.fraction_87 + c.fraction_85 - 1.0) <= 1e-9,
          "cell.fraction_87 + cell.fraction_85 must equal 1");
  for (const auto* ctl : {&s.gain_control, &s.loss_control}) {
    require(ctl->power_mw >= 0.0, "control power_mw must be >= 0");
    require(ctl->waist_mm > 0.0, "control waist_mm must be > 0");
    require(ctl->hwhm_mhz > 0.0, "control hwhm_mhz must be > 0");
    require(std::isfinite(ctl->raman_offset_mhz),
            "control raman_offset_mhz must be finite");
  }
  require(s.pumping_efficiency >= 0.0 && s.pumping_efficiency <= 1.0,
          "pumping_efficiency must lie in [0, 1]");
  require(std::isfinite(s.kappa) && s.kappa >= 0.0, "kappa must be >= 0");
}

double gain_strength(const VaporScenario& s) {
  return s.kappa *
         strength_per_kappa(s, s.cell.fraction_87, s.gain_control.power_mw);
}

double loss_strength(const VaporScenario& s) {
  return s.kappa *
         strength_per_kappa(s, s.cell.fraction_85, s.loss_control.power_mw);
}

SusceptibilityModel build_model(const VaporScenario& s) {
  validate(s);
  return SusceptibilityModel({
      {s.gain_control.raman_offset_mhz, s.gain_control.hwhm_mhz,
       gain_strength(s), ResonanceKind::Gain},
      {s.loss_control.raman_offset_mhz, s.loss_control.hwhm_mhz,
       loss_strength(s), ResonanceKind::Absorption},
  });
}

VaporScenario swap_order(VaporScenario s) {
  std::swap(s.gain_control.raman_offset_mhz, s.loss_control.raman_offset_mhz);
  return s;
}

double calibrate_kappa(const VaporScenario& s, double target) {
  require(std::isfinite(target) && target >= 0.0,
          "calibration target delta n must be >= 0");
  VaporScenario probe = s;
  probe.kappa = 1.0;
  validate(probe);
  if (target == 0.0) return 0.0;

  const double spacing =
      s.loss_control.raman_offset_mhz - s.gain_control.raman_offset_mhz;
  if (spacing == 0.0) {
    fail(ErrorCode::DegenerateGeometry,
         "gain and loss resonances coincide; midpoint index is undefined");
  }
  const double gamma = s.gain_control.hwhm_mhz;
  require(std::abs(s.loss_control.hwhm_mhz - gamma) <= 1e-12 * gamma,
          "calibration needs equal gain and loss hwhm");
  const double unit_gain = gain_strength(probe);
  const double unit_loss = loss_strength(probe);
  if (unit_gain == 0.0 || unit_loss == 0.0) {
    fail(ErrorCode::DegenerateGeometry,
         "a resonance has zero strength per unit kappa (power, fraction or "
         "pumping efficiency is zero)");
  }
  require(std::abs(unit_gain - unit_loss) <= 1e-9 * unit_gain,
          "calibration needs equal gain and loss strengths");

  // Re sqrt(1 + chi') - 1 = target with chi'' = 0 at the midpoint.
  const double chi_mid = target * (2.0 + target);
  const double strength =
      chi_mid * (gamma * gamma + 0.25 * spacing * spacing) / spacing;
  if (strength < 0.0) {
    fail(ErrorCode::DegenerateGeometry,
         "a positive delta n needs the gain line below the loss line");
  }
  return strength / unit_gain;
}

PeakIndex peak_delta_n(const VaporScenario& s) {
  const SusceptibilityModel model = build_model(s);
  const double a = s.gain_control.raman_offset_mhz;
  const double b = s.loss_control.raman_offset_mhz;
  const double lo = std::min(a, b);
  const double hi = std::max(a, b);
  if (lo == hi) {
    fail(ErrorCode::DegenerateGeometry, "gain and loss resonances coincide");
  }
  const double step = std::min((hi - lo) / 50.0, model.min_hwhm() / 10.0);
  const auto roots = im_zero_crossings(model, lo, hi, step);
  if (roots.empty()) {
    fail(ErrorCode::NoZeroCrossing,
         "chi'' has no zero crossing between the two resonances");
  }
  const double mid = 0.5 * (lo + hi);
  const double root = *std::min_element(
      roots.begin(), roots.end(), [mid](double x, double y) {
        return std::abs(x - mid) < std::abs(y - mid);
      });
  return {root, refractive_index(model.chi(root)).real() - 1.0};
}

IndexEstimate max_index_estimate(double density) {
  require(std::isfinite(density) && density > 0.0, "density must be > 0");
  constexpr std::string_view label =
      "indicative scaling helper, not a physical model";
  if (density > kAnchorDensity) return {kAnchorIndex, true, label};
  return {1.0 + (kAnchorIndex - 1.0) * density / kAnchorDensity, false, label};
}

}  // namespace vapor
