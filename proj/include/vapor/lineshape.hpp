#pragma once

// Complex susceptibility of superposed gain and absorption Lorentzians.
//
// Conventions: fields evolve as exp(i(kz - wt)), so chi'' > 0 is loss and
// the intensity decays as exp(-k0 * chi'' * z). Detunings are in MHz relative
// to an arbitrary scan origin. Each line contributes
//
//   sigma * S / ((delta - center) + i * hwhm),  sigma = +1 gain, -1 absorption
//
// so an isolated absorption line peaks at chi'' = +S/hwhm and an isolated
// gain line at chi'' = -S/hwhm.

#include <complex>
#include <span>
#include <vector>

namespace vapor {

using ComplexChi = std::complex<double>;

enum class ResonanceKind { Gain, Absorption };

const char* to_string(ResonanceKind kind) noexcept;

struct Resonance {
  double center_mhz = 0.0;
  double hwhm_mhz = 0.1;
  double strength = 0.0;  // MHz; peak |chi''| = strength / hwhm
  ResonanceKind kind = ResonanceKind::Absorption;
};

void validate(const Resonance& line);

class SusceptibilityModel {
 public:
  SusceptibilityModel() = default;
  explicit SusceptibilityModel(std::vector<Resonance> lines,
                               double background = 0.0);

  const std::vector<Resonance>& resonances() const noexcept { return lines_; }
  double background() const noexcept { return background_; }

  ComplexChi chi(double delta_mhz) const noexcept;
  // Analytic first and second derivatives with respect to detuning.
  ComplexChi d_chi(double delta_mhz) const noexcept;
  ComplexChi d2_chi(double delta_mhz) const noexcept;

  double min_hwhm() const noexcept;
  double max_hwhm() const noexcept;
  // max_j S_j / hwhm_j; the natural chi scale used by root-finding tolerances.
  double peak_scale() const noexcept;

 private:
  std::vector<Resonance> lines_;
  double background_ = 0.0;
};

ComplexChi chi_at(const SusceptibilityModel& model, double delta_mhz) noexcept;

// Principal square root of 1 + chi. Re(n) is the phase index.
std::complex<double> refractive_index(ComplexChi chi) noexcept;

// Intensity absorption coefficient 2 * k0 * Im(n) in 1/m. Negative means gain.
double intensity_absorption(ComplexChi chi, double wavelength_nm);

// Sign changes of chi'' on [lo, hi], bracketed on a uniform grid and refined
// by bisection. Sorted ascending. Throws WindowTooCoarse when
// step >= min hwhm.
std::vector<double> im_zero_crossings(const SusceptibilityModel& model,
                                      double lo_mhz, double hi_mhz,
                                      double step_mhz);

enum class Curvature { Maximum, Minimum };

struct Extremum {
  double delta_mhz;
  double chi_re;
  Curvature curvature;
};

// Nearest local extremum of chi' to `guess_mhz`, searched within
// +-5 * max hwhm. Throws NoExtremum if d chi'/d delta keeps its sign there.
Extremum re_extremum_near(const SusceptibilityModel& model, double guess_mhz);

struct UniformSamples {
  double start_mhz = 0.0;
  double step_mhz = 1.0;
  std::vector<double> values;

  double at(std::size_t i) const noexcept {
    return start_mhz + step_mhz * static_cast<double>(i);
  }
  double stop_mhz() const noexcept {
    return values.empty() ? start_mhz : at(values.size() - 1);
  }
};

UniformSamples sample_chi_im(const SusceptibilityModel& model, double lo_mhz,
                             double hi_mhz, std::size_t count);

struct KkReconstruction {
  std::vector<double> chi_re;  // approximates chi' - background
  // Set when some supplied line sits closer than 20 hwhm to a window edge.
  bool narrow_window = false;
};

// Discrete Hilbert transform of uniformly sampled chi'' (zero-padded FFT).
// Truncating the window at half-width W leaves an error of order S*hwhm/W.
KkReconstruction kk_reconstruct_re(const UniformSamples& chi_im,
                                   std::span<const Resonance> lines = {});

}  // namespace vapor
