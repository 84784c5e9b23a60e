#include "vapor/lineshape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "vapor/error.hpp"

namespace vapor {
namespace {

double sigma_of(ResonanceKind kind) {
  return kind == ResonanceKind::Gain ? 1.0 : -1.0;
}

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

// Bisection on a bracket whose endpoints have opposite signs. Stops once
// |f| <= tol or the bracket collapses to adjacent doubles.
template <class F>
double bisect(F&& f, double a, double fa, double b, double tol) {
  for (int iter = 0; iter < 256; ++iter) {
    const double m = 0.5 * (a + b);
    if (m == a || m == b) return m;
    const double fm = f(m);
    if (std::abs(fm) <= tol) return m;
    if (sign_of(fm) == sign_of(fa)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

const char* to_string(ResonanceKind kind) noexcept {
  return kind == ResonanceKind::Gain ? "gain" : "absorption";
}

void validate(const Resonance& line) {
  require(std::isfinite(line.center_mhz), "resonance center must be finite");
  require(std::isfinite(line.hwhm_mhz) && line.hwhm_mhz > 0.0,
          "resonance hwhm must be > 0");
  require(std::isfinite(line.strength) && line.strength >= 0.0,
          "resonance strength must be >= 0 (sign is carried by kind)");
}

SusceptibilityModel::SusceptibilityModel(std::vector<Resonance> lines,
                                         double background)
    : lines_(std::move(lines)), background_(background) {
  for (const auto& line : lines_) validate(line);
  require(std::isfinite(background_), "background must be finite");
}

ComplexChi SusceptibilityModel::chi(double delta) const noexcept {
  ComplexChi sum{background_, 0.0};
  for (const auto& l : lines_) {
    sum += sigma_of(l.kind) * l.strength /
           ComplexChi{delta - l.center_mhz, l.hwhm_mhz};
  }
  return sum;
}

ComplexChi SusceptibilityModel::d_chi(double delta) const noexcept {
  ComplexChi sum{};
  for (const auto& l : lines_) {
    const ComplexChi z{delta - l.center_mhz, l.hwhm_mhz};
    sum -= sigma_of(l.kind) * l.strength / (z * z);
  }
  return sum;
}

ComplexChi SusceptibilityModel::d2_chi(double delta) const noexcept {
  ComplexChi sum{};
  for (const auto& l : lines_) {
    const ComplexChi z{delta - l.center_mhz, l.hwhm_mhz};
    sum += 2.0 * sigma_of(l.kind) * l.strength / (z * z * z);
  }
  return sum;
}

double SusceptibilityModel::min_hwhm() const noexcept {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& l : lines_) m = std::min(m, l.hwhm_mhz);
  return m;
}

double SusceptibilityModel::max_hwhm() const noexcept {
  double m = 0.0;
  for (const auto& l : lines_) m = std::max(m, l.hwhm_mhz);
  return m;
}

double SusceptibilityModel::peak_scale() const noexcept {
  double m = 0.0;
  for (const auto& l : lines_) m = std::max(m, l.strength / l.hwhm_mhz);
  return m;
}

ComplexChi chi_at(const SusceptibilityModel& model, double delta) noexcept {
  return model.chi(delta);
}

std::complex<double> refractive_index(ComplexChi chi) noexcept {
  return std::sqrt(1.0 + chi);
}

double intensity_absorption(ComplexChi chi, double wavelength_nm) {
  require(wavelength_nm > 0.0, "wavelength must be > 0");
  const double k0 = 2.0 * std::numbers::pi / (wavelength_nm * 1e-9);
  return 2.0 * k0 * refractive_index(chi).imag();
}

std::vector<double> im_zero_crossings(const SusceptibilityModel& model,
                                      double lo, double hi, double step) {
  require(std::isfinite(lo) && std::isfinite(hi) && lo < hi,
          "zero-crossing window must satisfy lo < hi");
  require(std::isfinite(step) && step > 0.0, "grid step must be > 0");
  if (step >= model.min_hwhm()) {
    fail(ErrorCode::WindowTooCoarse,
         "grid step " + std::to_string(step) +
             " MHz is not smaller than the narrowest hwhm " +
             std::to_string(model.min_hwhm()) + " MHz");
  }

  const double tol = 1e-12 * model.peak_scale();
  auto im = [&](double x) { return model.chi(x).imag(); };

  const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / step));
  std::vector<double> roots;
  std::optional<std::pair<double, double>> last;  // last point with |v| > tol
  for (std::size_t i = 0; i <= n; ++i) {
    const double x = i == n ? hi : std::min(hi, lo + step * static_cast<double>(i));
    const double v = im(x);
    if (std::abs(v) <= tol) continue;
    if (last && sign_of(v) != sign_of(last->second)) {
      roots.push_back(bisect(im, last->first, last->second, x, tol));
    }
    last = {x, v};
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

Extremum re_extremum_near(const SusceptibilityModel& model, double guess) {
  require(std::isfinite(guess), "extremum guess must be finite");
  if (model.resonances().empty()) {
    fail(ErrorCode::NoExtremum, "model has no resonances");
  }
  const double radius = 5.0 * model.max_hwhm();
  const double h = model.min_hwhm() / 20.0;
  const auto steps = static_cast<std::size_t>(std::ceil(radius / h));
  auto slope = [&](double x) { return model.d_chi(x).real(); };

  struct Found {
    double x;
    Curvature curvature;
  };

  // Walk away from the guess in one direction; the first sign change of the
  // slope (ignoring exact zeros) is bisected.
  auto walk = [&](double dir) -> std::optional<Found> {
    double px = guess;
    double pv = slope(guess);
    std::size_t start = 1;
    if (pv == 0.0) {
      // Let the first nonzero neighbour on each side decide.
      const double l = slope(guess - h);
      const double r = slope(guess + h);
      if (sign_of(l) * sign_of(r) < 0) {
        return Found{guess, l > 0.0 ? Curvature::Maximum : Curvature::Minimum};
      }
      px = guess + dir * h;
      pv = slope(px);
      start = 2;
    }
    for (std::size_t k = start; k <= steps; ++k) {
      const double x = guess + dir * h * static_cast<double>(k);
      const double v = slope(x);
      if (v == 0.0) continue;
      if (pv != 0.0 && sign_of(v) != sign_of(pv)) {
        const double lo = dir > 0 ? px : x;
        const double hi = dir > 0 ? x : px;
        const double flo = dir > 0 ? pv : v;
        const double root = bisect(slope, lo, flo, hi, 0.0);
        return Found{root, flo > 0.0 ? Curvature::Maximum : Curvature::Minimum};
      }
      px = x;
      pv = v;
    }
    return std::nullopt;
  };

  const auto left = walk(-1.0);
  const auto right = walk(+1.0);
  if (!left && !right) {
    fail(ErrorCode::NoExtremum,
         "d chi'/d delta does not change sign within +-" +
             std::to_string(radius) + " MHz of " + std::to_string(guess));
  }
  Found best;
  if (left && right) {
    best = std::abs(right->x - guess) < std::abs(left->x - guess) ? *right : *left;
  } else {
    best = left ? *left : *right;
  }
  return {best.x, model.chi(best.x).real(), best.curvature};
}

UniformSamples sample_chi_im(const SusceptibilityModel& model, double lo,
                             double hi, std::size_t count) {
  require(count >= 2 && lo < hi, "sample_chi_im needs count >= 2 and lo < hi");
  UniformSamples s;
  s.start_mhz = lo;
  s.step_mhz = (hi - lo) / static_cast<double>(count - 1);
  s.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) s.values[i] = model.chi(s.at(i)).imag();
  return s;
}

}  // namespace vapor
