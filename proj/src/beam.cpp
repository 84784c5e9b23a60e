#include "vapor/beam.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "vapor/error.hpp"
#include "vapor/fft.hpp"

namespace vapor {
namespace {

constexpr double kPi = std::numbers::pi;

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace

double GaussianBeam::rayleigh_range_m() const {
  const double w0 = waist_mm * 1e-3;
  return kPi * w0 * w0 / (wavelength_nm * 1e-9);
}

void validate(const GaussianBeam& beam) {
  require(beam.wavelength_nm > 0.0, "beam wavelength_nm must be > 0");
  require(beam.waist_mm > 0.0, "beam waist_mm must be > 0");
  require(std::isfinite(beam.waist_location_m), "waist_location_m must be finite");
}

void validate(const GridSpec& grid) {
  require(is_power_of_two(grid.size) && grid.size >= 4,
          "grid size must be a power of two >= 4");
  require(grid.pitch_um > 0.0, "grid pitch_um must be > 0");
}

ComplexField::ComplexField(std::size_t n, double pitch_um, double wavelength_nm)
    : n_(n), pitch_um_(pitch_um), wavelength_nm_(wavelength_nm), data_(n * n) {
  require(is_power_of_two(n), "field size must be a power of two");
  require(pitch_um > 0.0, "field pitch must be > 0");
  require(wavelength_nm > 0.0, "field wavelength must be > 0");
}

double ComplexField::wavenumber() const noexcept {
  return 2.0 * kPi / (wavelength_nm_ * 1e-9);
}

double ComplexField::total_power() const noexcept {
  double sum = 0.0;
  for (const auto& a : data_) sum += std::norm(a);
  return sum * pitch_m() * pitch_m();
}

ComplexField gaussian_field(const GaussianBeam& beam, const GridSpec& grid) {
  validate(beam);
  validate(grid);
  ComplexField field(grid.size, grid.pitch_um, beam.wavelength_nm);
  const std::size_t n = grid.size;
  const double w0 = beam.waist_mm * 1e-3;

  if (beam.waist_location_m == 0.0) {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = field.coord_m(i);
      g[i] = std::exp(-x * x / (w0 * w0));
    }
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) field.at(r, c) = g[r] * g[c];
    return field;
  }

  // u = (q0 / q) exp(-i k r^2 / 2q), q = -z_waist + i zR, q0 = i zR.
  const double k = field.wavenumber();
  const std::complex<double> q0{0.0, beam.rayleigh_range_m()};
  const std::complex<double> q{-beam.waist_location_m, beam.rayleigh_range_m()};
  const std::complex<double> pre = q0 / q;
  const std::complex<double> coef = std::complex<double>{0.0, -k} / (2.0 * q);
  for (std::size_t r = 0; r < n; ++r) {
    const double y = field.coord_m(r);
    for (std::size_t c = 0; c < n; ++c) {
      const double x = field.coord_m(c);
      field.at(r, c) = pre * std::exp(coef * (x * x + y * y));
    }
  }
  return field;
}

void validate(const InducedLens& lens) {
  require(std::isfinite(lens.delta_n0), "lens delta_n0 must be finite");
  require(std::isfinite(lens.alpha0_per_m), "lens alpha0 must be finite");
  require(lens.control_waist_mm > 0.0, "lens control_waist_mm must be > 0");
  require(lens.cell_length_cm > 0.0, "lens cell_length_cm must be > 0");
}

double thin_lens_focal_length(const InducedLens& lens) {
  validate(lens);
  if (lens.delta_n0 == 0.0) return std::numeric_limits<double>::infinity();
  const double wc = lens.control_waist_mm * 1e-3;
  return wc * wc / (4.0 * lens.delta_n0 * lens.cell_length_cm * 1e-2);
}

double effective_focal_length(const InducedLens& lens, double probe_waist_mm) {
  require(probe_waist_mm > 0.0, "probe waist must be > 0");
  const double ratio = probe_waist_mm / lens.control_waist_mm;
  const double factor = 1.0 + ratio * ratio;
  return thin_lens_focal_length(lens) * factor * factor;
}

void check_medium_resolution(double pitch_um, double control_waist_mm) {
  if (control_waist_mm * 1e3 / pitch_um < 16.0) {
    fail(ErrorCode::GridResolution,
         "grid pitch " + std::to_string(pitch_um) +
             " um resolves the control waist with fewer than 16 samples");
  }
}

ComplexField apply_medium(ComplexField field, const InducedLens& lens) {
  validate(lens);
  check_medium_resolution(field.pitch_um(), lens.control_waist_mm);
  const double wc = lens.control_waist_mm * 1e-3;
  const double length = lens.cell_length_cm * 1e-2;
  const std::complex<double> exponent{-0.5 * lens.alpha0_per_m * length,
                                      field.wavenumber() * lens.delta_n0 * length};

  // The mask depends only on (|row - c|, |col - c|): tabulate one quadrant.
  const std::size_t n = field.size();
  const std::size_t c = n / 2;
  std::vector<double> g1(c + 1);
  for (std::size_t d = 0; d <= c; ++d) {
    const double x = static_cast<double>(d) * field.pitch_m();
    g1[d] = std::exp(-2.0 * x * x / (wc * wc));
  }
  std::vector<std::complex<double>> quadrant((c + 1) * (c + 1));
  for (std::size_t dr = 0; dr <= c; ++dr)
    for (std::size_t dc = 0; dc <= c; ++dc)
      quadrant[dr * (c + 1) + dc] = std::exp(exponent * (g1[dr] * g1[dc]));

  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t dr = r >= c ? r - c : c - r;
    const auto* row = &quadrant[dr * (c + 1)];
    for (std::size_t col = 0; col < n; ++col) {
      const std::size_t dc = col >= c ? col - c : c - col;
      field.at(r, col) *= row[dc];
    }
  }
  return field;
}

ComplexField apply_thin_lens(ComplexField field, double focal_length_m) {
  require(focal_length_m != 0.0 && !std::isnan(focal_length_m),
          "thin lens focal length must be nonzero");
  if (std::isinf(focal_length_m)) return field;
  const double k = field.wavenumber();
  const std::size_t n = field.size();
  for (std::size_t r = 0; r < n; ++r) {
    const double y = field.coord_m(r);
    for (std::size_t c = 0; c < n; ++c) {
      const double x = field.coord_m(c);
      field.at(r, c) *= std::polar(1.0, -k * (x * x + y * y) / (2.0 * focal_length_m));
    }
  }
  return field;
}

AngularSpectrumPropagator::AngularSpectrumPropagator(std::size_t n,
                                                     double pitch_um,
                                                     double wavelength_nm,
                                                     double distance_m)
    : n_(n),
      pitch_um_(pitch_um),
      wavelength_nm_(wavelength_nm),
      distance_m_(distance_m),
      transfer_(n * n) {
  validate(GridSpec{n, pitch_um});
  require(wavelength_nm > 0.0, "wavelength must be > 0");
  require(std::isfinite(distance_m), "propagation distance must be finite");

  const double k = 2.0 * kPi / (wavelength_nm * 1e-9);
  const double df = 1.0 / (static_cast<double>(n) * pitch_um * 1e-6);
  const double norm = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
  std::vector<double> kx2(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double idx = i < n / 2 ? static_cast<double>(i)
                                 : static_cast<double>(i) - static_cast<double>(n);
    const double kx = 2.0 * kPi * idx * df;
    kx2[i] = kx * kx;
  }
  // The carrier exp(ikz) is dropped; kz - k is evaluated without cancellation.
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      const double kt2 = kx2[r] + kx2[c];
      std::complex<double> h;
      if (kt2 <= k * k) {
        const double kz = std::sqrt(k * k - kt2);
        h = std::polar(norm, -kt2 / (k + kz) * distance_m);
      } else {
        const double kappa = std::sqrt(kt2 - k * k);
        h = std::polar(norm * std::exp(-kappa * std::abs(distance_m)),
                       -k * distance_m);
      }
      transfer_[r * n + c] = h;
    }
  }
}

void AngularSpectrumPropagator::apply(ComplexField& field) const {
  require(field.size() == n_ && field.pitch_um() == pitch_um_ &&
              field.wavelength_nm() == wavelength_nm_,
          "propagator grid does not match the field");
  auto data = field.samples();
  fft::transform_2d(data, n_, fft::Direction::Forward);
  for (std::size_t i = 0; i < data.size(); ++i) data[i] *= transfer_[i];
  fft::transform_2d(data, n_, fft::Direction::Inverse);
}

SamplingReport sampling_report(const ComplexField& field, double distance_m) {
  const std::size_t n = field.size();
  const std::size_t band = std::max<std::size_t>(1, n / 16);
  double edge = 0.0;
  double total = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const bool edge_row = r < band || r >= n - band;
    for (std::size_t c = 0; c < n; ++c) {
      const double p = std::norm(field.at(r, c));
      total += p;
      if (edge_row || c < band || c >= n - band) edge += p;
    }
  }
  SamplingReport rep;
  rep.pitch_m = field.pitch_m();
  rep.chirp_pitch_m = field.wavelength_nm() * 1e-9 * std::abs(distance_m) /
                      (static_cast<double>(n) * field.pitch_m());
  rep.edge_power_fraction = total > 0.0 ? edge / total : 0.0;
  rep.ok = rep.edge_power_fraction <= kEdgePowerLimit;
  rep.suggested_size = rep.ok ? n : 2 * n;
  return rep;
}

ComplexField propagate(ComplexField field, double distance_m) {
  require(std::isfinite(distance_m), "propagation distance must be finite");
  if (distance_m == 0.0) return field;
  const AngularSpectrumPropagator prop(field.size(), field.pitch_um(),
                                       field.wavelength_nm(), distance_m);
  prop.apply(field);
  const auto rep = sampling_report(field, distance_m);
  if (!rep.ok) {
    fail(ErrorCode::Aliasing,
         "propagated field reaches the grid border (edge power fraction " +
             std::to_string(rep.edge_power_fraction) + "); use N = " +
             std::to_string(rep.suggested_size) + " or a larger pitch");
  }
  return field;
}

double abcd_spot_size(const GaussianBeam& beam, double lens_f_m, double z_after_m) {
  validate(beam);
  require(lens_f_m != 0.0 && !std::isnan(lens_f_m), "lens focal length must be nonzero");
  const double lambda = beam.wavelength_nm * 1e-9;
  std::complex<double> q{-beam.waist_location_m, beam.rayleigh_range_m()};
  if (std::isfinite(lens_f_m)) q = 1.0 / (1.0 / q - 1.0 / lens_f_m);
  q += z_after_m;
  const double inv_im = (1.0 / q).imag();
  return std::sqrt(-lambda / (kPi * inv_im)) * 1e3;
}

double second_moment_radius(const ComplexField& field) {
  const std::size_t n = field.size();
  double p = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const double y = field.coord_m(r);
    for (std::size_t c = 0; c < n; ++c) {
      const double i = std::norm(field.at(r, c));
      p += i;
      sx += i * field.coord_m(c);
      sy += i * y;
    }
  }
  require(p > 0.0, "second_moment_radius of a zero field");
  const double cx = sx / p;
  const double cy = sy / p;
  double m2 = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const double dy = field.coord_m(r) - cy;
    for (std::size_t c = 0; c < n; ++c) {
      const double dx = field.coord_m(c) - cx;
      m2 += std::norm(field.at(r, c)) * (dx * dx + dy * dy);
    }
  }
  return std::sqrt(2.0 * m2 / p) * 1e3;
}

PinholeMask PinholeMask::build(std::size_t n, double pitch_um, double radius_um) {
  require(std::isfinite(radius_um), "pinhole radius must be finite");
  if (radius_um < 2.0 * pitch_um) {
    fail(ErrorCode::PinholeUnresolved,
         "pinhole radius " + std::to_string(radius_um) +
             " um is below two grid pitches (" + std::to_string(2.0 * pitch_um) + " um)");
  }
  constexpr int kSub = 64;
  const double half = 0.5 * pitch_um;
  const double r2 = radius_um * radius_um;
  const auto c = static_cast<std::ptrdiff_t>(n / 2);
  const auto reach = static_cast<std::ptrdiff_t>(std::ceil(radius_um / pitch_um)) + 1;

  PinholeMask mask;
  for (std::ptrdiff_t dr = -reach; dr <= reach; ++dr) {
    const std::ptrdiff_t row = c + dr;
    if (row < 0 || row >= static_cast<std::ptrdiff_t>(n)) continue;
    const double y = static_cast<double>(dr) * pitch_um;
    for (std::ptrdiff_t dc = -reach; dc <= reach; ++dc) {
      const std::ptrdiff_t col = c + dc;
      if (col < 0 || col >= static_cast<std::ptrdiff_t>(n)) continue;
      const double x = static_cast<double>(dc) * pitch_um;
      const double nx = std::max(0.0, std::abs(x) - half);
      const double ny = std::max(0.0, std::abs(y) - half);
      if (nx * nx + ny * ny >= r2) continue;
      const double fx = std::abs(x) + half;
      const double fy = std::abs(y) + half;
      double weight = 1.0;
      if (fx * fx + fy * fy > r2) {
        int inside = 0;
        for (int a = 0; a < kSub; ++a) {
          const double sy = y - half + (a + 0.5) * pitch_um / kSub;
          for (int b = 0; b < kSub; ++b) {
            const double sx = x - half + (b + 0.5) * pitch_um / kSub;
            inside += (sx * sx + sy * sy <= r2);
          }
        }
        weight = static_cast<double>(inside) / (kSub * kSub);
      }
      if (weight > 0.0) {
        mask.cells.push_back({static_cast<std::size_t>(row) * n +
                                  static_cast<std::size_t>(col),
                              weight});
      }
    }
  }
  return mask;
}

double PinholeMask::power(const ComplexField& field) const noexcept {
  const auto data = field.samples();
  double sum = 0.0;
  for (const auto& cell : cells) sum += cell.weight * std::norm(data[cell.index]);
  return sum * field.pitch_m() * field.pitch_m();
}

double pinhole_power(const ComplexField& field, double radius_um) {
  return PinholeMask::build(field.size(), field.pitch_um(), radius_um).power(field);
}

double pinhole_transmission(const ComplexField& field, double radius_um) {
  const double total = field.total_power();
  require(total > 0.0, "pinhole_transmission of a zero field");
  return pinhole_power(field, radius_um) / total;
}

}  // namespace vapor
