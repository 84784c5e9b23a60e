#pragma once

// Scalar paraxial optics of the probe: Gaussian sources, the induced lens of
// the driven vapor, angular-spectrum propagation, ABCD cross-checks and
// pinhole transmission.
//
// Units: wavelengths in nm, waists in mm, pitch and pinhole radii in um,
// distances in m. Field amplitudes are normalized so |a|^2 is intensity;
// power = sum |a|^2 * pitch^2.

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace vapor {

struct GaussianBeam {
  double wavelength_nm = 780.2;
  double waist_mm = 1.2;
  double waist_location_m = 0.0;  // relative to the cell, positive downstream

  double rayleigh_range_m() const;
};

struct GridSpec {
  std::size_t size = 1024;
  double pitch_um = 15.0;
};

void validate(const GaussianBeam& beam);
void validate(const GridSpec& grid);

class ComplexField {
 public:
  ComplexField(std::size_t n, double pitch_um, double wavelength_nm);

  std::size_t size() const noexcept { return n_; }
  double pitch_um() const noexcept { return pitch_um_; }
  double pitch_m() const noexcept { return pitch_um_ * 1e-6; }
  double wavelength_nm() const noexcept { return wavelength_nm_; }
  double wavenumber() const noexcept;  // 1/m

  // Transverse coordinate of row/column index i; index n/2 is the axis.
  double coord_m(std::size_t i) const noexcept {
    return (static_cast<double>(i) - static_cast<double>(n_ / 2)) * pitch_m();
  }

  std::complex<double>& at(std::size_t row, std::size_t col) noexcept {
    return data_[row * n_ + col];
  }
  const std::complex<double>& at(std::size_t row, std::size_t col) const noexcept {
    return data_[row * n_ + col];
  }

  std::span<std::complex<double>> samples() noexcept { return data_; }
  std::span<const std::complex<double>> samples() const noexcept { return data_; }

  double total_power() const noexcept;
  double on_axis_intensity() const noexcept { return std::norm(at(n_ / 2, n_ / 2)); }

  friend bool operator==(const ComplexField&, const ComplexField&) = default;

 private:
  std::size_t n_;
  double pitch_um_;
  double wavelength_nm_;
  std::vector<std::complex<double>> data_;
};

// exp(-r^2/w^2) amplitude at the beam's location z = 0 (the cell), including
// the wavefront curvature when the waist lies elsewhere.
ComplexField gaussian_field(const GaussianBeam& beam, const GridSpec& grid);

struct InducedLens {
  double delta_n0 = 0.0;
  double control_waist_mm = 1.2;
  double cell_length_cm = 7.5;
  double alpha0_per_m = 0.0;  // on-axis intensity absorption; < 0 is gain
};

void validate(const InducedLens& lens);

// f = Wc^2 / (4 * dn0 * L) from exp(-2r^2/Wc^2) ~ 1 - 2r^2/Wc^2. Positive
// focuses. Returns +infinity when dn0 == 0.
double thin_lens_focal_length(const InducedLens& lens);

// Focal length of the parabola that reproduces the intensity-weighted
// <r . grad(phase)> of the Gaussian phase profile for a Gaussian probe of
// 1/e^2 radius w: f * (1 + w^2/Wc^2)^2. Governs the initial rate of change of
// the probe's second-moment width.
double effective_focal_length(const InducedLens& lens, double probe_waist_mm);

// Throws GridResolution unless the control waist spans >= 16 samples.
void check_medium_resolution(double pitch_um, double control_waist_mm);

// Single-slice transmission
//   t(r) = exp(i k0 dn0 g(r) L) * exp(-(alpha0/2) g(r) L),  g = exp(-2r^2/Wc^2).
ComplexField apply_medium(ComplexField field, const InducedLens& lens);

// Ideal parabolic lens exp(-i k r^2 / 2f).
ComplexField apply_thin_lens(ComplexField field, double focal_length_m);

struct SamplingReport {
  double pitch_m;
  double chirp_pitch_m;        // lambda * z / (N * pitch)
  double edge_power_fraction;  // power in the outer N/16 border after propagation
  bool ok;
  std::size_t suggested_size;
};

// Angular-spectrum transfer function for a fixed grid, wavelength and
// distance. Immutable after construction; apply() may run concurrently.
class AngularSpectrumPropagator {
 public:
  AngularSpectrumPropagator(std::size_t n, double pitch_um, double wavelength_nm,
                            double distance_m);

  double distance_m() const noexcept { return distance_m_; }

  // In-place propagation. Does not check wrap-around.
  void apply(ComplexField& field) const;

 private:
  std::size_t n_;
  double pitch_um_;
  double wavelength_nm_;
  double distance_m_;
  std::vector<std::complex<double>> transfer_;  // includes the 1/N^2 scaling
};

inline constexpr double kEdgePowerLimit = 1e-6;

SamplingReport sampling_report(const ComplexField& propagated, double distance_m);

// Scalar angular-spectrum propagation. Throws Aliasing when more than
// kEdgePowerLimit of the power ends up in the border band (the field would
// wrap around the periodic grid). distance 0 returns the input unchanged.
ComplexField propagate(ComplexField field, double distance_m);

// 1/e^2 intensity radius (mm) after an optional thin lens at the cell and
// free-space distance z_after, from the complex beam parameter. Pass
// +infinity for no lens.
double abcd_spot_size(const GaussianBeam& beam, double lens_f_m, double z_after_m);

// 1/e^2 radius (mm) from the second moment, w = sqrt(2 <r^2>), about the
// intensity centroid.
double second_moment_radius(const ComplexField& field);

// Power inside a centered disk over total power. Boundary cells are weighted
// by the fraction of their area inside the disk.
double pinhole_power(const ComplexField& field, double radius_um);
double pinhole_transmission(const ComplexField& field, double radius_um);

// Fractional area of each cell inside the centered disk, sparse. Cached by
// the scan so the geometry is computed once.
struct PinholeMask {
  struct Cell {
    std::size_t index;
    double weight;
  };
  std::vector<Cell> cells;

  static PinholeMask build(std::size_t n, double pitch_um, double radius_um);
  double power(const ComplexField& field) const noexcept;
};

// Binary layout, little-endian:
//   "VPFD" magic, uint32 version = 1, uint64 N, float64 pitch_um,
//   float64 wavelength_nm, then N*N (re, im) float64 pairs row-major.
void write_field_binary(std::ostream& os, const ComplexField& field);
ComplexField read_field_binary(std::istream& is);

// Intensity along the central row: columns x_um,intensity.
void write_intensity_slice_csv(std::ostream& os, const ComplexField& field);

}  // namespace vapor
