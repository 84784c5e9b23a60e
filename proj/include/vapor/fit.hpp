#pragma once

// Damped least-squares fitting of gain/absorption Lorentzians to intensity
// spectra.
//
// Forward model:  I(delta) = exp(-D * chi''(delta)) + baseline
//
// with chi'' the imaginary part of the Lorentzian sum (lineshape conventions)
// and D = k0 * L the optical depth scale. D is held fixed: it multiplies every
// strength, so fitting it alongside them is exactly degenerate.
//
// Free parameters, in order: (center, log hwhm, log strength) per line, then
// baseline. The log parameterization keeps widths and strengths positive.

#include <Eigen/Dense>
#include <iosfwd>
#include <span>
#include <vector>

#include "vapor/lineshape.hpp"

namespace vapor {

struct SpectrumData {
  std::vector<double> freqs_mhz;  // strictly increasing
  std::vector<double> values;
  std::vector<double> sigmas;  // > 0; all ones when unknown
};

void validate(const SpectrumData& data, std::size_t free_params);

struct FitParams {
  std::vector<Resonance> lines;
  double baseline = 0.0;
  double depth = 1.0;

  std::size_t free_count() const noexcept { return 3 * lines.size() + 1; }
};

Eigen::VectorXd pack(const FitParams& params);
FitParams unpack(const Eigen::VectorXd& free, const FitParams& shape);

// Imaginary part of the Lorentzian sum, identical to lineshape's chi''.
double fit_chi_im(const FitParams& params, double delta_mhz) noexcept;

std::vector<double> forward_model(const FitParams& params,
                                  std::span<const double> freqs_mhz);

// d forward_model / d free parameters (rows: frequencies).
Eigen::MatrixXd jacobian(const FitParams& params,
                         std::span<const double> freqs_mhz);

// Peak-based starting point. `kinds` has one entry per line (1 or 2 lines).
// Throws PeakNotFound when the trace has no extremum of the required sign.
FitParams initial_guess(const SpectrumData& data,
                        std::span<const ResonanceKind> kinds, double depth);

struct FitOptions {
  int max_iterations = 200;
  double initial_damping = 1e-3;
  double accept_factor = 0.3;
  double reject_factor = 2.0;
  double sse_tolerance = 1e-10;       // relative SSE change
  double gradient_tolerance = 1e-10;  // infinity norm
};

struct FitResult {
  FitParams params;
  Eigen::MatrixXd covariance;  // free-parameter space, SSE/(n-p) * pinv(JtWJ)
  std::vector<double> std_errors;  // natural units, same order as pack()
  double residual_norm = 0.0;      // weighted SSE
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  bool rank_deficient = false;  // final normal matrix needed the pseudo-inverse
  std::size_t dof = 0;
};

// Throws SingularNormalMatrix when the starting normal matrix is rank
// deficient. Running out of iterations returns the best point with
// converged = false.
FitResult fit(const SpectrumData& data, const FitParams& init,
              const FitOptions& options = {});

struct ChiPrimeCurve {
  std::vector<double> freqs_mhz;
  std::vector<double> chi_re;
  std::vector<double> delta_n;  // chi' / 2
};

// Needs a converged fit with one gain and one absorption line.
ChiPrimeCurve predict_chi_prime(const FitResult& result,
                                std::span<const double> freqs_mhz);

// CSV with header freq_mhz,value,sigma (sigma column optional on input).
void write_spectrum_csv(std::ostream& os, const SpectrumData& data);
SpectrumData read_spectrum_csv(std::istream& is);

// key=value report, one entry per line.
void write_fit_report(std::ostream& os, const FitResult& result);
void write_chi_prime_csv(std::ostream& os, const ChiPrimeCurve& curve);

}  // namespace vapor
