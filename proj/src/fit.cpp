#include "vapor/fit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "vapor/error.hpp"

namespace vapor {
namespace {

// chi'' contribution sign: +1 for absorption (loss), -1 for gain.
double im_sign(ResonanceKind kind) {
  return kind == ResonanceKind::Absorption ? 1.0 : -1.0;
}

double median5(std::span<const double> v, std::size_t i) {
  const std::size_t lo = i >= 2 ? i - 2 : 0;
  const std::size_t hi = std::min(v.size(), i + 3);
  std::array<double, 5> w{};
  std::size_t k = 0;
  for (std::size_t j = lo; j < hi; ++j) w[k++] = v[j];
  std::sort(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(k));
  return k % 2 ? w[k / 2] : 0.5 * (w[k / 2 - 1] + w[k / 2]);
}

struct Residuals {
  Eigen::VectorXd r;  // (y - f) / sigma
  double sse = 0.0;
};

Residuals residuals(const SpectrumData& data, const FitParams& params) {
  const auto f = forward_model(params, data.freqs_mhz);
  Residuals out;
  out.r.resize(static_cast<Eigen::Index>(f.size()));
  for (std::size_t i = 0; i < f.size(); ++i) {
    out.r[static_cast<Eigen::Index>(i)] = (data.values[i] - f[i]) / data.sigmas[i];
  }
  out.sse = out.r.squaredNorm();
  return out;
}

Eigen::MatrixXd weighted_jacobian(const SpectrumData& data, const FitParams& params) {
  Eigen::MatrixXd j = jacobian(params, data.freqs_mhz);
  for (Eigen::Index i = 0; i < j.rows(); ++i) {
    j.row(i) /= data.sigmas[static_cast<std::size_t>(i)];
  }
  return j;
}

// Smallest eigenvalue of the normal matrix after scaling it to unit diagonal.
double scaled_min_eigenvalue(const Eigen::MatrixXd& normal) {
  const Eigen::VectorXd d = normal.diagonal();
  if ((d.array() <= 0.0).any()) return 0.0;
  const Eigen::VectorXd s = d.cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd scaled = s.asDiagonal() * normal * s.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(scaled, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

}  // namespace

void validate(const SpectrumData& data, std::size_t free_params) {
  const std::size_t n = data.freqs_mhz.size();
  require(data.values.size() == n && data.sigmas.size() == n,
          "spectrum columns must have equal length");
  require(n >= free_params + 1, "spectrum needs at least (free parameters + 1) points");
  for (std::size_t i = 0; i < n; ++i) {
    require(std::isfinite(data.freqs_mhz[i]) && std::isfinite(data.values[i]),
            "spectrum values must be finite");
    require(data.sigmas[i] > 0.0 && std::isfinite(data.sigmas[i]),
            "spectrum sigmas must be > 0");
    if (i > 0) {
      require(data.freqs_mhz[i] > data.freqs_mhz[i - 1],
              "spectrum frequencies must be strictly increasing");
    }
  }
}

Eigen::VectorXd pack(const FitParams& params) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(params.free_count()));
  Eigen::Index k = 0;
  for (const auto& l : params.lines) {
    require(l.hwhm_mhz > 0.0 && l.strength > 0.0,
            "fit parameters need hwhm > 0 and strength > 0");
    v[k++] = l.center_mhz;
    v[k++] = std::log(l.hwhm_mhz);
    v[k++] = std::log(l.strength);
  }
  v[k] = params.baseline;
  return v;
}

FitParams unpack(const Eigen::VectorXd& free, const FitParams& shape) {
  require(free.size() == static_cast<Eigen::Index>(shape.free_count()),
          "free-parameter vector has the wrong length");
  FitParams out = shape;
  Eigen::Index k = 0;
  for (auto& l : out.lines) {
    l.center_mhz = free[k++];
    l.hwhm_mhz = std::exp(free[k++]);
    l.strength = std::exp(free[k++]);
  }
  out.baseline = free[k];
  return out;
}

double fit_chi_im(const FitParams& params, double delta) noexcept {
  double sum = 0.0;
  for (const auto& l : params.lines) {
    const double x = delta - l.center_mhz;
    sum += im_sign(l.kind) * l.strength * l.hwhm_mhz / (x * x + l.hwhm_mhz * l.hwhm_mhz);
  }
  return sum;
}

std::vector<double> forward_model(const FitParams& params,
                                  std::span<const double> freqs) {
  std::vector<double> out(freqs.size());
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    out[i] = std::exp(-params.depth * fit_chi_im(params, freqs[i])) + params.baseline;
  }
  return out;
}

Eigen::MatrixXd jacobian(const FitParams& params, std::span<const double> freqs) {
  const auto n = static_cast<Eigen::Index>(freqs.size());
  Eigen::MatrixXd j(n, static_cast<Eigen::Index>(params.free_count()));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double delta = freqs[static_cast<std::size_t>(i)];
    // d f / d chi''
    const double dfdchi = -params.depth * std::exp(-params.depth * fit_chi_im(params, delta));
    Eigen::Index k = 0;
    for (const auto& l : params.lines) {
      const double x = delta - l.center_mhz;
      const double g = l.hwhm_mhz;
      const double den = x * x + g * g;
      const double amp = im_sign(l.kind) * l.strength;
      j(i, k++) = dfdchi * amp * 2.0 * g * x / (den * den);
      j(i, k++) = dfdchi * amp * g * (x * x - g * g) / (den * den);
      j(i, k++) = dfdchi * amp * g / den;
    }
    j(i, k) = 1.0;
  }
  return j;
}

FitParams initial_guess(const SpectrumData& data,
                        std::span<const ResonanceKind> kinds, double depth) {
  require(kinds.size() == 1 || kinds.size() == 2,
          "initial_guess supports one or two resonances");
  require(depth > 0.0, "optical depth scale must be > 0");
  const std::size_t n = data.values.size();
  require(n >= 7 && data.freqs_mhz.size() == n,
          "initial_guess needs at least 7 points");

  std::vector<double> smooth(n);
  for (std::size_t i = 0; i < n; ++i) smooth[i] = median5(data.values, i);

  const std::size_t edge = std::max<std::size_t>(1, std::min<std::size_t>(5, n / 10));
  double level = 0.0;
  for (std::size_t i = 0; i < edge; ++i) level += smooth[i] + smooth[n - 1 - i];
  level /= static_cast<double>(2 * edge);
  const double threshold = 1e-9 * std::max(1.0, std::abs(level));

  // Local extrema of the requested sign, ranked by prominence.
  auto extrema = [&](ResonanceKind kind) {
    const double sgn = kind == ResonanceKind::Gain ? 1.0 : -1.0;
    std::vector<std::size_t> idx;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double h = sgn * (smooth[i] - level);
      if (h <= threshold) continue;
      if (sgn * smooth[i] >= sgn * smooth[i - 1] && sgn * smooth[i] > sgn * smooth[i + 1]) {
        idx.push_back(i);
      }
    }
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return sgn * smooth[a] > sgn * smooth[b];
    });
    return idx;
  };

  std::vector<std::size_t> peaks;
  if (kinds.size() == 2 && kinds[0] == kinds[1]) {
    const auto ex = extrema(kinds[0]);
    if (ex.size() < 2) {
      fail(ErrorCode::PeakNotFound,
           std::string("fewer than two ") + to_string(kinds[0]) + " extrema in the trace");
    }
    peaks = {ex[0], ex[1]};
  } else {
    for (auto kind : kinds) {
      const auto ex = extrema(kind);
      if (ex.empty()) {
        fail(ErrorCode::PeakNotFound,
             std::string("no ") + to_string(kind) + " extremum in the trace");
      }
      peaks.push_back(ex[0]);
    }
  }

  // Half-prominence crossing distance walking from `p` in direction `dir`;
  // negative when the trace ends first.
  auto half_width = [&](std::size_t p, int dir) {
    const double h = smooth[p] - level;
    std::size_t i = p;
    for (;;) {
      if ((dir < 0 && i == 0) || (dir > 0 && i + 1 >= n)) return -1.0;
      const std::size_t j = dir < 0 ? i - 1 : i + 1;
      const double hj = smooth[j] - level;
      if (std::abs(hj) < 0.5 * std::abs(h) || hj * h <= 0.0) {
        const double hi = smooth[i] - level;
        const double t = (hi - 0.5 * h) / (hi - hj);
        const double x = data.freqs_mhz[i] + t * (data.freqs_mhz[j] - data.freqs_mhz[i]);
        return std::abs(x - data.freqs_mhz[p]);
      }
      i = j;
    }
  };

  FitParams out;
  out.depth = depth;
  out.baseline = level - 1.0;
  const double span = data.freqs_mhz.back() - data.freqs_mhz.front();
  const double min_width = 2.0 * span / static_cast<double>(n - 1);
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    const std::size_t p = peaks[k];
    const double left = half_width(p, -1);
    const double right = half_width(p, +1);
    double width;
    if (kinds.size() == 2) {
      // Use the flank facing away from the other line.
      const bool other_right = peaks[1 - k] > p;
      width = other_right ? left : right;
      if (width <= 0.0) width = other_right ? right : left;
    } else if (left > 0.0 && right > 0.0) {
      width = 0.5 * (left + right);
    } else {
      width = std::max(left, right);
    }
    width = std::max(width, min_width);

    const double ratio = std::max(smooth[p] - out.baseline, 1e-12);
    const double strength = std::max(width * std::abs(std::log(ratio)) / depth, 1e-300);
    out.lines.push_back({data.freqs_mhz[p], width, strength, kinds[k]});
  }
  return out;
}

FitResult fit(const SpectrumData& data, const FitParams& init,
              const FitOptions& options) {
  validate(data, init.free_count());
  require(!init.lines.empty(), "fit needs at least one resonance");
  require(init.depth > 0.0 && std::isfinite(init.depth), "optical depth must be > 0");

  Eigen::VectorXd p = pack(init);
  FitParams current = init;
  Residuals res = residuals(data, current);
  Eigen::MatrixXd j = weighted_jacobian(data, current);
  Eigen::MatrixXd normal = j.transpose() * j;

  if (scaled_min_eigenvalue(normal) < 1e-12) {
    fail(ErrorCode::SingularNormalMatrix,
         "normal matrix is singular at the starting point (overlapping or "
         "unidentifiable resonances)");
  }

  FitResult out;
  double lambda = options.initial_damping;
  Eigen::VectorXd grad = j.transpose() * res.r;
  // Once a step changes the SSE by less than sse_tolerance the fit counts as
  // converged, but iteration continues until a step no longer lowers the SSE
  // or the gradient test passes. Near the minimum those extra steps are
  // Gauss-Newton steps and cost one or two iterations.
  bool sse_converged = false;
  int iter = 0;
  while (iter < options.max_iterations) {
    if (grad.lpNorm<Eigen::Infinity>() < options.gradient_tolerance || res.sse == 0.0) {
      out.converged = true;
      break;
    }
    ++iter;
    Eigen::MatrixXd damped = normal;
    damped.diagonal() += lambda * normal.diagonal();
    Eigen::LLT<Eigen::MatrixXd> llt(damped);
    if (llt.info() != Eigen::Success) {
      if (sse_converged) break;
      lambda *= options.reject_factor;
      continue;
    }
    const Eigen::VectorXd step = llt.solve(grad);
    const Eigen::VectorXd trial = p + step;
    const FitParams trial_params = unpack(trial, current);
    const Residuals trial_res = residuals(data, trial_params);
    if (std::isfinite(trial_res.sse) && trial_res.sse < res.sse) {
      const double rel = (res.sse - trial_res.sse) / res.sse;
      p = trial;
      current = trial_params;
      res = trial_res;
      j = weighted_jacobian(data, current);
      normal = j.transpose() * j;
      grad = j.transpose() * res.r;
      lambda *= options.accept_factor;
      if (rel < options.sse_tolerance) sse_converged = true;
    } else {
      if (sse_converged) break;
      lambda *= options.reject_factor;
    }
  }
  out.converged = out.converged || sse_converged;

  out.params = current;
  out.iterations = iter;
  out.residual_norm = res.sse;
  out.gradient_norm = grad.lpNorm<Eigen::Infinity>();
  const std::size_t n = data.values.size();
  const std::size_t np = current.free_count();
  out.dof = n - np;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(normal);
  const Eigen::VectorXd ev = eig.eigenvalues();
  const double cutoff = 1e-14 * std::max(ev.maxCoeff(), 0.0);
  Eigen::VectorXd inv(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] > cutoff && ev[i] > 0.0) {
      inv[i] = 1.0 / ev[i];
    } else {
      inv[i] = 0.0;
      out.rank_deficient = true;
    }
  }
  const Eigen::MatrixXd pinv = eig.eigenvectors() * inv.asDiagonal() *
                               eig.eigenvectors().transpose();
  out.covariance = (res.sse / static_cast<double>(out.dof)) * pinv;
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();

  Eigen::Index k = 0;
  for (const auto& l : current.lines) {
    out.std_errors.push_back(std::sqrt(out.covariance(k, k)));
    ++k;
    out.std_errors.push_back(l.hwhm_mhz * std::sqrt(out.covariance(k, k)));
    ++k;
    out.std_errors.push_back(l.strength * std::sqrt(out.covariance(k, k)));
    ++k;
  }
  out.std_errors.push_back(std::sqrt(out.covariance(k, k)));
  return out;
}

ChiPrimeCurve predict_chi_prime(const FitResult& result,
                                std::span<const double> freqs) {
  if (!result.converged) {
    fail(ErrorCode::NotConverged, "predict_chi_prime needs a converged fit");
  }
  const auto& lines = result.params.lines;
  require(lines.size() == 2 && lines[0].kind != lines[1].kind,
          "predict_chi_prime needs one gain and one absorption line");
  const SusceptibilityModel model(lines);
  ChiPrimeCurve curve;
  curve.freqs_mhz.assign(freqs.begin(), freqs.end());
  for (double f : freqs) {
    const double re = model.chi(f).real();
    curve.chi_re.push_back(re);
    curve.delta_n.push_back(0.5 * re);
  }
  return curve;
}

}  // namespace vapor
