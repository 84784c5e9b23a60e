#include <algorithm>
#include <bit>
#include <complex>

#include "vapor/error.hpp"
#include "vapor/fft.hpp"
#include "vapor/lineshape.hpp"

namespace vapor {

// chi(delta) is analytic in the upper half plane (poles at center - i*hwhm),
// so chi' = -H[chi''] with H the Hilbert transform for which H[cos] = sin.
// In the DFT domain that is a multiplication by +i*sgn(k). The input is
// zero-padded to at least 8x its length so the circular kernel approximates
// 1/x over every lag that occurs inside the window.
KkReconstruction kk_reconstruct_re(const UniformSamples& chi_im,
                                   std::span<const Resonance> lines) {
  KkReconstruction out;
  const std::size_t n = chi_im.values.size();
  if (n == 0) return out;
  require(chi_im.step_mhz > 0.0, "kk_reconstruct_re: step must be > 0");

  const std::size_t m = std::bit_ceil(8 * n);
  std::vector<std::complex<double>> buf(m);
  std::copy(chi_im.values.begin(), chi_im.values.end(), buf.begin());

  fft::transform_1d(buf, fft::Direction::Forward);
  const std::complex<double> i_unit{0.0, 1.0};
  buf[0] = 0.0;
  buf[m / 2] = 0.0;
  for (std::size_t k = 1; k < m / 2; ++k) buf[k] *= i_unit;
  for (std::size_t k = m / 2 + 1; k < m; ++k) buf[k] *= -i_unit;
  fft::transform_1d(buf, fft::Direction::Inverse);

  out.chi_re.resize(n);
  const double scale = 1.0 / static_cast<double>(m);
  for (std::size_t i = 0; i < n; ++i) out.chi_re[i] = buf[i].real() * scale;

  if (!lines.empty()) {
    double max_hwhm = 0.0;
    for (const auto& l : lines) max_hwhm = std::max(max_hwhm, l.hwhm_mhz);
    for (const auto& l : lines) {
      const double margin = std::min(l.center_mhz - chi_im.start_mhz,
                                     chi_im.stop_mhz() - l.center_mhz);
      if (margin < 20.0 * max_hwhm) out.narrow_window = true;
    }
  }
  return out;
}

}  // namespace vapor
