#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "vapor/error.hpp"
#include "vapor/fit.hpp"

using namespace vapor;

namespace {

constexpr double kDepth = 6.04e5;  // k0 * L for 780.2 nm and 7.5 cm

// Forward model written out in long double from the lineshape convention
// (absorption adds +S*g/den to chi'', gain subtracts it).
long double oracle_value(const FitParams& p, long double delta) {
  long double chi = 0;
  for (const auto& l : p.lines) {
    const long double x = delta - static_cast<long double>(l.center_mhz);
    const long double g = l.hwhm_mhz;
    const long double s = l.kind == ResonanceKind::Absorption ? 1.0L : -1.0L;
    chi += s * static_cast<long double>(l.strength) * g / (x * x + g * g);
  }
  return std::exp(-static_cast<long double>(p.depth) * chi) + p.baseline;
}

std::vector<double> grid(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return out;
}

FitParams pair_params(double gain_center, double loss_center, double hwhm = 0.1,
                      double od = 1.0) {
  FitParams p;
  p.depth = kDepth;
  const double s = od * hwhm / kDepth;  // peak |D chi''| of an isolated line = od
  p.lines = {{gain_center, hwhm, s, ResonanceKind::Gain},
             {loss_center, hwhm, s, ResonanceKind::Absorption}};
  return p;
}

SpectrumData synth(const FitParams& p, const std::vector<double>& f) {
  SpectrumData d;
  d.freqs_mhz = f;
  d.values = forward_model(p, f);
  d.sigmas.assign(f.size(), 1.0);
  return d;
}

const std::vector<ResonanceKind> kGainLoss{ResonanceKind::Gain, ResonanceKind::Absorption};

}  // namespace

TEST_CASE("forward_model examples") {
  FitParams zero = pair_params(-0.1, 0.1);
  for (auto& l : zero.lines) l.strength = 0.0;
  for (double v : forward_model(zero, grid(-1, 1, 21))) CHECK(v == 1.0);

  FitParams absorb;
  absorb.depth = kDepth;
  absorb.lines = {{0.05, 0.1, 0.5 * 0.1 / kDepth, ResonanceKind::Absorption}};
  const auto f = grid(-1, 1, 201);
  const auto a = forward_model(absorb, f);
  CHECK(f[std::min_element(a.begin(), a.end()) - a.begin()] == doctest::Approx(0.05));

  FitParams gain = absorb;
  gain.lines[0].kind = ResonanceKind::Gain;
  const auto g = forward_model(gain, std::vector<double>{0.05});
  CHECK(g[0] == doctest::Approx(std::exp(0.5)).epsilon(1e-14));

  for (std::size_t i = 0; i < f.size(); ++i) {
    CHECK(a[i] == doctest::Approx(static_cast<double>(oracle_value(absorb, f[i]))).epsilon(1e-14));
  }
}

TEST_CASE("Jacobian matches central differences of the oracle on 100 random draws") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> center(-0.5, 0.5), width(0.05, 0.3), od(0.05, 1.5),
      base(-0.05, 0.05);
  const auto f = grid(-1.0, 1.0, 97);
  int checked = 0;
  double worst = 0.0;
  for (int draw = 0; draw < 100; ++draw) {
    FitParams p;
    p.depth = kDepth;
    const int lines = 1 + draw % 2;
    for (int k = 0; k < lines; ++k) {
      const double g = width(rng);
      p.lines.push_back({center(rng), g, od(rng) * g / kDepth,
                         k == 0 ? ResonanceKind::Gain : ResonanceKind::Absorption});
    }
    p.baseline = base(rng);

    const Eigen::MatrixXd j = jacobian(p, f);
    const Eigen::VectorXd v = pack(p);
    for (Eigen::Index col = 0; col < v.size(); ++col) {
      std::vector<long double> plus(v.data(), v.data() + v.size());
      std::vector<long double> minus = plus;
      const long double h = 1e-6L * std::max(1.0L, std::abs(plus[col]));
      plus[col] += h;
      minus[col] -= h;
      for (std::size_t i = 0; i < f.size(); ++i) {
        // Evaluated from the packed vector in long double: center, log hwhm,
        // log strength per line, then baseline.
        auto value = [&](const std::vector<long double>& q) {
          long double chi = 0;
          std::size_t k = 0;
          for (const auto& l : p.lines) {
            const long double x = f[i] - q[k];
            const long double g = std::exp(q[k + 1]);
            const long double s = std::exp(q[k + 2]);
            const long double sg = l.kind == ResonanceKind::Absorption ? 1.0L : -1.0L;
            chi += sg * s * g / (x * x + g * g);
            k += 3;
          }
          return std::exp(-static_cast<long double>(p.depth) * chi) + q[k];
        };
        const long double fd = (value(plus) - value(minus)) / (2 * h);
        if (std::abs(fd) <= 1e-12L) continue;
        const double rel = static_cast<double>(std::abs(j(static_cast<Eigen::Index>(i), col) - fd) /
                                               std::abs(fd));
        worst = std::max(worst, rel);
        ++checked;
      }
    }
  }
  MESSAGE("Jacobian entries checked: " << checked << ", worst relative error " << worst);
  CHECK(worst < 1e-6);
}

TEST_CASE("Jacobian structure") {
  FitParams p = pair_params(-0.2, 0.2);
  for (auto& l : p.lines) l.strength = 0.0;
  const auto f = grid(-1, 1, 41);
  const Eigen::MatrixXd j = jacobian(p, f);
  for (Eigen::Index i = 0; i < j.rows(); ++i) CHECK(j(i, j.cols() - 1) == 1.0);

  FitParams single;
  single.depth = kDepth;
  single.lines = {{0.0, 0.1, 0.8 * 0.1 / kDepth, ResonanceKind::Absorption}};
  const auto sym = grid(-1, 1, 41);
  const Eigen::MatrixXd js = jacobian(single, sym);
  for (std::size_t i = 0; i < sym.size(); ++i) {
    const auto a = static_cast<Eigen::Index>(i);
    const auto b = static_cast<Eigen::Index>(sym.size() - 1 - i);
    CHECK(js(a, 0) == doctest::Approx(-js(b, 0)).epsilon(1e-12));
  }
}

TEST_CASE("initial_guess") {
  const auto f = grid(-1, 1, 201);
  const FitParams truth = pair_params(-0.1, 0.1);
  const FitParams g = initial_guess(synth(truth, f), kGainLoss, kDepth);
  REQUIRE(g.lines.size() == 2);
  CHECK(std::abs(g.lines[0].center_mhz - -0.1) < 0.05);
  CHECK(std::abs(g.lines[1].center_mhz - 0.1) < 0.05);

  const FitParams wide = pair_params(-0.4, 0.4);
  const FitParams gw = initial_guess(synth(wide, f), kGainLoss, kDepth);
  CHECK(gw.lines[0].center_mhz < gw.lines[1].center_mhz);

  SpectrumData flat{f, std::vector<double>(f.size(), 1.0), std::vector<double>(f.size(), 1.0)};
  try {
    initial_guess(flat, kGainLoss, kDepth);
    FAIL("expected PeakNotFound");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PeakNotFound);
  }
}

TEST_CASE("noiseless recovery from initial_guess") {
  const auto f = grid(-1, 1, 201);
  for (double half : {0.05, 0.1, 0.2, 0.4}) {
    for (bool gain_first : {true, false}) {
      const FitParams truth =
          gain_first ? pair_params(-half, half) : pair_params(half, -half);
      const SpectrumData data = synth(truth, f);
      const FitResult r = fit(data, initial_guess(data, kGainLoss, kDepth));
      CAPTURE(half);
      CAPTURE(gain_first);
      CHECK(r.converged);
      CHECK(r.residual_norm < 1e-12);
      for (std::size_t k = 0; k < 2; ++k) {
        const auto& a = r.params.lines[k];
        const auto& b = truth.lines[k];
        CHECK(std::abs(a.center_mhz - b.center_mhz) <= 1e-6 * std::abs(b.center_mhz));
        CHECK(a.hwhm_mhz == doctest::Approx(b.hwhm_mhz).epsilon(1e-6));
        CHECK(a.strength == doctest::Approx(b.strength).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("1% noise Monte Carlo over 100 seeds") {
  const auto f = grid(-1, 1, 200);
  const FitParams truth = pair_params(-0.1, 0.1);
  const auto clean = forward_model(truth, f);
  std::vector<double> center_err, width_err, strength_err;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01;
    SpectrumData d;
    d.freqs_mhz = f;
    for (double c : clean) {
      d.values.push_back(c * (1.0 + 0.01 * n01(rng)));
      d.sigmas.push_back(0.01 * c);
    }
    const FitResult r = fit(d, initial_guess(d, kGainLoss, kDepth));
    REQUIRE(r.converged);
    for (std::size_t k = 0; k < 2; ++k) {
      const auto& a = r.params.lines[k];
      const auto& b = truth.lines[k];
      center_err.push_back(std::abs(a.center_mhz - b.center_mhz));
      width_err.push_back(std::abs(a.hwhm_mhz / b.hwhm_mhz - 1));
      strength_err.push_back(std::abs(a.strength / b.strength - 1));
    }
  }
  auto p95 = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[static_cast<std::size_t>(0.95 * static_cast<double>(v.size() - 1))];
  };
  MESSAGE("p95 center " << p95(center_err) << " MHz, width " << p95(width_err)
                        << ", strength " << p95(strength_err));
  CHECK(p95(center_err) < 0.01);
  CHECK(p95(width_err) < 0.05);
  CHECK(p95(strength_err) < 0.05);
}

TEST_CASE("idempotence, weight invariance and null signal") {
  const auto f = grid(-1, 1, 201);
  const FitParams truth = pair_params(-0.1, 0.1);
  SpectrumData d = synth(truth, f);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  for (auto& v : d.values) v *= 1.0 + 0.01 * n01(rng);
  const FitResult r1 = fit(d, initial_guess(d, kGainLoss, kDepth));
  REQUIRE(r1.converged);

  const FitResult r2 = fit(d, r1.params);
  const Eigen::VectorXd a = pack(r1.params), b = pack(r2.params);
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    CHECK(std::abs(a[i] - b[i]) <= 1e-10 * std::max(1.0, std::abs(a[i])));
  }

  SpectrumData scaled = d;
  for (auto& s : scaled.sigmas) s *= 7.0;
  const FitResult r3 = fit(scaled, initial_guess(scaled, kGainLoss, kDepth));
  const Eigen::VectorXd c = pack(r3.params);
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    CHECK(std::abs(a[i] - c[i]) <= 1e-8 * std::max(1.0, std::abs(a[i])));
  }
  CHECK((r3.covariance - r1.covariance).norm() <= 1e-6 * r1.covariance.norm());
  CHECK(r3.residual_norm == doctest::Approx(r1.residual_norm / 49.0).epsilon(1e-8));

  // Covariance is symmetric positive semidefinite.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(r1.covariance);
  CHECK(eig.eigenvalues().minCoeff() >= -1e-18 * eig.eigenvalues().maxCoeff());
  CHECK((r1.covariance - r1.covariance.transpose()).norm() == 0.0);

  SpectrumData flat{f, std::vector<double>(f.size(), 1.0), std::vector<double>(f.size(), 1.0)};
  FitParams one;
  one.depth = kDepth;
  one.lines = {{0.0, 0.1, 0.3 * 0.1 / kDepth, ResonanceKind::Absorption}};
  const FitResult rn = fit(flat, one);
  CHECK(rn.converged);
  CHECK(rn.params.lines[0].strength < 1e-4 * one.lines[0].strength);
  CHECK(std::abs(rn.params.baseline) < 1e-8);
}

TEST_CASE("fit error paths") {
  const auto f = grid(-1, 1, 101);
  const SpectrumData d = synth(pair_params(-0.1, 0.1), f);

  FitParams twin;
  twin.depth = kDepth;
  twin.lines = {{0.1, 0.1, 1e-7, ResonanceKind::Absorption},
                {0.1, 0.1, 1e-7, ResonanceKind::Absorption}};
  try {
    fit(d, twin);
    FAIL("expected SingularNormalMatrix");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingularNormalMatrix);
  }

  FitParams start = pair_params(-0.3, 0.3, 0.2, 0.3);
  FitOptions opts;
  opts.max_iterations = 2;
  const FitResult partial = fit(d, start, opts);
  CHECK_FALSE(partial.converged);
  CHECK(partial.iterations == 2);
  try {
    predict_chi_prime(partial, f);
    FAIL("expected NotConverged");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotConverged);
  }

  SpectrumData short_data{{0.0, 0.1}, {1.0, 1.0}, {1.0, 1.0}};
  CHECK_THROWS_AS(fit(short_data, start), Error);
  SpectrumData bad_sigma = d;
  bad_sigma.sigmas[3] = 0.0;
  CHECK_THROWS_AS(fit(bad_sigma, start), Error);
}

TEST_CASE("predict_chi_prime") {
  const auto f = grid(-1, 1, 201);
  FitParams truth = pair_params(-0.1, 0.1);
  const SpectrumData d = synth(truth, f);
  const FitResult r = fit(d, initial_guess(d, kGainLoss, kDepth));
  REQUIRE(r.converged);
  const ChiPrimeCurve c = predict_chi_prime(r, f);
  const auto imax = std::max_element(c.chi_re.begin(), c.chi_re.end()) - c.chi_re.begin();
  // chi'' zero crossing of the fitted model by bisection.
  double lo = -0.1, hi = 0.1;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (fit_chi_im(r.params, mid) < 0 ? lo : hi) = mid;
  }
  CHECK(std::abs(f[static_cast<std::size_t>(imax)] - lo) < 0.02);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(c.delta_n[i] == 0.5 * c.chi_re[i]);

  FitResult doubled = r;
  for (auto& l : doubled.params.lines) l.strength *= 2;
  const ChiPrimeCurve c2 = predict_chi_prime(doubled, f);
  for (std::size_t i = 0; i < f.size(); ++i) {
    CHECK(c2.chi_re[i] == doctest::Approx(2 * c.chi_re[i]).epsilon(1e-14));
  }

  FitResult same_kind = r;
  same_kind.params.lines[0].kind = ResonanceKind::Absorption;
  CHECK_THROWS_AS(predict_chi_prime(same_kind, f), Error);
}

TEST_CASE("spectrum CSV and fit report") {
  SpectrumData d{{-0.5, 0.0, 0.1 + 0.2}, {1.0, 0.123456789012345678, 1e-300}, {1, 2, 3}};
  std::stringstream ss;
  write_spectrum_csv(ss, d);
  const SpectrumData back = read_spectrum_csv(ss);
  CHECK(back.freqs_mhz == d.freqs_mhz);
  CHECK(back.values == d.values);
  CHECK(back.sigmas == d.sigmas);

  std::istringstream no_sigma("freq_mhz,value\n0,1\n1,2\n");
  CHECK(read_spectrum_csv(no_sigma).sigmas == std::vector<double>{1.0, 1.0});

  std::istringstream broken("freq_mhz,value,sigma\n0,1,1\n0.5,abc,1\n");
  try {
    read_spectrum_csv(broken);
    FAIL("expected DataFormat");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DataFormat);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }

  const auto f = grid(-1, 1, 101);
  const SpectrumData sd = synth(pair_params(-0.1, 0.1), f);
  const FitResult r = fit(sd, initial_guess(sd, kGainLoss, kDepth));
  std::ostringstream report;
  write_fit_report(report, r);
  const std::string text = report.str();
  for (const char* key : {"converged=true", "iterations=", "residual_norm=", "dof=94",
                          "line0.kind=gain", "line1.kind=absorption", "line0.center_mhz=",
                          "line1.strength_stderr=", "baseline_stderr=", "depth_fixed=true"}) {
    CHECK(text.find(key) != std::string::npos);
  }
}
