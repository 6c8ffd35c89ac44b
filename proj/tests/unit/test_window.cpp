#include <catch_amalgamated.hpp>

#include "oracles.hpp"
#include "tfrlab/window.hpp"

using namespace tfrlab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const WindowKind all_kinds[] = {WindowKind::Gaussian, WindowKind::Morlet, WindowKind::Lognormal};

std::vector<double> analysis_frequencies(const WindowSpec& w, double nu) {
  std::vector<double> omegas;
  if (w.is_wavelet()) {
    for (int i = -2000; i <= 2000; ++i) omegas.push_back(nu * std::exp(i * 0.004));
  } else {
    for (int i = -2000; i <= 2000; ++i) omegas.push_back(nu + i * 0.01 / w.f0());
  }
  return omegas;
}

}  // namespace

TEST_CASE("transfer function has a single maximum", "[window]") {
  const double nu = 10.0;
  for (auto kind : all_kinds) {
    for (double f0 : {0.2, 1.0, 5.0}) {
      const WindowSpec w(kind, f0);
      std::vector<double> h;
      for (double omega : analysis_frequencies(w, nu)) h.push_back(w.transfer(nu, omega));
      // count rises followed by falls, ignoring round-off level steps
      int maxima = 0, last = 0;
      for (std::size_t i = 1; i < h.size(); ++i) {
        const double d = h[i] - h[i - 1];
        if (std::abs(d) <= 1e-12) continue;
        const int dir = d > 0.0 ? 1 : -1;
        if (last == 1 && dir == -1) ++maxima;
        last = dir;
      }
      INFO(to_string(kind) << " f0=" << f0);
      CHECK(maxima == 1);
    }
  }
}

TEST_CASE("transfer peaks at one", "[window]") {
  for (auto kind : all_kinds) {
    const WindowSpec w(kind, 1.0);
    CHECK_THAT(w.constants().h_max, WithinAbs(1.0, 1e-12));
    const double nu = 7.0;
    const double at_peak = w.is_wavelet() ? w.transfer(nu, nu) : w.transfer(nu, nu);
    CHECK_THAT(at_peak, WithinAbs(1.0, 1e-9));
  }
}

TEST_CASE("cumulative mass is monotone and bounded", "[window]") {
  for (auto kind : all_kinds) {
    const WindowSpec w(kind, 1.0);
    const double nu = 10.0;
    double prev = 0.0;
    for (double omega : analysis_frequencies(w, nu)) {
      const double q = w.cumulative_q(nu, omega);
      CHECK(q >= prev - 1e-15);
      CHECK(q >= 0.0);
      CHECK(q <= 1.0);
      prev = q;
    }
    CHECK(w.q_tilde(nu, 9.0, 11.0) >= 0.0);
    CHECK(w.q_tilde(nu, 11.0, 9.0) == 0.0);
  }
}

TEST_CASE("epsilon support holds 1 - eps of the mass", "[window]") {
  for (auto kind : all_kinds) {
    for (double f0 : {0.5, 1.0, 3.0}) {
      const WindowSpec w(kind, f0);
      const double nu = 20.0;
      for (double eps : {0.05, 1e-3}) {
        const auto s = w.epsilon_support(eps);
        const double lo = w.is_wavelet() ? nu * s.xi1 / w.omega_psi() : nu + s.xi1;
        const double hi = w.is_wavelet() ? nu * s.xi2 / w.omega_psi() : nu + s.xi2;
        // a wavelet response at omega sees the tone through omega_psi * nu / omega, so the interval flips
        const double mass = w.is_wavelet() ? w.q_tilde(nu, nu * nu / hi, nu * nu / lo) : w.q_tilde(nu, lo, hi);
        INFO(to_string(kind) << " f0=" << f0 << " eps=" << eps);
        CHECK_THAT(mass, WithinAbs(1.0 - eps, 1e-6));
      }
    }
  }
}

TEST_CASE("Gaussian supports match the normal law", "[window]") {
  for (double f0 : {0.3, 1.0, 4.0}) {
    const auto w = WindowSpec::gaussian(f0);
    for (double eps : {0.05, 1e-3}) {
      const auto s = w.epsilon_support(eps);
      CHECK_THAT(s.xi2, WithinRel(oracle::n_gaussian(eps) / f0, 1e-6));
      CHECK_THAT(s.xi1, WithinRel(-oracle::n_gaussian(eps) / f0, 1e-6));
      // |g(t)| ~ exp(-t^2 / 2 f0^2): the time support is n_G(eps) standard deviations of width f0
      CHECK_THAT(s.tau2, WithinRel(oracle::n_gaussian(eps) * std::sqrt(oracle::gaussian_time_variance(f0)), 1e-3));
    }
  }
}

TEST_CASE("Gaussian curvature factor is f0 squared", "[window]") {
  for (double f0 : {0.5, 1.0, 2.5}) {
    const auto w = WindowSpec::gaussian(f0);
    const double h = 1e-3 / f0;
    const double d2 = (w.shape(h) - 2.0 * w.shape(0.0) + w.shape(-h)) / (h * h);
    CHECK_THAT(-d2 / w.shape(0.0), WithinRel(f0 * f0, 1e-6));
    CHECK(w.p_squared(3.0) == f0 * f0);
  }
}

TEST_CASE("Morlet peak frequency tends to 2 pi f0", "[window]") {
  CHECK_THAT(WindowSpec::morlet(2.0).omega_psi(), WithinRel(oracle::two_pi * 2.0, 1e-6));
  CHECK(std::abs(WindowSpec::morlet(0.2).omega_psi() - oracle::two_pi * 0.2) > 1e-3);
  CHECK_FALSE(WindowSpec::morlet(1.0).constants().d_h_finite());
  CHECK(WindowSpec::gaussian(1.0).constants().d_h_finite());
}

TEST_CASE("invalid resolution parameters are rejected", "[window]") {
  CHECK_THROWS_AS(WindowSpec::gaussian(0.0), DomainError);
  CHECK_THROWS_AS(WindowSpec::lognormal(-1.0), DomainError);
  CHECK_THROWS_AS(WindowSpec::gaussian(1.0).epsilon_support(1.5), DomainError);
  CHECK_THROWS_AS(WindowSpec::morlet(1.0).transfer(1.0, 0.0), DomainError);
}
