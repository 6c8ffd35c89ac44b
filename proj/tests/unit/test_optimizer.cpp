#include <catch_amalgamated.hpp>

#include "oracles.hpp"
#include "tfrlab/optimizer.hpp"

using namespace tfrlab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double fs = 50.0;

SignalSpec scaled_tone_plus_delta(double c) {
  Composite s;
  s.parts = {SignalSpec{MultiTone{{{c * std::sqrt(2.0), Hz{5.0}.rad(), 0.0}}}}, SignalSpec{DeltaPulse{10.0, c * std::sqrt(fs * 20.0)}}};
  return SignalSpec{s};
}

}  // namespace

TEST_CASE("the concentration functional ignores overall scale", "[optimizer]") {
  const auto g = FrequencyGrid::linear_hz(Hz{0.0}, Hz{10.0}, Hz{0.05});
  const auto x = synthesize(scaled_tone_plus_delta(1.0), fs, 20.0).signal;
  auto y = x;
  for (auto& v : y.samples) v *= 7.5;
  const auto hx = compute_tfr(x, WindowSpec::gaussian(1.0), g);
  const auto hy = compute_tfr(y, WindowSpec::gaussian(1.0), g);
  CHECK_THAT(functional_Fpq(hy, 1.0, 2.0), WithinAbs(functional_Fpq(hx, 1.0, 2.0), 1e-9));
  CHECK_THAT(functional_Fpq(hy, 2.0, 4.0, 3), WithinAbs(functional_Fpq(hx, 2.0, 4.0, 3), 1e-9));
}

TEST_CASE("the optimal f0 does not depend on signal amplitude", "[optimizer]") {
  const auto g = FrequencyGrid::linear_hz(Hz{0.0}, Hz{10.0}, Hz{0.05});
  OptimizeOptions opt;
  opt.search_range = {{0.1, 5.0}};
  const auto base = optimize_f0(synthesize(scaled_tone_plus_delta(1.0), fs, 20.0).signal, WindowKind::Gaussian, g, 1.0, 2.0, opt);
  for (const double c : {0.1, 10.0}) {
    const auto r = optimize_f0(synthesize(scaled_tone_plus_delta(c), fs, 20.0).signal, WindowKind::Gaussian, g, 1.0, 2.0, opt);
    CHECK(r.f0_opt == base.f0_opt);
    CHECK_THAT(r.F_opt, WithinAbs(base.F_opt, 1e-9));
  }
  CHECK(base.f0_grid.front() == 0.1);
  CHECK(base.f0_grid.back() == 5.0);
  CHECK(base.f0_grid.size() >= static_cast<std::size_t>(std::log2(50.0) * opt.n_tilde_v));
}

TEST_CASE("Gaussian f0 bounds follow the sampling rate and record length", "[optimizer]") {
  const double eps = 0.05;
  const auto g = FrequencyGrid::linear_hz(Hz{0.0}, Hz{25.0}, Hz{0.05});
  const auto b = f0_bounds(WindowKind::Gaussian, fs, 50.0, g, eps);
  CHECK_THAT(b.f0_min, WithinRel(oracle::gaussian_f0_min(eps, fs), 1e-4));
  CHECK_THAT(b.f0_max, WithinRel(oracle::gaussian_f0_max(eps, 50.0), 1e-4));
  CHECK_THAT(b.f0_min, WithinAbs(0.012478, 1e-6));
  CHECK_THAT(b.f0_max, WithinAbs(12.755, 1e-3));
}

TEST_CASE("the functional requires q > p > 0", "[optimizer]") {
  const auto x = synthesize(scaled_tone_plus_delta(1.0), fs, 20.0).signal;
  const auto h = compute_tfr(x, WindowSpec::gaussian(1.0), FrequencyGrid::linear_hz(Hz{0.0}, Hz{10.0}, Hz{0.1}));
  CHECK_THROWS_AS(functional_Fpq(h, 2.0, 2.0), DomainError);
  CHECK_THROWS_AS(functional_Fpq(h, 0.0, 2.0), DomainError);
  CHECK_THROWS_AS(functional_Fpq(h, 1.0, 2.0, 0), DomainError);
}
