#include <catch_amalgamated.hpp>

#include "tfrlab/error_theory.hpp"

using namespace tfrlab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ComponentTrack truth_of(const SignalSpec& s) { return synthesize(s, 50.0, 20.0).truth.front(); }

}  // namespace

TEST_CASE("ridge modulation errors scale with f0 squared", "[error-theory]") {
  const auto am = truth_of(SignalSpec{AmComponent{1.0, 0.5, 1.0, 0.0, Hz{2.0}.rad(), 0.0}});
  const auto fm = truth_of(SignalSpec{FmComponent{1.0, 0.5, 1.0, 0.0, Hz{2.0}.rad(), 0.0}});
  for (const auto* truth : {&am, &fm}) {
    const auto a = ridge_theoretical_errors(*truth, WindowSpec::gaussian(0.5));
    const auto b = ridge_theoretical_errors(*truth, WindowSpec::gaussian(1.0));
    for (std::size_t i = 10; i + 10 < a.size(); i += 31) {
      CHECK_THAT(b.d_amp[i], WithinAbs(4.0 * a.d_amp[i], 1e-12));
      CHECK_THAT(b.d_phase[i], WithinAbs(4.0 * a.d_phase[i], 1e-12));
      CHECK_THAT(b.d_freq[i], WithinAbs(4.0 * a.d_freq[i], 1e-12));
    }
  }
}

TEST_CASE("AM shifts only the ridge amplitude, FM only phase and frequency", "[error-theory]") {
  const auto am = ridge_theoretical_errors(truth_of(SignalSpec{AmComponent{1.0, 0.5, 1.0, 0.0, Hz{2.0}.rad(), 0.0}}), WindowSpec::gaussian(1.0));
  const auto fm = ridge_theoretical_errors(truth_of(SignalSpec{FmComponent{1.0, 0.5, 1.0, 0.0, Hz{2.0}.rad(), 0.0}}), WindowSpec::gaussian(1.0));
  for (std::size_t i = 10; i + 10 < am.size(); i += 17) {
    CHECK_THAT(am.d_phase[i], WithinAbs(0.0, 1e-6));
    CHECK_THAT(am.d_freq[i], WithinAbs(0.0, 1e-6));
    CHECK_THAT(fm.d_amp[i], WithinAbs(0.0, 1e-6));
  }
  // A'' = -r nu_a^2 cos(nu_a t) for the AM above
  const double t = am.size() / 2 / 50.0;
  CHECK_THAT(am.d_amp[am.size() / 2], WithinRel(-0.5 * 0.5 * std::cos(t), 1e-4));
}

TEST_CASE("a pure tone has no predicted errors", "[error-theory]") {
  const auto tone = truth_of(SignalSpec{MultiTone{{{1.0, Hz{2.0}.rad(), 0.0}}}});
  const auto e = ridge_theoretical_errors(tone, WindowSpec::gaussian(1.0));
  for (std::size_t i = 2; i + 2 < e.size(); ++i) {
    CHECK(e.d_amp[i] == 0.0);
    CHECK(e.d_phase[i] == 0.0);
    CHECK(e.d_freq[i] == 0.0);
  }
  const auto d = direct_theoretical_errors(tone);
  CHECK(std::ranges::all_of(d.d_amp, [](double x) { return x == 0.0; }));
}

TEST_CASE("interference errors are periodic in the relative phase", "[error-theory]") {
  const auto w = WindowSpec::gaussian(1.0);
  const auto main = truth_of(SignalSpec{MultiTone{{{1.0, Hz{2.0}.rad(), 0.0}}}});
  auto other = truth_of(SignalSpec{MultiTone{{{0.5, Hz{2.3}.rad(), 0.4}}}});
  const auto a = ridge_interference_errors(main, std::span(&other, 1), w);
  for (auto& p : other.phase) p += two_pi;
  const auto b = ridge_interference_errors(main, std::span(&other, 1), w);
  for (std::size_t i = 0; i < a.size(); i += 23) {
    CHECK_THAT(b.d_amp[i], WithinAbs(a.d_amp[i], 1e-9));
    CHECK_THAT(b.d_phase[i], WithinAbs(a.d_phase[i], 1e-9));
    CHECK_THAT(b.d_freq[i], WithinAbs(a.d_freq[i], 1e-9));
  }
}

TEST_CASE("interference decays with separation", "[error-theory]") {
  const auto w = WindowSpec::gaussian(1.0);
  const auto main = truth_of(SignalSpec{MultiTone{{{1.0, Hz{2.0}.rad(), 0.0}}}});
  auto peak = [&](double nu_hz) {
    const auto other = truth_of(SignalSpec{MultiTone{{{1.0, Hz{nu_hz}.rad(), 0.0}}}});
    const auto e = ridge_interference_errors(main, std::span(&other, 1), w);
    return std::ranges::max(e.d_amp, {}, [](double x) { return std::abs(x); });
  };
  CHECK(std::abs(peak(2.2)) > std::abs(peak(2.5)));
  CHECK(std::abs(peak(3.5)) < 1e-6);
}
