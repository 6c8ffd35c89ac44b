#include <catch_amalgamated.hpp>

#include "oracles.hpp"
#include "tfrlab/config.hpp"
#include "tfrlab/signal.hpp"

using namespace tfrlab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("composite synthesis is the sum of its parts", "[signal]") {
  const SignalSpec am{AmComponent{1.0, 0.4, 0.7, 0.3, Hz{2.0}.rad(), 0.1}};
  const SignalSpec fm{FmComponent{0.8, 0.5, 0.9, 0.0, Hz{4.0}.rad(), 1.0}};
  const SignalSpec noise{NoisyTone{Hz{3.0}.rad(), 0.3, 42, 0.5, 0.0}};
  Composite c;
  c.parts = {am, fm, noise};
  const auto sum = synthesize(SignalSpec{c}, 50.0, 20.0).signal.samples;
  const auto a = synthesize(am, 50.0, 20.0).signal.samples;
  const auto b = synthesize(fm, 50.0, 20.0).signal.samples;
  const auto n = synthesize(noise, 50.0, 20.0).signal.samples;
  REQUIRE(sum.size() == 1000);
  for (std::size_t i = 0; i < sum.size(); ++i) CHECK_THAT(sum[i], WithinAbs(a[i] + b[i] + n[i], 1e-12));
}

TEST_CASE("AM samples and truth follow the model", "[signal]") {
  const double r = 0.5, nu_a = Hz{0.2}.rad(), nu = Hz{1.0}.rad();
  const auto syn = synthesize(SignalSpec{AmComponent{1.0, r, nu_a, 0.0, nu, 0.0}}, 50.0, 10.0);
  const auto want = oracle::am_samples(r, nu_a, nu, 50.0, 500);
  for (std::size_t i = 0; i < want.size(); ++i) CHECK_THAT(syn.signal.samples[i], WithinAbs(want[i], 1e-12));
  REQUIRE(syn.truth.size() == 1);
  const auto& tr = syn.truth[0];
  CHECK_THAT(tr.amplitude[100], WithinAbs(1.0 + r * std::cos(nu_a * 2.0), 1e-12));
  CHECK_THAT(tr.frequency[100], WithinAbs(nu, 1e-12));
  CHECK_THAT(tr.phase[499] - tr.phase[0], WithinRel(nu * 499 / 50.0, 1e-12));
}

TEST_CASE("FM truth carries the modulated frequency", "[signal]") {
  const double r = 0.5, nu_b = Hz{0.2}.rad(), nu = Hz{1.0}.rad();
  const auto syn = synthesize(SignalSpec{FmComponent{1.0, r, nu_b, 0.0, nu, 0.0}}, 50.0, 10.0);
  const auto& tr = syn.truth[0];
  const double t = tr.time[123];
  CHECK_THAT(tr.frequency[123], WithinAbs(nu + r * nu_b * std::cos(nu_b * t), 1e-12));
  CHECK_THAT(syn.signal.samples[123], WithinAbs(std::cos(nu * t + r * std::sin(nu_b * t)), 1e-12));
}

TEST_CASE("FM Bessel expansion reproduces the component", "[signal]") {
  const FmComponent fm{1.0, 0.8, Hz{0.3}.rad(), 0.4, Hz{3.0}.rad(), 0.2};
  const auto tones = fm_as_tones(fm, 1e-10);
  const auto exact = synthesize(SignalSpec{fm}, 50.0, 5.0).signal.samples;
  const auto expanded = synthesize(SignalSpec{tones}, 50.0, 5.0).signal.samples;
  for (std::size_t i = 0; i < exact.size(); ++i) CHECK_THAT(expanded[i], WithinAbs(exact[i], 1e-8));
  const auto b = bessel_expansion(0.8, 0.02);
  CHECK_THAT(b.coefficient(1), WithinAbs(oracle::bessel_j(1, 0.8), 1e-14));
  CHECK_THAT(b.coefficient(-1), WithinAbs(-oracle::bessel_j(1, 0.8), 1e-14));
}

TEST_CASE("seeded noise is reproducible and has the stated variance", "[signal]") {
  const SignalSpec s{NoisyTone{Hz{5.0}.rad(), 1.0, 7, 0.0, 0.0}};
  const auto a = synthesize(s, 50.0, 200.0).signal.samples;
  const auto b = synthesize(s, 50.0, 200.0).signal.samples;
  CHECK(a == b);
  const auto c = synthesize(SignalSpec{NoisyTone{Hz{5.0}.rad(), 1.0, 8, 0.0, 0.0}}, 50.0, 200.0).signal.samples;
  CHECK(a != c);
  // (sigma / sqrt 2) zeta: variance one half for sigma = 1
  CHECK_THAT(oracle::rms(a) * oracle::rms(a), WithinAbs(0.5, 0.02));
}

TEST_CASE("padded spans continue the record exactly", "[signal]") {
  const SignalSpec s{NoisyTone{Hz{2.0}.rad(), 0.5, 3, 1.0, 0.0}};
  const auto rec = synthesize(s, 50.0, 10.0).signal.samples;
  const auto span = synthesize_span(s, 50.0, -1.0, 600).samples;
  for (std::size_t i = 0; i < rec.size(); ++i) CHECK_THAT(span[i + 50], WithinAbs(rec[i], 1e-12));
}

TEST_CASE("model constraints are enforced", "[signal]") {
  CHECK_THROWS_AS(validate(SignalSpec{AmComponent{1.0, 0.5, Hz{2.0}.rad(), 0.0, Hz{1.0}.rad(), 0.0}}), SpecError);
  CHECK_THROWS_AS(validate(SignalSpec{AmComponent{1.0, 1.5, Hz{0.1}.rad(), 0.0, Hz{1.0}.rad(), 0.0}}), SpecError);
  CHECK_THROWS_AS(validate(SignalSpec{NoisyTone{Hz{1.0}.rad(), -0.1, 1, 1.0, 0.0}}), SpecError);
  CHECK_THROWS_AS(validate(SignalSpec{MultiTone{{{1.0, 3.0, 0.0}, {1.0, 2.0, 0.0}}}}), SpecError);
  CHECK_THROWS_AS(synthesize(SignalSpec{MultiTone{{{1.0, Hz{30.0}.rad(), 0.0}}}}, 50.0, 1.0), SpecError);
}

TEST_CASE("signal specs round-trip through JSON", "[signal]") {
  Composite c;
  c.parts = {SignalSpec{MultiTone{{{1.0, Hz{1.0}.rad(), 0.2}, {0.5, Hz{1.7}.rad(), 0.0}}}}, SignalSpec{AmComponent{1.0, 0.3, 0.5, 0.1, Hz{3.0}.rad(), 0.0}},
             SignalSpec{FmComponent{1.0, 0.3, 0.5, 0.1, Hz{4.0}.rad(), 0.0}}, SignalSpec{NoisyTone{Hz{2.0}.rad(), 0.2, 11, 1.0, 0.0}},
             SignalSpec{DeltaPulse{3.0, 5.0}}};
  const SignalSpec spec{c};
  const auto back = signal_from_json(signal_to_json(spec));
  CHECK(signal_to_json(back) == signal_to_json(spec));
  const auto x = synthesize(spec, 50.0, 8.0).signal.samples;
  const auto y = synthesize(back, 50.0, 8.0).signal.samples;
  for (std::size_t i = 0; i < x.size(); ++i) CHECK_THAT(y[i], WithinAbs(x[i], 1e-12));
}
