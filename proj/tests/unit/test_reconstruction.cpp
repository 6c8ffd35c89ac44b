#include <catch_amalgamated.hpp>

#include "oracles.hpp"
#include "tfrlab/reconstruction.hpp"

using namespace tfrlab;
using Catch::Matchers::WithinAbs;

namespace {

constexpr double fs = 50.0;
constexpr std::size_t edge = 250;

struct Run {
  Synthesis syn;
  TFRMatrix tfr;
  SupportCurve curve;
};

Run analyse(const SignalSpec& s, const WindowSpec& w, const FrequencyGrid& g, double duration = 40.0) {
  auto syn = synthesize(s, fs, duration);
  auto tfr = compute_tfr(syn.signal, w, g, {Padding::Exact, std::nullopt, std::make_shared<SignalSpec>(s)});
  auto curve = extract_tfs(tfr, MaximumBased{});
  return {std::move(syn), std::move(tfr), std::move(curve)};
}

}  // namespace

TEST_CASE("integrating over the whole axis returns the analytic signal", "[reconstruction]") {
  const SignalSpec s{MultiTone{{{1.0, Hz{1.0}.rad(), 0.2}, {0.7, Hz{1.3}.rad(), 2.0}}}};
  auto r = analyse(s, WindowSpec::gaussian(1.0), FrequencyGrid::linear_hz(Hz{0.01}, Hz{5.0}, Hz{0.005}));
  const std::size_t last = r.tfr.n_freq() - 1;
  for (std::size_t t = 0; t < r.curve.size(); ++t) {
    r.curve.bin_minus[t] = 0;
    r.curve.bin_plus[t] = last;
    r.curve.omega_minus[t] = r.tfr.grid.omega(0);
    r.curve.omega_plus[t] = r.tfr.grid.omega(last);
  }
  const auto rebuilt = track_signal(direct_reconstruct(r.tfr, r.curve), fs);
  std::vector<double> diff;
  for (std::size_t k = edge; k + edge < rebuilt.size(); ++k) diff.push_back(rebuilt.samples[k] - r.syn.signal.samples[k]);
  CHECK(oracle::rms(diff) < 1e-3);
}

TEST_CASE("ridge phase and frequency are exact for amplitude modulation", "[reconstruction]") {
  const SignalSpec s{AmComponent{1.0, 0.5, Hz{0.2}.rad(), 0.0, Hz{2.0}.rad(), 0.0}};
  const auto r = analyse(s, WindowSpec::gaussian(1.0), FrequencyGrid::linear_hz(Hz{0.5}, Hz{3.5}, Hz{0.005}));
  const auto e = error_metrics(ridge_reconstruct(r.tfr, r.curve), r.syn.truth.front(), r.tfr.kind, edge);
  CHECK(e.eps_phi < 1e-4);
  CHECK(e.eps_f < 1e-4);
  CHECK(e.eps_a > 1e-3);
}

TEST_CASE("direct estimates beat the ridge for resolved modulation", "[reconstruction]") {
  const auto w = WindowSpec::gaussian(1.0);
  const auto g = FrequencyGrid::linear_hz(Hz{0.5}, Hz{3.5}, Hz{0.005});
  for (const SignalSpec& s : {SignalSpec{AmComponent{1.0, 0.5, Hz{0.1}.rad(), 0.0, Hz{2.0}.rad(), 0.0}},
                              SignalSpec{FmComponent{1.0, 0.5, Hz{0.1}.rad(), 0.0, Hz{2.0}.rad(), 0.0}}}) {
    const auto r = analyse(s, w, g);
    const auto truth = r.syn.truth.front();
    const auto d = error_metrics(direct_reconstruct(r.tfr, r.curve), truth, r.tfr.kind, edge);
    const auto rr = error_metrics(ridge_reconstruct(r.tfr, r.curve), truth, r.tfr.kind, edge);
    CHECK(d.eps_a <= rr.eps_a);
    CHECK(d.eps_phi < 1e-3);
  }
}

TEST_CASE("skeleton atoms carry the component amplitude", "[reconstruction]") {
  const SignalSpec s{MultiTone{{{1.5, Hz{2.0}.rad(), 0.4}}}};
  const auto r = analyse(s, WindowSpec::gaussian(1.0), FrequencyGrid::linear_hz(Hz{1.0}, Hz{3.0}, Hz{0.01}), 20.0);
  const long tone_bin = r.tfr.grid.bin_of(Hz{2.0}.rad());
  for (const Method m : {Method::Ridge, Method::Direct}) {
    const auto sk = build_skeleton(r.tfr, m);
    for (std::size_t t = edge; t + edge < sk.n_time(); t += 37) {
      std::size_t atoms = 0;
      for (std::size_t k = 0; k < sk.n_freq(); ++k) atoms += std::abs(sk.values(k, t)) > 0.0 ? 1 : 0;
      CHECK(atoms == 1);
      CHECK_THAT(std::abs(sk.values(static_cast<std::size_t>(tone_bin), t)), WithinAbs(1.5, 1e-3));
    }
  }
  CHECK_THROWS_AS(build_skeleton(r.tfr, Method::Hybrid), ContractError);
}

TEST_CASE("error metrics", "[reconstruction]") {
  const auto truth = synthesize(SignalSpec{FmComponent{1.0, 0.3, 0.5, 0.0, Hz{2.0}.rad(), 0.0}}, fs, 10.0).truth.front();
  SECTION("vanish for identical tracks") {
    const auto e = error_metrics(truth, truth, TransformKind::WFT);
    CHECK(e.eps_a == 0.0);
    CHECK(e.eps_phi == 0.0);
    CHECK(e.eps_f == 0.0);
    CHECK(e.samples == truth.size());
  }
  SECTION("ignore a constant phase offset and scale with amplitude error") {
    auto rec = truth;
    for (auto& p : rec.phase) p += 0.7;
    for (auto& a : rec.amplitude) a *= 1.1;
    const auto e = error_metrics(rec, truth, TransformKind::WFT);
    CHECK_THAT(e.eps_a, WithinAbs(0.1, 1e-12));
    CHECK(e.eps_phi < 1e-7);
  }
  SECTION("frequency error is relative for wavelets and in Hz otherwise") {
    auto rec = truth;
    for (auto& f : rec.frequency) f += 0.1 * two_pi;
    CHECK_THAT(error_metrics(rec, truth, TransformKind::WFT).eps_f, WithinAbs(0.1, 1e-12));
    CHECK_THAT(error_metrics(rec, truth, TransformKind::WT).eps_f, WithinAbs(0.1 / 2.0, 1e-3));
  }
  SECTION("skip gaps and edges") {
    auto rec = truth;
    rec.gap.assign(rec.size(), 1);
    CHECK_THROWS_AS(error_metrics(rec, truth, TransformKind::WFT), UndefinedMetricError);
    CHECK(error_metrics(truth, truth, TransformKind::WFT, 10).samples == truth.size() - 20);
  }
}
