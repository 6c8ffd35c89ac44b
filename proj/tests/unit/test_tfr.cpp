#include <catch_amalgamated.hpp>

#include <filesystem>
#include <random>

#include "oracles.hpp"
#include "tfrlab/tfr.hpp"
#include "tfrlab/tfr_io.hpp"

using namespace tfrlab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double fs = 50.0;

TFRMatrix transform(const SignalSpec& s, const WindowSpec& w, const FrequencyGrid& g, double duration = 20.0) {
  const auto syn = synthesize(s, fs, duration);
  return compute_tfr(syn.signal, w, g, {Padding::Exact, std::nullopt, std::make_shared<SignalSpec>(s)});
}

}  // namespace

TEST_CASE("the transform is linear", "[tfr]") {
  const SignalSpec a{MultiTone{{{1.0, Hz{1.2}.rad(), 0.3}}}};
  const SignalSpec b{AmComponent{0.7, 0.4, 0.8, 0.0, Hz{2.0}.rad(), 1.0}};
  Composite c;
  c.parts = {a, b};
  for (const auto& [w, g] : {std::pair{WindowSpec::gaussian(1.0), FrequencyGrid::linear_hz(Hz{0.5}, Hz{3.0}, Hz{0.02})},
                             std::pair{WindowSpec::morlet(1.0), FrequencyGrid::logarithmic_hz(Hz{0.5}, Hz{4.0}, 32)}}) {
    const auto ha = transform(a, w, g), hb = transform(b, w, g), hab = transform(SignalSpec{c}, w, g);
    double diff = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < hab.values.flat().size(); ++i) {
      diff += std::norm(hab.values.flat()[i] - ha.values.flat()[i] - hb.values.flat()[i]);
      norm += std::norm(hab.values.flat()[i]);
    }
    CHECK(std::sqrt(diff / norm) < 1e-12);
  }
}

TEST_CASE("a tone's phase only rotates the transform", "[tfr]") {
  const auto w = WindowSpec::gaussian(1.0);
  const auto g = FrequencyGrid::linear_hz(Hz{1.0}, Hz{3.0}, Hz{0.02});
  const auto h0 = transform(SignalSpec{MultiTone{{{1.0, Hz{2.0}.rad(), 0.0}}}}, w, g);
  const auto h1 = transform(SignalSpec{MultiTone{{{1.0, Hz{2.0}.rad(), 1.3}}}}, w, g);
  // away from the record ends, where padding leaks
  for (std::size_t k = 0; k < h0.n_freq(); k += 7)
    for (std::size_t t = 2 * h0.pad_len; t + 2 * h0.pad_len < h0.n_time(); t += 11)
      CHECK_THAT(std::abs(h1.values(k, t)), WithinAbs(std::abs(h0.values(k, t)), 1e-6));
}

TEST_CASE("random three-tone transforms match the closed form", "[tfr]") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> freq(1.0, 4.0), amp(0.3, 1.5), phase(0.0, oracle::two_pi);
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<oracle::Tone> tones;
    for (int i = 0; i < 3; ++i) tones.push_back({amp(rng), Hz{freq(rng)}.rad(), phase(rng)});
    std::ranges::sort(tones, {}, &oracle::Tone::nu);
    MultiTone m;
    for (const auto& t : tones) m.tones.push_back({t.amplitude, t.nu, t.phase});
    const double f0 = 1.0;
    const auto g = FrequencyGrid::linear_hz(Hz{0.2}, Hz{5.0}, Hz{0.02});
    const auto h = transform(SignalSpec{m}, WindowSpec::gaussian(f0), g, 40.0);
    std::vector<double> got, want;
    for (std::size_t t = h.n_time() / 4; t < 3 * h.n_time() / 4; t += 5)
      for (std::size_t k = 0; k < g.size(); ++k) {
        got.push_back(std::norm(h.values(k, t)));
        want.push_back(std::norm(oracle::gaussian_wft(tones, f0, g.omega(k), h.time.at(t))));
        const auto closed = analytic_multitone_tfr(m, WindowSpec::gaussian(f0), g.omega(k), h.time.at(t));
        CHECK_THAT(closed.power, WithinAbs(want.back(), 1e-12));
      }
    CHECK(oracle::relative_l2(got, want) < 1e-3);
  }
}

TEST_CASE("wavelet transform of a tone traces the wavelet shape", "[tfr]") {
  const auto w = WindowSpec::lognormal(1.0);
  const double nu = Hz{2.0}.rad();
  const auto g = FrequencyGrid::logarithmic_hz(Hz{1.0}, Hz{4.0}, 64);
  const auto h = transform(SignalSpec{MultiTone{{{2.0, nu, 0.0}}}}, w, g);
  const std::size_t t = h.n_time() / 2;
  for (std::size_t k = 0; k < g.size(); ++k) CHECK_THAT(std::abs(h.values(k, t)), WithinAbs(w.transfer(nu, g.omega(k)), 1e-3));
}

TEST_CASE("padding extends the record on both sides", "[tfr]") {
  const RealSignal s{{1.0, 2.0, 3.0, 4.0}, 1.0, 0.0};
  CHECK(pad_signal(s, Padding::Zero, 2).samples == std::vector<double>{0, 0, 1, 2, 3, 4, 0, 0});
  CHECK(pad_signal(s, Padding::Reflection, 2).samples == std::vector<double>{3, 2, 1, 2, 3, 4, 3, 2});
  CHECK(pad_signal(s, Padding::Periodic, 2).samples == std::vector<double>{3, 4, 1, 2, 3, 4, 1, 2});
  CHECK_THROWS_AS(pad_signal(s, Padding::Exact, 2), ContractError);
  CHECK(padding_from_string(to_string(Padding::Reflection)) == Padding::Reflection);
}

TEST_CASE("window and grid scale must agree", "[tfr]") {
  const RealSignal s{std::vector<double>(100, 0.0), 50.0, 0.0};
  CHECK_THROWS_AS(compute_tfr(s, WindowSpec::morlet(1.0), FrequencyGrid::linear(1.0, 2.0, 0.1)), ContractError);
  CHECK_THROWS_AS(compute_tfr(s, WindowSpec::gaussian(1.0), FrequencyGrid::logarithmic(1.0, 2.0, 8)), ContractError);
}

TEST_CASE("binary dumps round-trip", "[tfr]") {
  const auto h = transform(SignalSpec{MultiTone{{{1.0, Hz{2.0}.rad(), 0.0}}}}, WindowSpec::gaussian(1.0), FrequencyGrid::linear_hz(Hz{1.5}, Hz{2.5}, Hz{0.05}), 4.0);
  const auto dir = std::filesystem::temp_directory_path() / "tfrlab_unit_dump";
  std::filesystem::create_directories(dir);
  write_tfr(h, dir / "h.tfr", {{"note", "unit"}});
  const auto d = read_tfr(dir / "h.tfr");
  CHECK(d.kind == TransformKind::WFT);
  CHECK(d.scale == GridScale::Linear);
  CHECK(d.fs == fs);
  REQUIRE(d.values.rows() == h.n_freq());
  REQUIRE(d.values.cols() == h.n_time());
  for (std::size_t i = 0; i < h.values.flat().size(); ++i) {
    CHECK_THAT(d.values.flat()[i].real(), WithinAbs(h.values.flat()[i].real(), 1e-6));
    CHECK_THAT(d.values.flat()[i].imag(), WithinAbs(h.values.flat()[i].imag(), 1e-6));
  }
  CHECK(std::filesystem::exists(dir / "h.tfr.json"));
  std::filesystem::remove_all(dir);
}
