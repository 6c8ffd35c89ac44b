#include <catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>

#include "tfrlab/support.hpp"

using namespace tfrlab;

namespace {

TFRMatrix three_tones() {
  const SignalSpec s{MultiTone{{{1.0, Hz{1.0}.rad(), 0.0}, {0.6, Hz{2.0}.rad(), 0.5}, {1.4, Hz{3.0}.rad(), 1.0}}}};
  const auto syn = synthesize(s, 50.0, 20.0);
  return compute_tfr(syn.signal, WindowSpec::gaussian(1.0), FrequencyGrid::linear_hz(Hz{0.5}, Hz{3.5}, Hz{0.01}),
                     {Padding::Exact, std::nullopt, std::make_shared<SignalSpec>(s)});
}

// Spearman rank correlation.
double rank_correlation(std::span<const double> x, std::span<const double> y) {
  auto ranks = [](std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::ranges::sort(idx, {}, [&](std::size_t i) { return v[i]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size(); ++i) r[idx[i]] = static_cast<double>(i);
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size()), mean = (n - 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mean) * (ry[i] - mean);
    sxx += (rx[i] - mean) * (rx[i] - mean);
    syy += (ry[i] - mean) * (ry[i] - mean);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

TEST_CASE("unimodal regions partition the column", "[support]") {
  const auto h = three_tones();
  for (std::size_t t = 2 * h.pad_len; t + 2 * h.pad_len < h.n_time(); t += 50) {
    const auto regions = partition_unimodal(h, t);
    REQUIRE(regions.size() == 3);
    CHECK(regions.front().lo == 0);
    CHECK(regions.back().hi == h.n_freq() - 1);
    for (std::size_t i = 0; i < regions.size(); ++i) {
      CHECK(regions[i].lo <= regions[i].peak.bin);
      CHECK(regions[i].peak.bin <= regions[i].hi);
      if (i > 0) CHECK(regions[i].lo == regions[i - 1].hi + 1);
    }
  }
}

TEST_CASE("maximum-based support follows the strongest peak", "[support]") {
  const auto h = three_tones();
  const auto c = extract_tfs(h, MaximumBased{});
  CHECK(c.gap_count() == 0);
  for (std::size_t t = 0; t < c.size(); t += 50) {
    for (const auto& p : find_peaks(h, t)) CHECK(p.amplitude <= c.peak_amplitude[t]);
    CHECK(c.omega_minus[t] <= c.omega_p[t]);
    CHECK(c.omega_p[t] <= c.omega_plus[t]);
    CHECK_THAT(c.omega_p[t], Catch::Matchers::WithinAbs(Hz{3.0}.rad(), 1e-3));
  }
}

TEST_CASE("frequency-based support follows the reference", "[support]") {
  const auto h = three_tones();
  const auto c = extract_tfs(h, FrequencyBased{std::vector<double>(h.n_time(), Hz{2.1}.rad())});
  for (std::size_t t = 0; t < c.size(); t += 50) CHECK_THAT(c.omega_p[t], Catch::Matchers::WithinAbs(Hz{2.0}.rad(), 1e-3));
  CHECK_THROWS_AS(extract_tfs(h, FrequencyBased{{1.0, 2.0}}), ContractError);
}

TEST_CASE("sqrt-omega scoring removes the drift of wavelet noise peaks", "[support]") {
  const auto g = FrequencyGrid::logarithmic_hz(Hz{0.2}, Hz{20.0}, 16);
  std::vector<double> times, plain, scored;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto syn = synthesize(SignalSpec{NoisyTone{1.0, std::sqrt(2.0), seed, 0.0, 0.0}}, 50.0, 20.0);
    const auto h = compute_tfr(syn.signal, WindowSpec::morlet(1.0), g);
    const auto a = extract_tfs(h, MaximumBased{false});
    const auto b = extract_tfs(h, MaximumBased{true});
    for (std::size_t t = 0; t < h.n_time(); t += 10) {
      times.push_back(h.time.at(t));
      plain.push_back(std::log(a.omega_p[t]));
      scored.push_back(std::log(b.omega_p[t]));
    }
  }
  CHECK(std::abs(rank_correlation(times, scored)) < 0.2);
  // without the weighting the selected peaks crowd into the top octave
  std::size_t top_plain = 0, top_scored = 0;
  for (std::size_t i = 0; i < plain.size(); ++i) {
    top_plain += plain[i] > std::log(Hz{10.0}.rad()) ? 1 : 0;
    top_scored += scored[i] > std::log(Hz{10.0}.rad()) ? 1 : 0;
  }
  CHECK(top_plain > top_scored);
}
