#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <vector>

#include "tfrlab/numerics.hpp"
#include "tfrlab/support.hpp"
#include "tfrlab/synchrosqueeze.hpp"
#include "tfrlab/tfr.hpp"

namespace tfrlab {

struct ErrorTriple {
  double eps_a = std::nan("");  // NaN when the track carries no amplitude
  double eps_phi = 0.0;
  double eps_f = 0.0;
  std::size_t samples = 0;      // time points that entered the averages
};

// Relative amplitude, phase and frequency errors over the non-gapped overlap.
// `edge` samples are dropped at both ends of the record.
inline ErrorTriple error_metrics(const ComponentTrack& rec, const ComponentTrack& truth, TransformKind kind, std::size_t edge = 0) {
  const std::size_t n = truth.size();
  if (rec.size() != n) throw ContractError("error_metrics requires tracks of equal length");
  const bool with_amp = !rec.amplitude.empty() && !truth.amplitude.empty();
  double da2 = 0.0, a2 = 0.0, df2 = 0.0, nu_sum = 0.0;
  cplx phase_mean{};
  std::size_t used = 0;
  for (std::size_t i = edge; i + edge < n; ++i) {
    if (rec.is_gap(i) || truth.is_gap(i)) continue;
    ++used;
    if (with_amp) {
      const double d = rec.amplitude[i] - truth.amplitude[i];
      da2 += d * d;
      a2 += truth.amplitude[i] * truth.amplitude[i];
    }
    phase_mean += std::polar(1.0, rec.phase[i] - truth.phase[i]);
    const double d = rec.frequency[i] - truth.frequency[i];
    df2 += d * d;
    nu_sum += truth.frequency[i];
  }
  if (used == 0) throw UndefinedMetricError("error_metrics: reconstructed and true tracks share no valid samples");
  const auto m = static_cast<double>(used);
  ErrorTriple e;
  e.samples = used;
  if (with_amp) e.eps_a = a2 > 0.0 ? std::sqrt(da2 / a2) : std::sqrt(da2 / m);
  e.eps_phi = std::sqrt(std::max(0.0, 1.0 - std::norm(phase_mean / m)));
  const double f_rms = std::sqrt(df2 / m);
  e.eps_f = is_wavelet_family(kind) ? f_rms / (nu_sum / m) : f_rms / two_pi;
  return e;
}

namespace detail {

// Trapezoid weight of bin k inside the support [lo, hi] on the grid's measure.
inline double support_weight(const FrequencyGrid& g, std::size_t k, std::size_t lo, std::size_t hi) {
  if (lo == hi) return g.weights()[k];
  const double step = g.step();
  return (k == lo || k == hi) ? 0.5 * step : step;
}

struct SupportSums {
  cplx mass;    // sum H dmu
  cplx moment;  // sum H omega dmu
};

inline SupportSums support_sums(const TFRMatrix& tfr, std::size_t t, std::size_t lo, std::size_t hi) {
  SupportSums s{};
  for (std::size_t k = lo; k <= hi; ++k) {
    const cplx v = tfr.values(k, t) * support_weight(tfr.grid, k, lo, hi);
    s.mass += v;
    s.moment += v * tfr.grid.omega(k);
  }
  return s;
}

inline cplx hybrid_sum(const TFRMatrix& tfr, const InstFreqMap& ifm, std::size_t t, std::size_t lo, std::size_t hi) {
  cplx s{};
  for (std::size_t k = lo; k <= hi; ++k)
    if (ifm.valid(k, t)) s += ifm.nu(k, t) * tfr.values(k, t) * support_weight(tfr.grid, k, lo, hi);
  return s;
}

// Complex transform value at a fractional bin position by 3-point quadratic interpolation.
inline cplx value_at(const TFRMatrix& tfr, std::size_t k, double offset, std::size_t t) {
  const cplx b = tfr.values(k, t);
  if (offset == 0.0 || k == 0 || k + 1 >= tfr.n_freq()) return b;
  const cplx a = tfr.values(k - 1, t);
  const cplx c = tfr.values(k + 1, t);
  return b + 0.5 * offset * (c - a) + 0.5 * offset * offset * (a - 2.0 * b + c);
}

inline ComponentTrack empty_track(const TFRMatrix& tfr, Method m, bool with_amplitude) {
  ComponentTrack tr;
  const std::size_t n = tfr.n_time();
  tr.time.resize(n);
  for (std::size_t t = 0; t < n; ++t) tr.time[t] = tfr.time.at(t);
  if (with_amplitude) tr.amplitude.assign(n, 0.0);
  tr.phase.assign(n, 0.0);
  tr.frequency.assign(n, 0.0);
  tr.gap.assign(n, 0);
  tr.method = m;
  tr.transform = tfr.kind;
  return tr;
}

inline void check_curve(const TFRMatrix& tfr, const SupportCurve& c) {
  if (c.size() != tfr.n_time()) throw ContractError("support curve length does not match the transform");
}

}  // namespace detail

enum class RidgeOutput { Full, PhaseFrequency };

// Amplitude and phase from 2H(omega_p)/h_max, frequency from the interpolated ridge position.
inline ComponentTrack ridge_reconstruct(const TFRMatrix& tfr, const SupportCurve& curve, RidgeOutput output = RidgeOutput::Full) {
  detail::check_curve(tfr, curve);
  const bool want_amp = output == RidgeOutput::Full;
  if (want_amp && is_squeezed(tfr.kind))
    throw ContractError("ridge amplitude reconstruction from a synchrosqueezed transform is ill-defined; request phase and frequency only");
  const double h_max = tfr.window.constants().h_max;
  auto tr = detail::empty_track(tfr, Method::Ridge, want_amp);
  for (std::size_t t = 0; t < tfr.n_time(); ++t) {
    if (curve.gap[t]) {
      tr.gap[t] = 1;
      continue;
    }
    const std::size_t k = curve.bin_p[t];
    const double off = curve.offset[t];
    const cplx z = 2.0 * detail::value_at(tfr, k, off, t) / h_max;
    if (want_amp) {
      // parabolic peak height is more accurate than the modulus of the interpolated complex value
      std::vector<double> mag{std::abs(tfr.values(k > 0 ? k - 1 : k, t)), std::abs(tfr.values(k, t)),
                              std::abs(tfr.values(k + 1 < tfr.n_freq() ? k + 1 : k, t))};
      double amp = mag[1];
      if (k > 0 && k + 1 < tfr.n_freq() && off != 0.0) amp = mag[1] - 0.25 * (mag[0] - mag[2]) * off;
      tr.amplitude[t] = 2.0 * amp / h_max;
    }
    tr.phase[t] = std::arg(z);
    tr.frequency[t] = tfr.grid.omega_at(static_cast<double>(k) + off);
  }
  unwrap(tr.phase, tr.gap);
  return tr;
}

enum class FrequencyEstimate { Direct, Hybrid };

// Frequency as the support average of nu_H weighted by H.
inline std::vector<double> hybrid_freq(const TFRMatrix& tfr, const InstFreqMap& ifm, const SupportCurve& curve) {
  detail::check_curve(tfr, curve);
  if (ifm.nu.rows() != tfr.n_freq() || ifm.nu.cols() != tfr.n_time()) throw ContractError("instantaneous frequency map does not match the transform");
  std::vector<double> nu(tfr.n_time(), std::nan(""));
  for (std::size_t t = 0; t < tfr.n_time(); ++t) {
    if (curve.gap[t]) continue;
    const auto s = detail::support_sums(tfr, t, curve.bin_minus[t], curve.bin_plus[t]);
    if (std::abs(s.mass) == 0.0) continue;
    nu[t] = std::real(detail::hybrid_sum(tfr, ifm, t, curve.bin_minus[t], curve.bin_plus[t]) / s.mass);
  }
  return nu;
}

// Amplitude/phase from C_h^-1 times the support integral; frequency from its first moment
// (or the hybrid estimate when requested, mandatory for wavelets with divergent D_h).
inline ComponentTrack direct_reconstruct(const TFRMatrix& tfr, const SupportCurve& curve, FrequencyEstimate freq = FrequencyEstimate::Direct,
                                         const InstFreqMap* ifm = nullptr) {
  detail::check_curve(tfr, curve);
  const auto& c = tfr.window.constants();
  // squeezed coefficients already sit at their own frequency, so the plain first moment is the estimate
  const bool squeezed = is_squeezed(tfr.kind);
  if (freq == FrequencyEstimate::Direct && !c.d_h_finite() && !squeezed)
    throw ContractError("direct frequency reconstruction is not possible for " + to_string(tfr.window.kind()) +
                        " (divergent D_h); hybrid frequency reconstruction is required");
  if (freq == FrequencyEstimate::Hybrid && squeezed) throw ContractError("hybrid frequency needs the unsqueezed transform");
  if (freq == FrequencyEstimate::Hybrid && ifm == nullptr) throw ContractError("hybrid frequency reconstruction needs an instantaneous frequency map");
  auto tr = detail::empty_track(tfr, freq == FrequencyEstimate::Hybrid ? Method::Hybrid : Method::Direct, true);
  for (std::size_t t = 0; t < tfr.n_time(); ++t) {
    if (curve.gap[t]) {
      tr.gap[t] = 1;
      continue;
    }
    const std::size_t lo = curve.bin_minus[t];
    const std::size_t hi = curve.bin_plus[t];
    const auto s = detail::support_sums(tfr, t, lo, hi);
    if (std::abs(s.mass) == 0.0) {
      tr.gap[t] = 1;
      continue;
    }
    const cplx z = s.mass / c.c_h;
    tr.amplitude[t] = std::abs(z);
    tr.phase[t] = std::arg(z);
    if (freq == FrequencyEstimate::Direct)
      tr.frequency[t] = squeezed ? std::real(s.moment / s.mass) : std::real(s.moment / s.mass) * c.c_h / c.d_h - c.omega_bar;
    else
      tr.frequency[t] = std::real(detail::hybrid_sum(tfr, *ifm, t, lo, hi) / s.mass);
  }
  unwrap(tr.phase, tr.gap);
  return tr;
}

// Frequency estimate the window supports: direct when D_h is finite, hybrid otherwise.
inline FrequencyEstimate natural_frequency_estimate(const WindowSpec& w) {
  return w.constants().d_h_finite() ? FrequencyEstimate::Direct : FrequencyEstimate::Hybrid;
}

// Real signal A cos(phi) rebuilt from a track; gaps contribute nothing.
inline RealSignal track_signal(const ComponentTrack& tr, double fs) {
  RealSignal s{std::vector<double>(tr.size(), 0.0), fs, tr.time.empty() ? 0.0 : tr.time.front()};
  for (std::size_t i = 0; i < tr.size(); ++i)
    if (!tr.is_gap(i) && !tr.amplitude.empty()) s.samples[i] = tr.amplitude[i] * std::cos(tr.phase[i]);
  return s;
}

struct Kappa {
  std::array<double, 3> direct{3.0, 4.0, 2.0};  // amplitude, phase, frequency
  std::array<double, 3> ridge{1.0, 1.0, 1.0};
};

struct AdaptiveResult {
  ComponentTrack direct, ridge, chosen;
  std::array<Method, 3> choice{};            // amplitude, phase, frequency
  std::array<double, 3> discrepancy_direct{};
  std::array<double, 3> discrepancy_ridge{};
};

// Per-parameter choice between direct and ridge estimates from the self-consistency of each:
// the estimate is turned back into a signal, re-analysed with the same window and grid, and
// re-reconstructed by the same method; the smaller kappa-scaled discrepancy wins.
inline AdaptiveResult adaptive_select(const RealSignal& signal, const TFRMatrix& tfr, const SupportCurve& curve, const Kappa& kappa = {},
                                      std::size_t edge = 0) {
  if (is_squeezed(tfr.kind)) throw ContractError("adaptive_select expects a WFT or WT");
  const auto freq = natural_frequency_estimate(tfr.window);
  TfrOptions opt = tfr.options;
  if (opt.padding == Padding::Exact) opt.padding = Padding::Reflection;  // no generating spec for rebuilt signals
  opt.source.reset();
  opt.pad_len = tfr.pad_len;

  auto direct_of = [&](const RealSignal& s, const TFRMatrix& h, const SupportCurve& c) {
    std::optional<InstFreqMap> ifm;
    if (freq == FrequencyEstimate::Hybrid) ifm = inst_freq_map(h, s);
    return direct_reconstruct(h, c, freq, ifm ? &*ifm : nullptr);
  };

  AdaptiveResult r;
  r.direct = direct_of(signal, tfr, curve);
  r.ridge = ridge_reconstruct(tfr, curve);

  auto refine = [&](const ComponentTrack& est, bool direct) {
    const RealSignal s = track_signal(est, tfr.time.fs);
    const TFRMatrix h = compute_tfr(s, tfr.window, tfr.grid, opt);
    const SupportCurve c = extract_tfs(h, MaximumBased{});
    return direct ? direct_of(s, h, c) : ridge_reconstruct(h, c);
  };
  const ComponentTrack refined_d = refine(r.direct, true);
  const ComponentTrack refined_r = refine(r.ridge, false);

  const auto ed = error_metrics(refined_d, r.direct, tfr.kind, edge);
  const auto er = error_metrics(refined_r, r.ridge, tfr.kind, edge);
  r.discrepancy_direct = {kappa.direct[0] * ed.eps_a, kappa.direct[1] * ed.eps_phi, kappa.direct[2] * ed.eps_f};
  r.discrepancy_ridge = {kappa.ridge[0] * er.eps_a, kappa.ridge[1] * er.eps_phi, kappa.ridge[2] * er.eps_f};
  for (std::size_t p = 0; p < 3; ++p) r.choice[p] = r.discrepancy_direct[p] <= r.discrepancy_ridge[p] ? Method::Direct : Method::Ridge;

  r.chosen = r.direct;
  r.chosen.method = Method::Mixed;
  const auto pick = [&](std::size_t p) -> const ComponentTrack& { return r.choice[p] == Method::Direct ? r.direct : r.ridge; };
  r.chosen.amplitude = pick(0).amplitude;
  r.chosen.phase = pick(1).phase;
  r.chosen.frequency = pick(2).frequency;
  for (std::size_t i = 0; i < r.chosen.size(); ++i) r.chosen.gap[i] = r.direct.gap[i] | r.ridge.gap[i];
  return r;
}

// Sparse transform: every unimodal region of every column collapses into its reconstructed
// complex amplitude, deposited at the bin of its estimated frequency.
inline TFRMatrix build_skeleton(const TFRMatrix& tfr, Method method, const InstFreqMap* ifm = nullptr) {
  if (is_squeezed(tfr.kind)) throw ContractError("skeletons are built from a WFT or WT");
  if (method != Method::Ridge && method != Method::Direct) throw ContractError("skeleton method must be ridge or direct");
  const auto& c = tfr.window.constants();
  const bool hybrid = method == Method::Direct && !c.d_h_finite();
  if (hybrid && ifm == nullptr) throw ContractError("direct skeleton for this wavelet needs an instantaneous frequency map (hybrid frequency)");
  TFRMatrix out{Matrix<cplx>(tfr.n_freq(), tfr.n_time()), tfr.grid, tfr.time, tfr.window, tfr.kind, tfr.options, tfr.pad_len};
  const std::size_t nf = tfr.n_freq();
  for (std::size_t t = 0; t < tfr.n_time(); ++t) {
    const ColumnScan scan = scan_column(tfr, t);
    for (std::size_t i = 0; i < scan.peaks.size(); ++i) {
      const Peak& p = scan.peaks[i];
      const std::size_t lo = i == 0 ? 0 : scan.minima[i - 1];
      const std::size_t hi = i + 1 == scan.peaks.size() ? nf - 1 : scan.minima[i];
      cplx z;
      double nu = 0.0;
      if (method == Method::Ridge) {
        const cplx v = detail::value_at(tfr, p.bin, p.offset, t);
        z = 2.0 * p.amplitude / c.h_max * (std::abs(v) > 0.0 ? v / std::abs(v) : cplx{1.0, 0.0});
        nu = p.omega;
      } else {
        const auto s = detail::support_sums(tfr, t, lo, hi);
        if (std::abs(s.mass) == 0.0) continue;
        z = s.mass / c.c_h;
        nu = hybrid ? std::real(detail::hybrid_sum(tfr, *ifm, t, lo, hi) / s.mass) : std::real(s.moment / s.mass) * c.c_h / c.d_h - c.omega_bar;
      }
      const long bin = tfr.grid.bin_of(nu);
      if (bin >= 0) out.values(static_cast<std::size_t>(bin), t) += z;
    }
  }
  return out;
}

}  // namespace tfrlab
