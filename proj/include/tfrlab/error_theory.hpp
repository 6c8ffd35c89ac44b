#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "tfrlab/numerics.hpp"
#include "tfrlab/signal.hpp"
#include "tfrlab/support.hpp"
#include "tfrlab/window.hpp"

namespace tfrlab {

// Predicted pointwise errors (estimate minus truth); gap marks times without a prediction.
struct ErrorSeries {
  std::vector<double> d_amp, d_phase, d_freq;
  std::vector<std::uint8_t> gap;

  explicit ErrorSeries(std::size_t n = 0) : d_amp(n, 0.0), d_phase(n, 0.0), d_freq(n, 0.0), gap(n, 0) {}
  [[nodiscard]] std::size_t size() const { return gap.size(); }
};

namespace detail {

// Fourth-order central difference; the two samples at each end are left NaN.
inline std::vector<double> central_derivative(std::span<const double> x, double dt) {
  std::vector<double> d(x.size(), std::nan(""));
  for (std::size_t i = 2; i + 2 < x.size(); ++i) d[i] = (x[i - 2] - 8.0 * x[i - 1] + 8.0 * x[i + 1] - x[i + 2]) / (12.0 * dt);
  return d;
}

inline TrackDerivatives derivatives_of(const ComponentTrack& tr) {
  if (tr.derivatives) return *tr.derivatives;
  if (tr.size() < 5) throw ContractError("numerical derivatives need at least five samples");
  const double dt = tr.time[1] - tr.time[0];
  TrackDerivatives d;
  d.d_amp = central_derivative(tr.amplitude, dt);
  d.d2_amp = central_derivative(d.d_amp, dt);
  d.d_freq = central_derivative(tr.frequency, dt);
  d.d2_freq = central_derivative(d.d_freq, dt);
  return d;
}

inline void check_common_axis(const ComponentTrack& main, std::span<const ComponentTrack> others) {
  if (main.amplitude.empty()) throw ContractError("error predictions need the true amplitude");
  for (const auto& o : others)
    if (o.size() != main.size() || o.amplitude.empty()) throw ContractError("interfering tracks must share the time axis and carry amplitudes");
}

}  // namespace detail

// Ridge errors caused by amplitude and frequency modulation of an isolated component.
inline ErrorSeries ridge_theoretical_errors(const ComponentTrack& truth, const WindowSpec& w) {
  if (truth.amplitude.empty()) throw ContractError("ridge_theoretical_errors needs the true amplitude");
  const auto d = detail::derivatives_of(truth);
  ErrorSeries e(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double a = truth.amplitude[i];
    if (truth.is_gap(i) || !std::isfinite(d.d2_amp[i]) || !std::isfinite(d.d2_freq[i])) {
      e.gap[i] = 1;
      continue;
    }
    const double p2 = w.p_squared(truth.frequency[i]);
    e.d_amp[i] = 0.5 * p2 * d.d2_amp[i];
    e.d_phase[i] = 0.5 * p2 * d.d_freq[i];
    if (a == 0.0) {
      e.gap[i] = 1;
      continue;
    }
    e.d_freq[i] = p2 * (0.5 * d.d2_freq[i] + d.d_amp[i] / a * d.d_freq[i]);
  }
  return e;
}

// The support integral recovers an isolated component exactly, so there is nothing to predict.
inline ErrorSeries direct_theoretical_errors(const ComponentTrack& truth) { return ErrorSeries(truth.size()); }

inline ErrorSeries ridge_interference_errors(const ComponentTrack& main, std::span<const ComponentTrack> others, const WindowSpec& w) {
  detail::check_common_axis(main, others);
  const double h_max = w.constants().h_max;
  ErrorSeries e(main.size());
  for (std::size_t i = 0; i < main.size(); ++i) {
    const double a0 = main.amplitude[i];
    for (const auto& o : others) {
      if (o.is_gap(i)) continue;
      const double h = w.transfer(o.frequency[i], main.frequency[i]) / h_max;
      const double dphi = o.phase[i] - main.phase[i];
      e.d_amp[i] += o.amplitude[i] * h * std::cos(dphi);
      e.d_phase[i] += o.amplitude[i] / a0 * h * std::sin(dphi);
      e.d_freq[i] += o.amplitude[i] / a0 * h * (o.frequency[i] - main.frequency[i]) * std::cos(dphi);
    }
    if (main.is_gap(i) || a0 == 0.0) e.gap[i] = 1;
  }
  return e;
}

namespace detail {

// Integral of h_nu(omega) * omega over a range of the measure coordinate.
inline double first_moment(const WindowSpec& w, double nu, double mu_lo, double mu_hi) {
  const auto [u_lo, u_hi] = w.profile_range();
  const double lo = std::max(mu_lo, w.mu(nu) + u_lo);
  const double hi = std::min(mu_hi, w.mu(nu) + u_hi);
  if (!(hi > lo)) return 0.0;
  return integrate([&](double m) { return w.profile(m - w.mu(nu)) * w.from_mu(m); }, lo, hi, 1e-11);
}

}  // namespace detail

// Interference errors of support integration over [omega_-, omega_+].
inline ErrorSeries direct_interference_errors(const ComponentTrack& main, std::span<const ComponentTrack> others, const SupportCurve& support,
                                              const WindowSpec& w) {
  detail::check_common_axis(main, others);
  if (support.size() != main.size()) throw ContractError("support curve must share the time axis of the tracks");
  const auto& c = w.constants();
  const bool freq = c.d_h_finite();
  ErrorSeries e(main.size());
  for (std::size_t i = 0; i < main.size(); ++i) {
    if (main.is_gap(i) || support.gap[i] || main.amplitude[i] == 0.0) {
      e.gap[i] = 1;
      continue;
    }
    const double a0 = main.amplitude[i];
    const double nu0 = main.frequency[i];
    const double lo = support.omega_minus[i];
    const double hi = support.omega_plus[i];
    e.d_amp[i] = -a0 * (1.0 - w.q_tilde(nu0, lo, hi));
    double in_moment = 0.0;  // sum of side-component moments weighted by cos(dphi) A_m/A0
    for (const auto& o : others) {
      if (o.is_gap(i)) continue;
      const double q = w.q_tilde(o.frequency[i], lo, hi);
      const double dphi = o.phase[i] - main.phase[i];
      e.d_amp[i] += o.amplitude[i] * q * std::cos(dphi);
      e.d_phase[i] += o.amplitude[i] / a0 * q * std::sin(dphi);
      if (freq) in_moment += o.amplitude[i] / a0 * std::cos(dphi) * detail::first_moment(w, o.frequency[i], w.mu(lo), w.mu(hi));
    }
    if (!freq) continue;
    const double inf = std::numeric_limits<double>::infinity();
    const double out_moment = detail::first_moment(w, nu0, -inf, w.mu(lo)) + detail::first_moment(w, nu0, w.mu(hi), inf);
    e.d_freq[i] = -(nu0 + c.omega_bar) * e.d_amp[i] / a0 - 0.5 / c.d_h * (out_moment - in_moment);
  }
  if (!freq) {
    // frequency follows the hybrid estimate for this wavelet; see hybrid_interference_error
    for (auto& v : e.d_freq) v = std::nan("");
  }
  return e;
}

inline std::vector<double> hybrid_interference_error(const ComponentTrack& main, std::span<const ComponentTrack> others, const SupportCurve& support,
                                                     const WindowSpec& w) {
  detail::check_common_axis(main, others);
  if (support.size() != main.size()) throw ContractError("support curve must share the time axis of the tracks");
  std::vector<double> d(main.size(), 0.0);
  for (std::size_t i = 0; i < main.size(); ++i) {
    if (main.is_gap(i) || support.gap[i] || main.amplitude[i] == 0.0) {
      d[i] = std::nan("");
      continue;
    }
    for (const auto& o : others) {
      if (o.is_gap(i)) continue;
      const double q = w.q_tilde(o.frequency[i], support.omega_minus[i], support.omega_plus[i]);
      d[i] += o.amplitude[i] / main.amplitude[i] * (o.frequency[i] - main.frequency[i]) * q * std::cos(o.phase[i] - main.phase[i]);
    }
  }
  return d;
}

// rms of a predicted series over valid samples, optionally dropping `edge` samples at each end.
inline double prediction_rms(std::span<const double> series, std::span<const std::uint8_t> gap, std::size_t edge = 0) {
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t i = edge; i + edge < series.size(); ++i) {
    if ((!gap.empty() && gap[i]) || !std::isfinite(series[i])) continue;
    s += series[i] * series[i];
    ++n;
  }
  if (n == 0) throw UndefinedMetricError("prediction_rms: no valid samples");
  return std::sqrt(s / static_cast<double>(n));
}

}  // namespace tfrlab
