#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "tfrlab/common.hpp"
#include "tfrlab/fft.hpp"
#include "tfrlab/grid.hpp"
#include "tfrlab/signal.hpp"
#include "tfrlab/window.hpp"

namespace tfrlab {

enum class Padding { Zero, Reflection, Periodic, Exact };

inline std::string to_string(Padding p) {
  switch (p) {
    case Padding::Zero: return "zero";
    case Padding::Reflection: return "reflection";
    case Padding::Periodic: return "periodic";
    case Padding::Exact: return "exact";
  }
  return "?";
}

inline Padding padding_from_string(const std::string& s) {
  if (s == "zero") return Padding::Zero;
  if (s == "reflection") return Padding::Reflection;
  if (s == "periodic") return Padding::Periodic;
  if (s == "exact") return Padding::Exact;
  throw ConfigError("unknown padding '" + s + "' (expected zero, reflection, periodic or exact)");
}

struct TimeAxis {
  double t0 = 0.0;
  double fs = 1.0;
  std::size_t n = 0;
  [[nodiscard]] double at(std::size_t k) const { return t0 + static_cast<double>(k) / fs; }
};

struct TfrOptions {
  Padding padding = Padding::Reflection;
  std::optional<std::size_t> pad_len;        // samples per side; defaults to the window's time support
  std::shared_ptr<const SignalSpec> source;  // required for exact padding
};

struct TFRMatrix {
  Matrix<cplx> values;  // [n_freq x n_time]
  FrequencyGrid grid;
  TimeAxis time;
  WindowSpec window;
  TransformKind kind;
  TfrOptions options;    // padding used to compute it
  std::size_t pad_len = 0;

  [[nodiscard]] std::size_t n_freq() const { return values.rows(); }
  [[nodiscard]] std::size_t n_time() const { return values.cols(); }
};

// Extends a record by pad_len samples on both sides.
inline RealSignal pad_signal(const RealSignal& s, Padding mode, std::size_t pad_len, const SignalSpec* source = nullptr) {
  if (pad_len == 0) return s;
  const std::size_t n = s.size();
  RealSignal out{std::vector<double>(n + 2 * pad_len, 0.0), s.fs, s.t0 - static_cast<double>(pad_len) / s.fs};
  if (mode == Padding::Exact) {
    if (source == nullptr) throw ContractError("exact padding requires the generating signal spec");
    out = synthesize_span(*source, s.fs, out.t0, n + 2 * pad_len);
    std::copy(s.samples.begin(), s.samples.end(), out.samples.begin() + static_cast<std::ptrdiff_t>(pad_len));
    return out;
  }
  std::copy(s.samples.begin(), s.samples.end(), out.samples.begin() + static_cast<std::ptrdiff_t>(pad_len));
  if (mode == Padding::Zero || n == 0) return out;
  auto source_index = [&](long k) -> std::size_t {
    const long len = static_cast<long>(n);
    if (mode == Padding::Periodic) return static_cast<std::size_t>(((k % len) + len) % len);
    if (len == 1) return 0;
    // mirror about the end samples without repeating them: s[-k] = s[k]
    const long period = 2 * (len - 1);
    long m = ((k % period) + period) % period;
    if (m >= len) m = period - m;
    return static_cast<std::size_t>(m);
  };
  for (std::size_t i = 0; i < pad_len; ++i) {
    const long before = -static_cast<long>(pad_len - i);
    out.samples[i] = s.samples[source_index(before)];
    const long after = static_cast<long>(n + i);
    out.samples[n + pad_len + i] = s.samples[source_index(after)];
  }
  return out;
}

// Samples per side needed to cover the widest analysis window at eps = pad_eps.
inline std::size_t default_pad_len(const WindowSpec& w, const FrequencyGrid& grid, double fs) {
  const auto sup = w.epsilon_support(defaults::pad_eps);
  double half = std::max(std::abs(sup.tau1), std::abs(sup.tau2));
  if (w.is_wavelet()) half *= w.omega_psi() / grid.omega_min();
  return static_cast<std::size_t>(std::ceil(half * fs));
}

namespace detail {

inline void check_grid(const WindowSpec& w, const FrequencyGrid& g) {
  if (w.is_wavelet() && g.scale() != GridScale::Logarithmic) throw ContractError("wavelet transforms require a logarithmic grid");
  if (!w.is_wavelet() && g.scale() != GridScale::Linear) throw ContractError("windowed Fourier transforms require a linear grid");
}

// Transform core: values and/or time derivative for every bin of the grid.
struct EngineOutput {
  Matrix<cplx> values;
  Matrix<cplx> derivative;
  std::size_t pad_len = 0;
};

inline EngineOutput run_engine(const RealSignal& signal, const WindowSpec& w, const FrequencyGrid& grid, const TfrOptions& opt,
                               bool want_values, bool want_derivative) {
  check_grid(w, grid);
  if (signal.size() < 2) throw ContractError("compute_tfr requires at least two samples");
  const std::size_t pad = opt.pad_len ? *opt.pad_len : default_pad_len(w, grid, signal.fs);
  const RealSignal padded = pad_signal(signal, opt.padding, pad, opt.source.get());
  const std::size_t len = padded.size();
  const std::size_t m = fft::fast_size(len);
  std::vector<double> x(m, 0.0);
  std::copy(padded.samples.begin(), padded.samples.end(), x.begin());
  const std::vector<cplx> spec = fft::forward_real(x);
  const std::size_t n_pos = m / 2;  // highest usable index
  const double dxi = two_pi * signal.fs / static_cast<double>(m);
  const std::size_t n_out = signal.size();
  const std::size_t nf = grid.size();

  EngineOutput out;
  out.pad_len = pad;
  if (want_values) out.values = Matrix<cplx>(nf, n_out);
  if (want_derivative) out.derivative = Matrix<cplx>(nf, n_out);

  const fft::Backward plan(m);
  const auto [v_lo, v_hi] = w.density_range();
  const double inv_m = 1.0 / static_cast<double>(m);

#pragma omp parallel
  {
    auto in = fft::allocate<cplx>(m);
    auto res = fft::allocate<cplx>(m);
#pragma omp for schedule(dynamic, 8)
    for (std::ptrdiff_t kk = 0; kk < static_cast<std::ptrdiff_t>(nf); ++kk) {
      const auto k = static_cast<std::size_t>(kk);
      const double omega = grid.omega(k);
      double xi_lo = 0.0;
      double xi_hi = 0.0;
      if (w.is_wavelet()) {
        xi_lo = omega * std::exp(v_lo);
        xi_hi = omega * std::exp(v_hi);
      } else {
        xi_lo = omega - v_hi;
        xi_hi = omega - v_lo;
      }
      const auto j_lo = static_cast<std::size_t>(std::clamp(std::ceil(xi_lo / dxi), 0.0, static_cast<double>(n_pos) + 1.0));
      const auto j_hi = static_cast<std::size_t>(std::clamp(std::floor(xi_hi / dxi), -1.0, static_cast<double>(n_pos)) + 1.0);
      for (int pass = 0; pass < 2; ++pass) {
        const bool deriv = pass == 1;
        if (deriv ? !want_derivative : !want_values) continue;
        std::fill(in.get(), in.get() + m, cplx{});
        for (std::size_t j = j_lo; j < j_hi; ++j) {
          const double xi = dxi * static_cast<double>(j);
          double h = w.transfer(xi, omega);
          if (j == 0 || (j == n_pos && m % 2 == 0)) h *= 0.5;
          cplx c = spec[j] * h;
          if (deriv) c *= cplx(0.0, xi);
          in[j] = c;
        }
        plan.execute(in.get(), res.get());
        auto row = deriv ? out.derivative.row(k) : out.values.row(k);
        for (std::size_t t = 0; t < n_out; ++t) row[t] = res[t + pad] * inv_m;
      }
    }
  }
  return out;
}

}  // namespace detail

inline TFRMatrix compute_tfr(const RealSignal& signal, const WindowSpec& window, const FrequencyGrid& grid, const TfrOptions& options = {}) {
  auto out = detail::run_engine(signal, window, grid, options, true, false);
  return TFRMatrix{std::move(out.values),
                   grid,
                   TimeAxis{signal.t0, signal.fs, signal.size()},
                   window,
                   window.is_wavelet() ? TransformKind::WT : TransformKind::WFT,
                   options,
                   out.pad_len};
}

// Time derivative of the transform, computed with the i*xi multiplier on the same padding.
inline Matrix<cplx> compute_tfr_derivative(const RealSignal& signal, const TFRMatrix& tfr) {
  TfrOptions opt = tfr.options;
  opt.pad_len = tfr.pad_len;
  return detail::run_engine(signal, tfr.window, tfr.grid, opt, false, true).derivative;
}

struct AnalyticPoint {
  cplx value;
  double power;    // |H|^2 from the interference expansion
  double nu_h;     // weighted instantaneous frequency; NaN when undefined
  bool nu_valid;
};

// Closed-form transform of a multitone signal at (omega, t).
inline AnalyticPoint analytic_multitone_tfr(const MultiTone& tones, const WindowSpec& w, double omega, double t) {
  const std::size_t n = tones.tones.size();
  std::vector<double> h(n), a(n), nu(n), ph(n);
  AnalyticPoint p{};
  for (std::size_t i = 0; i < n; ++i) {
    const auto& tn = tones.tones[i];
    if (!(tn.frequency > 0.0)) throw DomainError("analytic_multitone_tfr requires positive tone frequencies");
    h[i] = w.transfer(tn.frequency, omega);
    a[i] = tn.amplitude;
    nu[i] = tn.frequency;
    ph[i] = tn.frequency * t + tn.phase;
    p.value += 0.5 * a[i] * h[i] * std::polar(1.0, ph[i]);
  }
  double power = 0.0;
  double weighted = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double self = a[i] * a[i] * h[i] * h[i] / 4.0;
    power += self;
    weighted += self * nu[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      const double cross = a[i] * a[j] * h[i] * h[j] * std::cos(ph[j] - ph[i]);
      power += cross / 2.0;
      weighted += cross * (nu[i] + nu[j]) / 4.0;
    }
  }
  p.power = power;
  p.nu_valid = power > 0.0;
  p.nu_h = p.nu_valid ? weighted / power : std::nan("");
  return p;
}

}  // namespace tfrlab
