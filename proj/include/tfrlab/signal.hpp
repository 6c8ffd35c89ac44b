#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "tfrlab/common.hpp"
#include "tfrlab/numerics.hpp"

namespace tfrlab {

struct Tone {
  double amplitude = 1.0;
  double frequency = 0.0;  // rad/s
  double phase = 0.0;
};

struct MultiTone {
  std::vector<Tone> tones;
};

// A [1 + r_a cos(nu_a t + phi_a)] cos(nu t + phi)
struct AmComponent {
  double amplitude = 1.0;
  double depth = 0.0;        // r_a
  double mod_freq = 0.0;     // nu_a
  double mod_phase = 0.0;    // phi_a
  double carrier = 0.0;      // nu
  double phase = 0.0;        // phi
};

// A cos(nu t + phi + r_b sin(nu_b t + phi_b))
struct FmComponent {
  double amplitude = 1.0;
  double depth = 0.0;        // r_b
  double mod_freq = 0.0;     // nu_b
  double mod_phase = 0.0;    // phi_b
  double carrier = 0.0;      // nu
  double phase = 0.0;        // phi
};

// A cos(nu t + phi) + (sigma / sqrt 2) zeta(t), zeta unit-variance white Gaussian noise.
struct NoisyTone {
  double carrier = 0.0;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  double amplitude = 1.0;
  double phase = 0.0;
};

// Discrete delta: adds `amplitude` to the sample nearest to t0.
struct DeltaPulse {
  double t0 = 0.0;
  double amplitude = 1.0;
};

struct SignalSpec;

struct Composite {
  std::vector<SignalSpec> parts;
};

struct SignalSpec {
  std::variant<MultiTone, AmComponent, FmComponent, NoisyTone, DeltaPulse, Composite> model;
};

struct RealSignal {
  std::vector<double> samples;
  double fs = 1.0;
  double t0 = 0.0;
  [[nodiscard]] std::size_t size() const { return samples.size(); }
  [[nodiscard]] double time(std::size_t k) const { return t0 + static_cast<double>(k) / fs; }
  [[nodiscard]] double duration() const { return static_cast<double>(samples.size()) / fs; }
};

enum class Method { Truth, Ridge, Direct, Hybrid, Mixed };
enum class TransformKind { WFT, WT, SWFT, SWT };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::Truth: return "truth";
    case Method::Ridge: return "ridge";
    case Method::Direct: return "direct";
    case Method::Hybrid: return "hybrid";
    case Method::Mixed: return "mixed";
  }
  return "?";
}

inline std::string to_string(TransformKind k) {
  switch (k) {
    case TransformKind::WFT: return "WFT";
    case TransformKind::WT: return "WT";
    case TransformKind::SWFT: return "SWFT";
    case TransformKind::SWT: return "SWT";
  }
  return "?";
}

inline bool is_wavelet_family(TransformKind k) { return k == TransformKind::WT || k == TransformKind::SWT; }
inline bool is_squeezed(TransformKind k) { return k == TransformKind::SWFT || k == TransformKind::SWT; }

// Analytic first and second derivatives of a truth track.
struct TrackDerivatives {
  std::vector<double> d_amp, d2_amp, d_freq, d2_freq;
};

struct ComponentTrack {
  std::vector<double> time;
  std::vector<double> amplitude;  // empty when not reconstructed
  std::vector<double> phase;      // unwrapped
  std::vector<double> frequency;  // rad/s
  std::vector<std::uint8_t> gap;  // 1 where the component is missing
  Method method = Method::Truth;
  std::optional<TransformKind> transform;
  std::optional<TrackDerivatives> derivatives;

  [[nodiscard]] std::size_t size() const { return time.size(); }
  [[nodiscard]] bool is_gap(std::size_t i) const { return !gap.empty() && gap[i] != 0; }
};

struct Synthesis {
  RealSignal signal;
  std::vector<ComponentTrack> truth;
};

struct BesselExpansion {
  std::vector<double> positive;  // J_0 .. J_{n_J}
  int order = 0;                 // n_J
  [[nodiscard]] double coefficient(int n) const {
    const int m = std::abs(n);
    if (m > order) return 0.0;
    const double v = positive[static_cast<std::size_t>(m)];
    return (n < 0 && (m % 2 == 1)) ? -v : v;
  }
};

// J_n(r_b) for |n| <= n_J, n_J being the largest order with |J_n| above eps_J.
inline BesselExpansion bessel_expansion(double r_b, double eps_j = defaults::eps_bessel) {
  if (!(r_b >= 0.0)) throw DomainError("bessel_expansion requires r_b >= 0");
  if (!(eps_j > 0.0 && eps_j < 1.0)) throw DomainError("bessel_expansion requires 0 < eps_J < 1");
  const int n_max = static_cast<int>(std::ceil(r_b + 12.0 * std::cbrt(r_b + 1.0) + 10.0));
  BesselExpansion b;
  for (int n = 0; n <= n_max; ++n) {
    const double j = std::cyl_bessel_j(static_cast<double>(n), r_b);
    if (std::abs(j) > eps_j) b.order = n;
  }
  for (int n = 0; n <= b.order; ++n) b.positive.push_back(std::cyl_bessel_j(static_cast<double>(n), r_b));
  return b;
}

inline MultiTone am_as_tones(const AmComponent& am) {
  const double side = 0.5 * am.amplitude * am.depth;
  return MultiTone{{{side, am.carrier - am.mod_freq, am.phase - am.mod_phase},
                    {am.amplitude, am.carrier, am.phase},
                    {side, am.carrier + am.mod_freq, am.phase + am.mod_phase}}};
}

inline MultiTone fm_as_tones(const FmComponent& fm, double eps_j = defaults::eps_bessel) {
  const auto b = bessel_expansion(fm.depth, eps_j);
  MultiTone mt;
  for (int n = -b.order; n <= b.order; ++n) {
    const double c = b.coefficient(n);
    if (c == 0.0) continue;
    const double phase = fm.phase + n * fm.mod_phase + (c < 0.0 ? pi : 0.0);
    mt.tones.push_back({fm.amplitude * std::abs(c), fm.carrier + n * fm.mod_freq, phase});
  }
  return mt;
}

namespace detail {

inline std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

// Counter-based SplitMix64: sample k of a stream depends only on (seed, k), which keeps
// noise identical between a record and any padded extension of it.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline double unit_open(std::uint64_t bits) { return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53; }

// Standard normal deviate for sample index k (Box-Muller on two hashed uniforms).
inline double gaussian_at(std::uint64_t seed, std::int64_t k) {
  const std::uint64_t key = splitmix64(seed ^ 0xD1B54A32D192ED03ull) + 2 * static_cast<std::uint64_t>(k);
  const double u1 = unit_open(splitmix64(key));
  const double u2 = unit_open(splitmix64(key + 1));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

inline double max_frequency(const SignalSpec& spec, double eps_j);

struct MaxFreq {
  double eps_j;
  double operator()(const MultiTone& m) const {
    double f = 0.0;
    for (const auto& t : m.tones) f = std::max(f, t.frequency);
    return f;
  }
  double operator()(const AmComponent& a) const { return a.carrier + a.mod_freq; }
  double operator()(const FmComponent& f) const {
    return f.carrier + std::max(bessel_expansion(f.depth, eps_j).order * f.mod_freq, f.depth * f.mod_freq);
  }
  double operator()(const NoisyTone& n) const { return n.carrier; }
  double operator()(const DeltaPulse&) const { return 0.0; }
  double operator()(const Composite& c) const {
    double f = 0.0;
    for (const auto& p : c.parts) f = std::max(f, max_frequency(p, eps_j));
    return f;
  }
};

inline double max_frequency(const SignalSpec& spec, double eps_j) { return std::visit(MaxFreq{eps_j}, spec.model); }

}  // namespace detail

// Throws SpecError naming the first violated model constraint.
inline void validate(const SignalSpec& spec, double eps_j = defaults::eps_bessel) {
  using detail::fmt;
  struct V {
    double eps_j;
    void operator()(const MultiTone& m) const {
      if (m.tones.empty()) throw SpecError("MultiTone: at least one tone is required");
      for (std::size_t i = 0; i < m.tones.size(); ++i) {
        const auto& t = m.tones[i];
        if (!(t.amplitude >= 0.0)) throw SpecError("MultiTone: amplitude a_m >= 0 violated at tone " + std::to_string(i));
        if (!(t.frequency > 0.0)) throw SpecError("MultiTone: frequency nu_m > 0 violated at tone " + std::to_string(i));
        if (i > 0 && !(t.frequency > m.tones[i - 1].frequency))
          throw SpecError("MultiTone: frequencies must be strictly increasing (tone " + std::to_string(i) + ")");
      }
    }
    void operator()(const AmComponent& a) const {
      if (!(a.amplitude > 0.0)) throw SpecError("AM: amplitude A > 0 violated");
      if (!(a.depth >= 0.0 && a.depth <= 1.0)) throw SpecError("AM: 0 <= r_a <= 1 violated (r_a=" + fmt(a.depth) + ")");
      if (!(a.mod_freq >= 0.0 && a.mod_freq < a.carrier))
        throw SpecError("AM: 0 <= nu_a < nu violated (nu_a=" + fmt(a.mod_freq) + ", nu=" + fmt(a.carrier) + ")");
    }
    void operator()(const FmComponent& f) const {
      if (!(f.amplitude > 0.0)) throw SpecError("FM: amplitude A > 0 violated");
      if (!(f.carrier > 0.0)) throw SpecError("FM: carrier nu > 0 violated");
      if (!(f.depth >= 0.0)) throw SpecError("FM: r_b >= 0 violated");
      if (!(f.mod_freq >= 0.0)) throw SpecError("FM: nu_b >= 0 violated");
      if (!(f.depth * f.mod_freq < f.carrier))
        throw SpecError("FM: r_b * nu_b < nu violated (r_b*nu_b=" + fmt(f.depth * f.mod_freq) + ", nu=" + fmt(f.carrier) + ")");
      const int nj = bessel_expansion(f.depth, eps_j).order;
      if (!(nj * f.mod_freq < f.carrier))
        throw SpecError("FM: n_J(r_b) * nu_b < nu violated (n_J=" + std::to_string(nj) + ", nu_b=" + fmt(f.mod_freq) + ", nu=" + fmt(f.carrier) + ")");
    }
    void operator()(const NoisyTone& n) const {
      if (!(n.carrier > 0.0)) throw SpecError("NoisyTone: nu > 0 violated");
      if (!(n.sigma >= 0.0)) throw SpecError("NoisyTone: sigma >= 0 violated");
      if (!(n.amplitude >= 0.0)) throw SpecError("NoisyTone: amplitude >= 0 violated");
    }
    void operator()(const DeltaPulse& d) const {
      if (!std::isfinite(d.t0) || !std::isfinite(d.amplitude)) throw SpecError("DeltaPulse: finite t0 and amplitude required");
    }
    void operator()(const Composite& c) const {
      if (c.parts.empty()) throw SpecError("Composite: at least one part is required");
      for (const auto& p : c.parts) std::visit(*this, p.model);
    }
  };
  std::visit(V{eps_j}, spec.model);
}

namespace detail {

struct Sampler {
  double fs;
  double t_start;
  std::size_t n;
  std::vector<double>& out;

  [[nodiscard]] double t(std::size_t k) const { return t_start + static_cast<double>(k) / fs; }

  void operator()(const MultiTone& m) const {
    for (std::size_t k = 0; k < n; ++k)
      for (const auto& tone : m.tones) out[k] += tone.amplitude * std::cos(tone.frequency * t(k) + tone.phase);
  }
  void operator()(const AmComponent& a) const {
    for (std::size_t k = 0; k < n; ++k)
      out[k] += a.amplitude * (1.0 + a.depth * std::cos(a.mod_freq * t(k) + a.mod_phase)) * std::cos(a.carrier * t(k) + a.phase);
  }
  void operator()(const FmComponent& f) const {
    for (std::size_t k = 0; k < n; ++k)
      out[k] += f.amplitude * std::cos(f.carrier * t(k) + f.phase + f.depth * std::sin(f.mod_freq * t(k) + f.mod_phase));
  }
  void operator()(const NoisyTone& nt) const {
    const double scale = nt.sigma / std::sqrt(2.0);
    for (std::size_t k = 0; k < n; ++k) {
      const auto idx = static_cast<std::int64_t>(std::llround(t(k) * fs));
      out[k] += nt.amplitude * std::cos(nt.carrier * t(k) + nt.phase) + scale * gaussian_at(nt.seed, idx);
    }
  }
  void operator()(const DeltaPulse& d) const {
    const auto target = std::llround(d.t0 * fs);
    for (std::size_t k = 0; k < n; ++k)
      if (std::llround(t(k) * fs) == target) out[k] += d.amplitude;
  }
  void operator()(const Composite& c) const {
    for (const auto& p : c.parts) std::visit(*this, p.model);
  }
};

inline ComponentTrack make_track(std::size_t n, double fs, double t_start) {
  ComponentTrack tr;
  tr.time.resize(n);
  for (std::size_t k = 0; k < n; ++k) tr.time[k] = t_start + static_cast<double>(k) / fs;
  tr.amplitude.assign(n, 0.0);
  tr.phase.assign(n, 0.0);
  tr.frequency.assign(n, 0.0);
  tr.gap.assign(n, 0);
  tr.derivatives = TrackDerivatives{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  return tr;
}

struct Truth {
  double fs;
  double t_start;
  std::size_t n;
  std::vector<ComponentTrack>& out;

  void tone(double a, double nu, double phi) const {
    auto tr = make_track(n, fs, t_start);
    for (std::size_t k = 0; k < n; ++k) {
      tr.amplitude[k] = a;
      tr.phase[k] = nu * tr.time[k] + phi;
      tr.frequency[k] = nu;
    }
    out.push_back(std::move(tr));
  }
  void operator()(const MultiTone& m) const {
    for (const auto& t : m.tones) tone(t.amplitude, t.frequency, t.phase);
  }
  void operator()(const AmComponent& a) const {
    auto tr = make_track(n, fs, t_start);
    auto& d = *tr.derivatives;
    for (std::size_t k = 0; k < n; ++k) {
      const double arg = a.mod_freq * tr.time[k] + a.mod_phase;
      tr.amplitude[k] = a.amplitude * (1.0 + a.depth * std::cos(arg));
      tr.phase[k] = a.carrier * tr.time[k] + a.phase;
      tr.frequency[k] = a.carrier;
      d.d_amp[k] = -a.amplitude * a.depth * a.mod_freq * std::sin(arg);
      d.d2_amp[k] = -a.amplitude * a.depth * a.mod_freq * a.mod_freq * std::cos(arg);
    }
    out.push_back(std::move(tr));
  }
  void operator()(const FmComponent& f) const {
    auto tr = make_track(n, fs, t_start);
    auto& d = *tr.derivatives;
    for (std::size_t k = 0; k < n; ++k) {
      const double arg = f.mod_freq * tr.time[k] + f.mod_phase;
      tr.amplitude[k] = f.amplitude;
      tr.phase[k] = f.carrier * tr.time[k] + f.phase + f.depth * std::sin(arg);
      tr.frequency[k] = f.carrier + f.depth * f.mod_freq * std::cos(arg);
      d.d_freq[k] = -f.depth * f.mod_freq * f.mod_freq * std::sin(arg);
      d.d2_freq[k] = -f.depth * f.mod_freq * f.mod_freq * f.mod_freq * std::cos(arg);
    }
    out.push_back(std::move(tr));
  }
  void operator()(const NoisyTone& nt) const {
    if (nt.amplitude > 0.0) tone(nt.amplitude, nt.carrier, nt.phase);
  }
  void operator()(const DeltaPulse&) const {}
  void operator()(const Composite& c) const {
    for (const auto& p : c.parts) std::visit(*this, p.model);
  }
};

}  // namespace detail

// n samples starting at t_start; the building block of exact padding.
inline RealSignal synthesize_span(const SignalSpec& spec, double fs, double t_start, std::size_t n) {
  RealSignal s{std::vector<double>(n, 0.0), fs, t_start};
  std::visit(detail::Sampler{fs, t_start, n, s.samples}, spec.model);
  return s;
}

inline Synthesis synthesize(const SignalSpec& spec, double fs, double duration, double eps_j = defaults::eps_bessel) {
  validate(spec, eps_j);
  if (!(fs > 0.0)) throw SpecError("sampling rate fs > 0 violated");
  if (!(duration > 0.0)) throw SpecError("duration > 0 violated");
  const double f_max = detail::max_frequency(spec, eps_j);
  if (!(fs > 2.0 * f_max / two_pi))
    throw SpecError("sampling: fs > 2 * max frequency / 2pi violated (fs=" + detail::fmt(fs) + ", max=" + detail::fmt(f_max / two_pi) + " Hz)");
  const auto n = static_cast<std::size_t>(std::llround(duration * fs));
  Synthesis out;
  out.signal = synthesize_span(spec, fs, 0.0, n);
  std::visit(detail::Truth{fs, 0.0, n, out.truth}, spec.model);
  return out;
}

}  // namespace tfrlab
