#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "tfrlab/common.hpp"
#include "tfrlab/fft.hpp"
#include "tfrlab/numerics.hpp"

namespace tfrlab {

enum class WindowKind { Gaussian, Morlet, Lognormal };

inline std::string to_string(WindowKind k) {
  switch (k) {
    case WindowKind::Gaussian: return "gaussian";
    case WindowKind::Morlet: return "morlet";
    case WindowKind::Lognormal: return "lognormal";
  }
  return "?";
}

inline WindowKind window_kind_from_string(const std::string& s) {
  if (s == "gaussian") return WindowKind::Gaussian;
  if (s == "morlet") return WindowKind::Morlet;
  if (s == "lognormal") return WindowKind::Lognormal;
  throw ConfigError("unknown window kind '" + s + "' (expected gaussian, morlet or lognormal)");
}

// Frequency interval [xi1, xi2] (rad/s) and time interval [tau1, tau2] (s), each holding 1-eps of the mass.
struct EpsilonSupport {
  double xi1, xi2, tau1, tau2;
};

struct AdmissibilityConstants {
  double c_h;         // half the integral of the transfer function over the reconstruction measure
  double d_h;         // first-moment constant; +inf when it diverges
  double omega_bar;   // mean frequency offset of the window
  double h_max;       // peak of the transfer function
  [[nodiscard]] bool d_h_finite() const { return std::isfinite(d_h); }
};

// Window (WFT) or wavelet (WT) given by its peak-normalised Fourier transform.
//
// Internally every kind is described by a unimodal density over a "shape coordinate" v:
// v = xi for windows and v = log(xi/omega_psi) for wavelets. The transfer function
// h_nu(omega) seen on the reconstruction measure mu (omega or log omega) is that density
// evaluated at u = mu(omega) - mu(nu) for windows and at -u for wavelets.
class WindowSpec {
 public:
  WindowSpec(WindowKind kind, double f0) : kind_(kind), f0_(f0) {
    if (!(f0 > 0.0) || !std::isfinite(f0)) throw DomainError("window f0 must be positive and finite");
    a_ = two_pi * f0;
    if (kind == WindowKind::Morlet) {
      auto slope = [a = a_](double x) { return -(x - a) + a / std::expm1(a * x); };
      double lo = 1e-9 * std::max(1.0, a_);
      while (!(slope(lo) > 0.0)) lo *= 0.5;
      omega_psi_ = find_root(slope, lo, a_ + 1.0);
      log_norm_ = log_morlet_raw(omega_psi_);
    } else if (kind == WindowKind::Lognormal) {
      omega_psi_ = 1.0;
    }
    locate_tails();
    compute_constants();
  }

  static WindowSpec gaussian(double f0) { return {WindowKind::Gaussian, f0}; }
  static WindowSpec morlet(double f0) { return {WindowKind::Morlet, f0}; }
  static WindowSpec lognormal(double f0) { return {WindowKind::Lognormal, f0}; }

  [[nodiscard]] WindowKind kind() const { return kind_; }
  [[nodiscard]] double f0() const { return f0_; }
  [[nodiscard]] bool is_wavelet() const { return kind_ != WindowKind::Gaussian; }
  // Wavelet peak frequency; zero for windows.
  [[nodiscard]] double omega_psi() const { return omega_psi_; }
  [[nodiscard]] const AdmissibilityConstants& constants() const { return constants_; }

  // Peak-normalised window/wavelet Fourier transform.
  [[nodiscard]] double shape(double xi) const {
    const double l = log_shape(xi);
    return l == -std::numeric_limits<double>::infinity() ? 0.0 : std::exp(l);
  }

  [[nodiscard]] double log_shape(double xi) const {
    switch (kind_) {
      case WindowKind::Gaussian: return -0.5 * f0_ * f0_ * xi * xi;
      case WindowKind::Lognormal: {
        if (!(xi > 0.0)) return -std::numeric_limits<double>::infinity();
        const double l = std::log(xi / omega_psi_);
        return -0.5 * a_ * a_ * l * l;
      }
      case WindowKind::Morlet:
        if (!(xi > 0.0)) return -std::numeric_limits<double>::infinity();
        return log_morlet_raw(xi) - log_norm_;
    }
    return 0.0;
  }

  // h_nu(omega): response at analysis frequency omega to a tone of frequency nu.
  [[nodiscard]] double transfer(double nu, double omega) const {
    if (!is_wavelet()) return shape(omega - nu);
    if (!(omega > 0.0)) throw DomainError("wavelet transfer requires omega > 0");
    return shape(omega_psi_ * nu / omega);
  }

  [[nodiscard]] double log_transfer(double nu, double omega) const {
    if (!is_wavelet()) return log_shape(omega - nu);
    if (!(omega > 0.0)) throw DomainError("wavelet transfer requires omega > 0");
    return log_shape(omega_psi_ * nu / omega);
  }

  // Reconstruction measure coordinate.
  [[nodiscard]] double mu(double omega) const {
    if (!is_wavelet()) return omega;
    if (!(omega > 0.0)) throw DomainError("wavelet measure requires omega > 0");
    return std::log(omega);
  }
  [[nodiscard]] double from_mu(double m) const { return is_wavelet() ? std::exp(m) : m; }

  // Transfer function as a function of u = mu(omega) - mu(nu).
  [[nodiscard]] double profile(double u) const { return density(is_wavelet() ? -u : u); }

  // Range of u outside which the profile is negligible.
  [[nodiscard]] std::pair<double, double> profile_range() const {
    return is_wavelet() ? std::pair{-v_hi_, -v_lo_} : std::pair{v_lo_, v_hi_};
  }

  // Q_nu(omega): fraction of a tone's reconstruction mass lying below omega.
  [[nodiscard]] double cumulative_q(double nu, double omega) const {
    if (is_wavelet()) {
      if (omega <= 0.0) return 0.0;
      if (omega == std::numeric_limits<double>::infinity()) return 1.0;
    }
    if (omega == -std::numeric_limits<double>::infinity()) return 0.0;
    if (omega == std::numeric_limits<double>::infinity()) return 1.0;
    const double u = mu(omega) - mu(nu);
    return is_wavelet() ? 1.0 - cdf(-u) : cdf(u);
  }

  // Relative part of the tone's mass inside [omega1, omega2].
  [[nodiscard]] double q_tilde(double nu, double omega1, double omega2) const {
    return std::max(0.0, cumulative_q(nu, omega2) - cumulative_q(nu, omega1));
  }

  [[nodiscard]] EpsilonSupport epsilon_support(double eps) const {
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("epsilon_support requires 0 < eps < 1");
    const double v1 = quantile(0.5 * eps);
    const double v2 = quantile(1.0 - 0.5 * eps);
    EpsilonSupport s{};
    s.xi1 = is_wavelet() ? omega_psi_ * std::exp(v1) : v1;
    s.xi2 = is_wavelet() ? omega_psi_ * std::exp(v2) : v2;
    const auto& td = time_profile();
    s.tau1 = td.quantile(0.5 * eps);
    s.tau2 = td.quantile(1.0 - 0.5 * eps);
    return s;
  }

  // Ridge curvature factor P^2(omega) = -h''/h at the peak, expressed per unit nu^2.
  [[nodiscard]] double p_squared(double omega) const {
    switch (kind_) {
      case WindowKind::Gaussian: return f0_ * f0_;
      case WindowKind::Lognormal: return a_ * a_ / (omega * omega);
      case WindowKind::Morlet: {
        const double h = 1e-3 * omega_psi_;
        const double x = omega_psi_;
        const double d2 = (-shape(x + 2 * h) + 16 * shape(x + h) - 30 * shape(x) + 16 * shape(x - h) - shape(x - 2 * h)) / (12 * h * h);
        return -(omega_psi_ * omega_psi_) / (omega * omega) * d2 / shape(x);
      }
    }
    return 0.0;
  }

  // Frequency-domain density on the shape coordinate.
  [[nodiscard]] double density(double v) const {
    return is_wavelet() ? shape(omega_psi_ * std::exp(v)) : shape(v);
  }
  [[nodiscard]] std::pair<double, double> density_range() const { return {v_lo_, v_hi_}; }
  [[nodiscard]] double density_mass() const { return mass_; }

  // Fraction of the density mass below v.
  [[nodiscard]] double cdf(double v) const {
    if (v <= v_lo_) return 0.0;
    if (v >= v_hi_) return 1.0;
    auto d = [this](double x) { return density(x); };
    if (v <= 0.0) return integrate(d, v_lo_, v, 1e-13) / mass_;
    return 1.0 - integrate(d, v, v_hi_, 1e-13) / mass_;
  }

  [[nodiscard]] double quantile(double p) const {
    if (p <= 0.0) return v_lo_;
    if (p >= 1.0) return v_hi_;
    return find_root([&](double v) { return cdf(v) - p; }, v_lo_, v_hi_, -p, 1.0 - p);
  }

 private:
  struct TimeProfile {
    std::vector<double> t;    // ascending times
    std::vector<double> cum;  // normalised cumulative |g(t)|
    [[nodiscard]] double quantile(double p) const {
      const auto it = std::lower_bound(cum.begin(), cum.end(), p);
      if (it == cum.begin()) return t.front();
      if (it == cum.end()) return t.back();
      const std::size_t i = static_cast<std::size_t>(it - cum.begin());
      const double w = (p - cum[i - 1]) / (cum[i] - cum[i - 1]);
      return t[i - 1] + w * (t[i] - t[i - 1]);
    }
  };

  struct Cache {
    std::once_flag once;
    TimeProfile time;
  };

  [[nodiscard]] double log_morlet_raw(double xi) const {
    // e^{-(xi-a)^2/2} - e^{-(xi^2+a^2)/2} = e^{-(xi-a)^2/2} (1 - e^{-a xi})
    return -0.5 * (xi - a_) * (xi - a_) + std::log(-std::expm1(-a_ * xi));
  }

  void locate_tails() {
    constexpr double cut = 1e-17;
    auto edge = [this](double dir) {
      double step = 0.5 / f0_;
      double v = dir * step;
      while (density(v) > cut) {
        step *= 1.5;
        v += dir * step;
        if (std::abs(v) > 1e6) throw NumericalError("window density tail not found");
      }
      double inner = 0.0;
      for (int i = 0; i < 80; ++i) {
        const double mid = 0.5 * (inner + v);
        (density(mid) > cut ? inner : v) = mid;
      }
      return v;
    };
    v_lo_ = edge(-1.0);
    v_hi_ = edge(+1.0);
  }

  void compute_constants() {
    auto d = [this](double v) { return density(v); };
    mass_ = integrate(d, v_lo_, 0.0, 1e-13) + integrate(d, 0.0, v_hi_, 1e-13);
    constants_.c_h = 0.5 * mass_;
    constants_.h_max = 1.0;
    if (!is_wavelet()) {
      constants_.d_h = constants_.c_h;
      auto m1 = [this](double v) { return v * density(v); };
      constants_.omega_bar = (integrate(m1, v_lo_, 0.0, 1e-13) + integrate(m1, 0.0, v_hi_, 1e-13)) / mass_;
    } else {
      constants_.omega_bar = 0.0;
      if (kind_ == WindowKind::Morlet) {
        // psi(xi) ~ xi near zero, so the 1/xi^2 moment diverges logarithmically.
        constants_.d_h = std::numeric_limits<double>::infinity();
      } else {
        auto m = [this](double v) { return density(v) * std::exp(-v); };
        constants_.d_h = 0.5 * (integrate(m, v_lo_, 0.0, 1e-13) + integrate(m, 0.0, v_hi_, 1e-13));
      }
    }
  }

  [[nodiscard]] const TimeProfile& time_profile() const {
    std::call_once(cache_->once, [this] { cache_->time = build_time_profile(); });
    return cache_->time;
  }

  // |g(t)| (or |psi(t)|) from the sampled Fourier transform, then its cumulative mass.
  [[nodiscard]] TimeProfile build_time_profile() const {
    const double va = quantile(1e-10);
    const double vb = quantile(1.0 - 1e-10);
    const double xa = is_wavelet() ? omega_psi_ * std::exp(va) : va;
    const double xb = is_wavelet() ? omega_psi_ * std::exp(vb) : vb;
    constexpr std::size_t n_in = 4096;
    constexpr std::size_t m = 1u << 17;
    const double dxi = (xb - xa) / static_cast<double>(n_in);
    auto in = fft::allocate<cplx>(m);
    auto out = fft::allocate<cplx>(m);
    std::fill(in.get(), in.get() + m, cplx{});
    for (std::size_t j = 0; j <= n_in; ++j) in[j] = shape(xa + dxi * static_cast<double>(j));
    fft::Backward plan(m);
    plan.execute(in.get(), out.get());
    const double dt = two_pi / (static_cast<double>(m) * dxi);
    TimeProfile tp;
    tp.t.resize(m);
    tp.cum.resize(m);
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      // reorder so that times ascend from -m/2 to m/2-1
      const std::size_t k = (i + m / 2) % m;
      const double t = (static_cast<double>(i) - static_cast<double>(m / 2)) * dt;
      total += std::abs(out[k]);
      tp.t[i] = t;
      tp.cum[i] = total;
    }
    // midpoint convention: mass of sample i is attributed to the cell ending at t_i + dt/2
    for (std::size_t i = 0; i < m; ++i) {
      tp.cum[i] /= total;
      tp.t[i] += 0.5 * dt;
    }
    return tp;
  }

  WindowKind kind_;
  double f0_;
  double a_ = 0.0;  // 2 pi f0
  double omega_psi_ = 0.0;
  double log_norm_ = 0.0;
  double v_lo_ = 0.0;
  double v_hi_ = 0.0;
  double mass_ = 0.0;
  AdmissibilityConstants constants_{};
  std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

}  // namespace tfrlab
