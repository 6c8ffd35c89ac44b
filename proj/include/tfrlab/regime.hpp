#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tfrlab/numerics.hpp"
#include "tfrlab/signal.hpp"
#include "tfrlab/window.hpp"

namespace tfrlab {

enum class Regime { I = 1, II = 2, III = 3, IV = 4 };
enum class RegimeCase { TwoTone, AM, FM };

inline std::string to_string(Regime r) {
  switch (r) {
    case Regime::I: return "I";
    case Regime::II: return "II";
    case Regime::III: return "III";
    case Regime::IV: return "IV";
  }
  return "?";
}

inline std::string to_string(RegimeCase c) {
  switch (c) {
    case RegimeCase::TwoTone: return "two-tone";
    case RegimeCase::AM: return "am";
    case RegimeCase::FM: return "fm";
  }
  return "?";
}

struct RegimeReport {
  Regime regime = Regime::III;
  RegimeCase kind = RegimeCase::TwoTone;
  std::map<std::string, double> eta;   // eta1/eta2, eta_a or eta_b
  std::vector<double> intersections;   // rad/s; +-inf (0 for wavelets) when absent
  std::optional<double> mean_peaks;    // filled by callers that computed a transform
  double eps = defaults::eps;
  int interior_minima = 0;             // of the most-merged profile
  bool crossing = true;                // two-tone: an intersection exists in [nu1, nu2]
  std::optional<bool> approx_i, approx_iv;

  [[nodiscard]] double max_eta() const {
    double m = 0.0;
    for (const auto& [_, v] : eta) m = std::max(m, v);
    return m;
  }
};

namespace detail {

// Weighted sum of shifted transfer functions, evaluated on the measure coordinate.
struct ToneProfile {
  const WindowSpec* window;
  std::vector<double> nu, weight;

  [[nodiscard]] double operator()(double m) const {
    const double omega = window->from_mu(m);
    double s = 0.0;
    for (std::size_t i = 0; i < nu.size(); ++i) s += weight[i] * window->transfer(nu[i], omega);
    return s;
  }
  [[nodiscard]] std::pair<double, double> domain() const {
    const auto [u_lo, u_hi] = window->profile_range();
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double v : nu) {
      lo = std::min(lo, window->mu(v) + u_lo);
      hi = std::max(hi, window->mu(v) + u_hi);
    }
    return {lo, hi};
  }
};

inline void check_eps(double eps) {
  if (!(eps > 0.0 && eps < 0.5)) throw DomainError("regime accuracy eps must lie in (0, 0.5)");
}

// Sign changes of f on a uniform scan of [a, b], refined by root finding.
template <class F>
std::vector<double> sign_changes(F&& f, double a, double b, std::size_t n = 4096) {
  std::vector<double> roots;
  double x0 = a;
  double f0 = f(a);
  for (std::size_t i = 1; i <= n; ++i) {
    const double x1 = a + (b - a) * static_cast<double>(i) / static_cast<double>(n);
    const double f1 = f(x1);
    if (std::isfinite(f0) && std::isfinite(f1) && ((f0 < 0.0 && f1 > 0.0) || (f0 > 0.0 && f1 < 0.0)))
      roots.push_back(find_root(f, x0, x1, f0, f1));
    x0 = x1;
    f0 = f1;
  }
  return roots;
}

// Integral of min(f, g) over [a, b], split at their crossings.
template <class F, class G>
double integrate_min(const F& f, const G& g, double a, double b, std::vector<double> breaks) {
  const auto cross = sign_changes([&](double x) { return f(x) - g(x); }, a, b);
  breaks.insert(breaks.end(), cross.begin(), cross.end());
  return integrate_split([&](double x) { return std::min(f(x), g(x)); }, a, b, std::move(breaks), 1e-10);
}

// Interior minima of a sampled profile, from sign changes of its finite difference.
template <class F>
int count_interior_minima(F&& f, double a, double b, std::size_t n = 2048) {
  std::vector<double> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = f(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  int count = 0;
  int last = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double d = p[i + 1] - p[i];
    const int s = d > 0.0 ? 1 : (d < 0.0 ? -1 : 0);
    if (s == 0) continue;
    if (last < 0 && s > 0) ++count;
    last = s;
  }
  return count;
}

inline double log_sum(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

}  // namespace detail

struct TwoToneOverlap {
  double eta1, eta2;
  double omega_x;  // NaN when the profiles do not cross in [nu1, nu2]
  bool crossing;
};

// Closed-form intersection for windows whose log-profile is quadratic on the measure axis.
inline std::optional<double> two_tone_crossing_closed_form(const WindowSpec& w, double nu1, double nu2, double r) {
  if (w.kind() == WindowKind::Gaussian) return 0.5 * (nu1 + nu2) - std::log(r) / (w.f0() * w.f0() * (nu2 - nu1));
  if (w.kind() == WindowKind::Lognormal) {
    const double a = two_pi * w.f0();
    return std::sqrt(nu1 * nu2) * std::exp(-std::log(r) / (a * a * std::log(nu2 / nu1)));
  }
  return std::nullopt;
}

inline TwoToneOverlap two_tone_overlaps(const WindowSpec& w, double nu1, double nu2, double r) {
  if (!(nu1 > 0.0 && nu2 > nu1)) throw DomainError("two-tone overlap requires 0 < nu1 < nu2");
  if (!(r > 0.0)) throw DomainError("two-tone overlap requires r > 0");
  const detail::ToneProfile h1{&w, {nu1}, {1.0}};
  const detail::ToneProfile h2{&w, {nu2}, {r}};
  const auto [a, b] = detail::ToneProfile{&w, {nu1, nu2}, {1.0, 1.0}}.domain();

  TwoToneOverlap out{};
  const double log_r = std::log(r);
  auto diff = [&](double omega) { return w.log_transfer(nu1, omega) - w.log_transfer(nu2, omega) - log_r; };
  const double d1 = diff(nu1);
  const double d2 = diff(nu2);
  out.crossing = (d1 >= 0.0) != (d2 > 0.0) || d1 == 0.0 || d2 == 0.0;
  out.omega_x = out.crossing ? find_root(diff, nu1, nu2, d1, d2) : std::nan("");

  std::vector<double> breaks{w.mu(nu1), w.mu(nu2)};
  if (out.crossing) breaks.push_back(w.mu(out.omega_x));
  const double shared = detail::integrate_min(h1, h2, a, b, breaks);
  out.eta1 = shared / w.density_mass();
  out.eta2 = out.eta1 / r;
  return out;
}

// Equal-tail support-based approximations of the Regime I and IV boundaries.
struct TwoToneThresholds {
  WindowSpec window;
  double eps;
  EpsilonSupport support;

  // Non-overlapping eps-supports.
  [[nodiscard]] bool regime_i(double nu1, double nu2) const {
    return window.is_wavelet() ? nu2 / nu1 > support.xi2 / support.xi1 : nu2 - nu1 > support.xi2 - support.xi1;
  }

  // Closed form only for windows Gaussian on the measure axis.
  [[nodiscard]] std::optional<bool> regime_iv(double nu1, double nu2, double r) const {
    double x = 0.0;
    if (window.kind() == WindowKind::Gaussian)
      x = window.f0() * (nu2 - nu1);
    else if (window.kind() == WindowKind::Lognormal)
      x = two_pi * window.f0() * std::log(nu2 / nu1);
    else
      return std::nullopt;
    const double bound = 0.5 * x * (2.0 * n_gauss(2.0 * eps) + x);
    return std::abs(std::log(r)) >= bound;
  }

  // Overlap bounds implied by the Regime I approximation.
  [[nodiscard]] std::pair<double, double> eta_bounds(double r) const { return {(1.0 + r) * eps / 2.0, (1.0 + 1.0 / r) * eps / 2.0}; }
};

inline TwoToneThresholds two_tone_thresholds(const WindowSpec& w, double eps = defaults::eps) {
  detail::check_eps(eps);
  return {w, eps, w.epsilon_support(eps)};
}

// Overlaps come from quadrature; a boundary case such as eta == eps must not flip on round-off.
inline constexpr double eta_tolerance = 1e-9;

inline Regime regime_from_eta(double eta, double eps, bool resolved_profile) {
  if (eta <= eps * (1.0 + eta_tolerance)) return Regime::I;
  if (eta >= (1.0 - eps) * (1.0 - eta_tolerance)) return Regime::IV;
  return resolved_profile ? Regime::II : Regime::III;
}

inline RegimeReport classify_two_tone(const WindowSpec& w, double nu1, double nu2, double r, double eps = defaults::eps) {
  detail::check_eps(eps);
  const auto ov = two_tone_overlaps(w, nu1, nu2, r);
  RegimeReport rep;
  rep.kind = RegimeCase::TwoTone;
  rep.eps = eps;
  rep.eta = {{"eta1", ov.eta1}, {"eta2", ov.eta2}};
  rep.crossing = ov.crossing;
  if (ov.crossing) rep.intersections.push_back(ov.omega_x);
  const detail::ToneProfile merged{&w, {nu1, nu2}, {1.0, r}};
  rep.interior_minima = detail::count_interior_minima(merged, w.mu(nu1), w.mu(nu2));
  rep.regime = regime_from_eta(rep.max_eta(), eps, rep.interior_minima > 0);
  const auto th = two_tone_thresholds(w, eps);
  rep.approx_i = th.regime_i(nu1, nu2);
  rep.approx_iv = th.regime_iv(nu1, nu2, r);
  return rep;
}

struct AmOverlap {
  double eta_a;
  double omega_x1, omega_x2;  // lower/upper intersections; mu = -+inf when absent
};

// Gaussian-window intersections, nu -+ acosh(e^{(f0 nu_a)^2/2} / r_a) / (f0^2 nu_a).
inline std::pair<double, double> am_intersections_gaussian(double f0, double nu, double nu_a, double r_a) {
  const double arg = std::exp(0.5 * f0 * f0 * nu_a * nu_a) / r_a;
  const double x = std::acosh(arg) / (f0 * f0 * nu_a);
  return {nu - x, nu + x};
}

inline AmOverlap am_overlap(const WindowSpec& w, double nu, double nu_a, double r_a) {
  validate(SignalSpec{AmComponent{1.0, r_a, nu_a, 0.0, nu, 0.0}});
  constexpr double inf = std::numeric_limits<double>::infinity();
  AmOverlap out{0.0, w.from_mu(-inf), w.from_mu(inf)};
  if (r_a == 0.0 || nu_a == 0.0) {
    // side tones vanish or coincide with the carrier
    out.eta_a = nu_a == 0.0 ? 1.0 : 0.0;
    return out;
  }
  const detail::ToneProfile main{&w, {nu}, {1.0}};
  const detail::ToneProfile side{&w, {nu - nu_a, nu + nu_a}, {0.5 * r_a, 0.5 * r_a}};
  const auto [a, b] = side.domain();
  const std::vector<double> centres{w.mu(nu - nu_a), w.mu(nu), w.mu(nu + nu_a)};
  out.eta_a = detail::integrate_min(main, side, a, b, centres) / (r_a * w.density_mass());

  const double log_half = std::log(0.5 * r_a);
  auto diff = [&](double m) {
    const double omega = w.from_mu(m);
    return w.log_transfer(nu, omega) - log_half - detail::log_sum(w.log_transfer(nu - nu_a, omega), w.log_transfer(nu + nu_a, omega));
  };
  const double centre = w.mu(nu);
  for (double root : detail::sign_changes(diff, a, b)) {
    if (root < centre && (out.omega_x1 == w.from_mu(-inf) || root > w.mu(out.omega_x1))) out.omega_x1 = w.from_mu(root);
    if (root > centre && (out.omega_x2 == w.from_mu(inf) || root < w.mu(out.omega_x2))) out.omega_x2 = w.from_mu(root);
  }
  return out;
}

// Gaussian closed-form sufficient condition for Regime IV of an AM component.
inline std::optional<bool> am_regime_iv_approx(const WindowSpec& w, double nu_a, double r_a, double eps = defaults::eps) {
  if (w.kind() != WindowKind::Gaussian) return std::nullopt;
  const double x = w.f0() * nu_a;
  return r_a <= std::exp(0.5 * x * x) / std::cosh(x * (n_gauss(2.0 * eps) + x));
}

inline RegimeReport classify_am(const WindowSpec& w, double nu, double nu_a, double r_a, double eps = defaults::eps) {
  detail::check_eps(eps);
  const auto ov = am_overlap(w, nu, nu_a, r_a);
  RegimeReport rep;
  rep.kind = RegimeCase::AM;
  rep.eps = eps;
  rep.eta = {{"eta_a", ov.eta_a}};
  rep.intersections = {ov.omega_x1, ov.omega_x2};
  if (nu_a > 0.0) {
    const detail::ToneProfile merged{&w, {nu - nu_a, nu, nu + nu_a}, {0.5 * r_a, 1.0, 0.5 * r_a}};
    rep.interior_minima = detail::count_interior_minima(merged, w.mu(nu - nu_a), w.mu(nu + nu_a));
  }
  rep.regime = regime_from_eta(ov.eta_a, eps, rep.interior_minima >= 2);
  rep.approx_iv = am_regime_iv_approx(w, nu_a, r_a, eps);
  return rep;
}

struct FmMeasures {
  double eta_b;
  BesselExpansion bessel;
  std::vector<double> mu_axis, h_plus, h_minus;  // sampled profiles
};

namespace detail {

struct FmProfiles {
  detail::ToneProfile plus, minus;
};

inline FmProfiles fm_profiles(const WindowSpec& w, double nu, double nu_b, const BesselExpansion& b) {
  FmProfiles p{{&w, {nu}, {b.coefficient(0)}}, {&w, {}, {}}};
  for (int n = 1; n <= b.order; ++n) {
    auto& target = n % 2 == 0 ? p.plus : p.minus;
    const double c = b.coefficient(n);
    target.nu.insert(target.nu.end(), {nu + n * nu_b, nu - n * nu_b});
    target.weight.insert(target.weight.end(), {c, n % 2 == 0 ? c : -c});
  }
  return p;
}

}  // namespace detail

inline FmMeasures fm_measures(const WindowSpec& w, double nu, double nu_b, double r_b, double eps_j = defaults::eps_bessel) {
  validate(SignalSpec{FmComponent{1.0, r_b, nu_b, 0.0, nu, 0.0}}, eps_j);
  FmMeasures out{0.0, bessel_expansion(r_b, eps_j), {}, {}, {}};
  const auto prof = detail::fm_profiles(w, nu, nu_b, out.bessel);
  detail::ToneProfile all = prof.plus;
  all.nu.insert(all.nu.end(), prof.minus.nu.begin(), prof.minus.nu.end());
  const auto [a, b] = all.domain();

  constexpr std::size_t samples = 2048;
  for (std::size_t i = 0; i < samples; ++i) {
    const double m = a + (b - a) * static_cast<double>(i) / static_cast<double>(samples - 1);
    out.mu_axis.push_back(m);
    out.h_plus.push_back(prof.plus(m));
    out.h_minus.push_back(prof.minus.nu.empty() ? 0.0 : prof.minus(m));
  }
  if (prof.minus.nu.empty() || nu_b == 0.0) {
    out.eta_b = (nu_b == 0.0 && r_b > 0.0) ? 1.0 : 0.0;
    return out;
  }
  auto plus_abs = [&](double m) { return std::abs(prof.plus(m)); };
  auto minus_abs = [&](double m) { return std::abs(prof.minus(m)); };
  std::vector<double> breaks;
  for (double v : all.nu) breaks.push_back(w.mu(v));
  for (double z : detail::sign_changes(prof.minus, a, b)) breaks.push_back(z);
  const double side = integrate_split(minus_abs, a, b, breaks, 1e-10);
  out.eta_b = side > 0.0 ? detail::integrate_min(plus_abs, minus_abs, a, b, breaks) / side : 1.0;
  return out;
}

inline RegimeReport classify_fm(const WindowSpec& w, double nu, double nu_b, double r_b, double eps = defaults::eps,
                                double eps_j = defaults::eps_bessel) {
  detail::check_eps(eps);
  const auto m = fm_measures(w, nu, nu_b, r_b, eps_j);
  RegimeReport rep;
  rep.kind = RegimeCase::FM;
  rep.eps = eps;
  rep.eta = {{"eta_b", m.eta_b}};
  const int n_j = m.bessel.order;
  bool resolved = false;
  if (n_j > 0 && nu_b > 0.0) {
    const auto prof = detail::fm_profiles(w, nu, nu_b, m.bessel);
    const double lo = w.mu(nu - n_j * nu_b);
    const double hi = w.mu(nu + n_j * nu_b);
    const int sum_min = detail::count_interior_minima([&](double x) { return std::abs(prof.plus(x) + prof.minus(x)); }, lo, hi);
    const int diff_min = detail::count_interior_minima([&](double x) { return std::abs(prof.plus(x) - prof.minus(x)); }, lo, hi);
    rep.interior_minima = std::min(sum_min, diff_min);
    resolved = sum_min >= 2 * n_j && diff_min >= 2 * n_j;
  }
  rep.regime = regime_from_eta(m.eta_b, eps, resolved);
  return rep;
}

}  // namespace tfrlab
