#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "tfrlab/common.hpp"

namespace tfrlab {

// Adaptive Gauss-Kronrod integration over [a, b].
template <class F>
double integrate(F&& f, double a, double b, double tol = 1e-12) {
  if (!(b > a)) return 0.0;
  double err = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 12, tol, &err);
  if (!std::isfinite(value)) throw NumericalError("quadrature produced a non-finite value on [" + std::to_string(a) + ", " + std::to_string(b) + "]");
  return value;
}

// Integrates piecewise over sorted breakpoints inside [a, b].
template <class F>
double integrate_split(F&& f, double a, double b, std::vector<double> breaks, double tol = 1e-12) {
  breaks.push_back(a);
  breaks.push_back(b);
  std::sort(breaks.begin(), breaks.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double lo = std::clamp(breaks[i], a, b);
    const double hi = std::clamp(breaks[i + 1], a, b);
    total += integrate(f, lo, hi, tol);
  }
  return total;
}

// Root of f on a sign-changing bracket.
template <class F>
double find_root(F&& f, double lo, double hi, double flo, double fhi) {
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) throw NumericalError("root bracket does not change sign");
  std::uintmax_t iters = 200;
  auto tol = boost::math::tools::eps_tolerance<double>(50);
  auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
  return 0.5 * (a + b);
}

template <class F>
double find_root(F&& f, double lo, double hi) {
  return find_root(f, lo, hi, f(lo), f(hi));
}

// Two-sided standard-normal width: the 1-eps central mass lies within +-n_gauss(eps).
inline double n_gauss(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("n_gauss requires 0 < eps < 1");
  return std::sqrt(2.0) * boost::math::erfc_inv(eps);
}

inline double normal_cdf(double x) { return 0.5 * boost::math::erfc(-x / std::sqrt(2.0)); }

inline double rms(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s / static_cast<double>(v.size()));
}

inline double wrap_phase(double x) { return std::remainder(x, two_pi); }

// Cumulative unwrapping; entries flagged in `reset` restart the accumulation.
inline void unwrap(std::span<double> phase, std::span<const std::uint8_t> reset = {}) {
  double offset = 0.0;
  for (std::size_t i = 1; i < phase.size(); ++i) {
    if (!reset.empty() && (reset[i] || reset[i - 1])) {
      offset = 0.0;
      continue;
    }
    const double raw = phase[i] + offset;
    const double jump = wrap_phase(raw - phase[i - 1]);
    const double target = phase[i - 1] + jump;
    offset += target - raw;
    phase[i] = target;
  }
}

}  // namespace tfrlab
