#pragma once

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "tfrlab/numerics.hpp"
#include "tfrlab/tfr.hpp"

namespace tfrlab {

// log[(sum |H|^p dmu dt)^{q/p} / sum |H|^q dmu dt]; `time_stride` > 1 evaluates on every n-th column.
inline double functional_Fpq(const TFRMatrix& tfr, double p, double q, std::size_t time_stride = 1) {
  if (!(p > 0.0 && q > p)) throw DomainError("functional_Fpq requires q > p > 0");
  if (time_stride == 0) throw DomainError("time stride must be positive");
  const auto w = tfr.grid.weights();
  const double dt = static_cast<double>(time_stride) / tfr.time.fs;
  // the functional is scale invariant, so normalising by the peak only guards against overflow
  double peak = 0.0;
  for (const cplx v : tfr.values.flat()) peak = std::max(peak, std::abs(v));
  if (!(peak > 0.0)) throw UndefinedMetricError("functional_Fpq of an all-zero transform");
  double sp = 0.0, sq = 0.0;
  for (std::size_t k = 0; k < tfr.n_freq(); ++k) {
    const auto row = tfr.values.row(k);
    double rp = 0.0, rq = 0.0;
    for (std::size_t t = 0; t < row.size(); t += time_stride) {
      const double m = std::abs(row[t]) / peak;
      if (m == 0.0) continue;
      rp += std::pow(m, p);
      rq += std::pow(m, q);
    }
    sp += rp * w[k];
    sq += rq * w[k];
  }
  sp *= dt;
  sq *= dt;
  return q / p * std::log(sp) - std::log(sq);
}

struct F0Bounds {
  double f0_min, f0_max;
};

namespace detail {

// Solves width(f0) = target for a width monotone in f0, bisecting on log f0.
template <class W>
double solve_width(W&& width, double target, double lo = 1e-3, double hi = 1e3) {
  auto g = [&](double log_f0) { return std::log(width(std::exp(log_f0))) - std::log(target); };
  const double a = std::log(lo), b = std::log(hi);
  const double ga = g(a), gb = g(b);
  if ((ga > 0.0) == (gb > 0.0)) throw ConfigError("no resolution parameter in [1e-3, 1e3] satisfies the support constraint");
  return std::exp(find_root(g, a, b, ga, gb));
}

}  // namespace detail

// Resolution range over which the window fits inside the sampling band and the record.
inline F0Bounds f0_bounds(WindowKind kind, double fs, double duration, const FrequencyGrid& grid, double eps = 0.05) {
  if (!(fs > 0.0 && duration > 0.0)) throw DomainError("f0_bounds requires fs > 0 and T > 0");
  auto support = [&](double f0) { return WindowSpec(kind, f0).epsilon_support(eps); };
  const bool wavelet = kind != WindowKind::Gaussian;
  if (wavelet && !(grid.omega_min() > 0.0)) throw ConfigError("wavelet f0 bounds need a positive minimal frequency");
  auto xi_target = [&](double f0) { return wavelet ? two_pi * fs * WindowSpec(kind, f0).omega_psi() / grid.omega_max() : two_pi * fs; };
  auto tau_target = [&](double f0) { return wavelet ? duration * grid.omega_min() / WindowSpec(kind, f0).omega_psi() : duration; };
  const double f0_min = detail::solve_width(
      [&](double f0) {
        const auto s = support(f0);
        return (s.xi2 - s.xi1) / xi_target(f0);
      },
      1.0);
  const double f0_max = detail::solve_width(
      [&](double f0) {
        const auto s = support(f0);
        return (s.tau2 - s.tau1) / tau_target(f0);
      },
      1.0);
  if (!(f0_min < f0_max)) throw ConfigError("empty admissible resolution range: f0_min=" + std::to_string(f0_min) + " >= f0_max=" + std::to_string(f0_max));
  return {f0_min, f0_max};
}

struct OptimizeOptions {
  int n_tilde_v = defaults::f0_voices;
  std::optional<std::pair<double, double>> search_range;  // intersected with the admissible bounds
  TfrOptions tfr;
  bool decimate = true;        // coarse grid and every 2nd column during the sweep
  double coarse_df_hz = 0.01;
  int coarse_voices = 64;
  bool refine = false;         // golden-section polish between the grid neighbours of the minimum
};

struct F0SearchResult {
  double f0_opt = 0.0;
  double F_opt = 0.0;          // at full resolution
  std::vector<double> f0_grid, F_values;
  F0Bounds bounds{};
  double p = 1.0, q = 2.0;
  std::size_t argmin = 0;
};

namespace detail {

inline FrequencyGrid coarse_grid(const FrequencyGrid& g, const OptimizeOptions& o) {
  if (!o.decimate) return g;
  if (g.scale() == GridScale::Linear) {
    const double step = Hz{o.coarse_df_hz}.rad();
    return step > g.step() ? FrequencyGrid::linear(g.omega_min(), g.omega_max(), step) : g;
  }
  return o.coarse_voices < g.voices() ? FrequencyGrid::logarithmic(g.omega_min(), g.omega_max(), o.coarse_voices) : g;
}

}  // namespace detail

inline F0SearchResult optimize_f0(const RealSignal& signal, WindowKind kind, const FrequencyGrid& grid, double p, double q, const OptimizeOptions& opt = {}) {
  if (!(p > 0.0 && q > p)) throw DomainError("optimize_f0 requires q > p > 0");
  if (opt.n_tilde_v < 1) throw DomainError("optimize_f0 requires n_tilde_v >= 1");
  F0SearchResult r;
  r.p = p;
  r.q = q;
  r.bounds = f0_bounds(kind, signal.fs, signal.duration(), grid);
  double lo = r.bounds.f0_min, hi = r.bounds.f0_max;
  if (opt.search_range) {
    lo = std::max(lo, opt.search_range->first);
    hi = std::min(hi, opt.search_range->second);
    if (!(lo <= hi)) throw ConfigError("search range does not intersect the admissible f0 interval");
  }
  // log-spaced, at least n_tilde_v points per octave, both ends included
  const auto steps = static_cast<std::size_t>(std::ceil(std::log2(hi / lo) * opt.n_tilde_v - 1e-9));
  r.f0_grid.push_back(lo);
  for (std::size_t i = 1; i <= steps; ++i) r.f0_grid.push_back(i == steps ? hi : lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(steps)));

  const FrequencyGrid sweep_grid = detail::coarse_grid(grid, opt);
  const std::size_t stride = opt.decimate ? 2 : 1;
  auto evaluate = [&](double f0, const FrequencyGrid& g, std::size_t s) {
    return functional_Fpq(compute_tfr(signal, WindowSpec(kind, f0), g, opt.tfr), p, q, s);
  };
  for (double f0 : r.f0_grid) r.F_values.push_back(evaluate(f0, sweep_grid, stride));
  for (std::size_t i = 1; i < r.F_values.size(); ++i)
    if (r.F_values[i] < r.F_values[r.argmin]) r.argmin = i;  // strict: ties stay with the smaller f0
  r.f0_opt = r.f0_grid[r.argmin];

  if (opt.refine && r.f0_grid.size() >= 3) {
    double a = std::log(r.f0_grid[r.argmin == 0 ? 0 : r.argmin - 1]);
    double b = std::log(r.f0_grid[std::min(r.argmin + 1, r.f0_grid.size() - 1)]);
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 12; ++it) {
      const double c = b - phi * (b - a), d = a + phi * (b - a);
      if (evaluate(std::exp(c), sweep_grid, stride) <= evaluate(std::exp(d), sweep_grid, stride))
        b = d;
      else
        a = c;
    }
    r.f0_opt = std::exp(0.5 * (a + b));
  }
  r.F_opt = evaluate(r.f0_opt, grid, 1);
  return r;
}

}  // namespace tfrlab
