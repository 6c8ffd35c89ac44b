#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

#include "tfrlab/tfr.hpp"

namespace tfrlab {

struct Peak {
  std::size_t bin;
  double offset;     // sub-bin position of the interpolated maximum, in bins
  double omega;      // interpolated frequency
  double amplitude;  // interpolated |H|
};

// Retained peaks of one column and the minima separating consecutive ones.
struct ColumnScan {
  std::vector<Peak> peaks;
  std::vector<std::size_t> minima;  // minima[i] lies between peaks[i] and peaks[i+1]
};

namespace detail {

inline Peak interpolate_peak(std::span<const double> mag, std::size_t k, const FrequencyGrid& grid) {
  Peak p{k, 0.0, grid.omega(k), mag[k]};
  if (k == 0 || k + 1 >= mag.size()) return p;
  const double a = mag[k - 1];
  const double b = mag[k];
  const double c = mag[k + 1];
  const double den = a - 2.0 * b + c;
  if (!(den < 0.0)) return p;
  const double delta = std::clamp(0.5 * (a - c) / den, -0.5, 0.5);
  p.offset = delta;
  p.omega = grid.omega_at(static_cast<double>(k) + delta);
  p.amplitude = b - 0.25 * (a - c) * delta;
  return p;
}

inline ColumnScan scan_magnitudes(std::span<const double> mag, const FrequencyGrid& grid, double threshold) {
  ColumnScan scan;
  const std::size_t n = mag.size();
  if (n == 0) return scan;
  std::vector<std::size_t> raw;
  if (n == 1) {
    if (mag[0] > 0.0) raw.push_back(0);
  } else {
    for (std::size_t k = 0; k < n; ++k) {
      const bool left_ok = k == 0 || mag[k] > mag[k - 1];
      const bool right_ok = k + 1 == n ? (k > 0 && mag[k] > mag[k - 1]) : (k == 0 ? mag[k] > mag[k + 1] : mag[k] >= mag[k + 1]);
      if (left_ok && right_ok && mag[k] > 0.0) raw.push_back(k);
    }
  }
  std::vector<Peak> peaks;
  double total = 0.0;
  for (std::size_t k : raw) {
    peaks.push_back(interpolate_peak(mag, k, grid));
    total += peaks.back().amplitude;
  }
  for (const auto& p : peaks)
    if (p.amplitude >= threshold * total) scan.peaks.push_back(p);
  for (std::size_t i = 0; i + 1 < scan.peaks.size(); ++i) {
    const std::size_t lo = scan.peaks[i].bin;
    const std::size_t hi = scan.peaks[i + 1].bin;
    std::size_t best = lo;
    for (std::size_t k = lo; k <= hi; ++k)
      if (mag[k] < mag[best]) best = k;
    scan.minima.push_back(best);
  }
  return scan;
}

inline std::vector<double> column_magnitude(const TFRMatrix& tfr, std::size_t t) {
  std::vector<double> mag(tfr.n_freq());
  for (std::size_t k = 0; k < mag.size(); ++k) mag[k] = std::abs(tfr.values(k, t));
  return mag;
}

}  // namespace detail

inline ColumnScan scan_column(const TFRMatrix& tfr, std::size_t t_index, double threshold = defaults::peak_threshold) {
  if (t_index >= tfr.n_time()) throw ContractError("column index out of range");
  return detail::scan_magnitudes(detail::column_magnitude(tfr, t_index), tfr.grid, threshold);
}

// Local maxima of |H| with parabolic sub-bin interpolation (on the grid's measure coordinate).
inline std::vector<Peak> find_peaks(const TFRMatrix& tfr, std::size_t t_index, double threshold = defaults::peak_threshold) {
  return scan_column(tfr, t_index, threshold).peaks;
}

inline double mean_peak_count(const TFRMatrix& tfr, double threshold = defaults::peak_threshold) {
  if (tfr.n_time() == 0) throw ContractError("mean_peak_count requires a non-empty transform");
  double total = 0.0;
  for (std::size_t t = 0; t < tfr.n_time(); ++t) total += static_cast<double>(scan_column(tfr, t, threshold).peaks.size());
  return total / static_cast<double>(tfr.n_time());
}

struct Region {
  std::size_t lo, hi;  // inclusive bin range
  Peak peak;
};

// Contiguous regions split at the minima between retained peaks; they cover the column.
inline std::vector<Region> regions_from_scan(const ColumnScan& scan, std::size_t n_bins) {
  std::vector<Region> out;
  for (std::size_t i = 0; i < scan.peaks.size(); ++i) {
    const std::size_t lo = i == 0 ? 0 : scan.minima[i - 1];
    const std::size_t hi = i + 1 == scan.peaks.size() ? n_bins - 1 : scan.minima[i] - 1;
    out.push_back({lo, hi, scan.peaks[i]});
  }
  return out;
}

inline std::vector<Region> partition_unimodal(const TFRMatrix& tfr, std::size_t t_index, double threshold = defaults::peak_threshold) {
  return regions_from_scan(scan_column(tfr, t_index, threshold), tfr.n_freq());
}

struct MaximumBased {
  bool sqrt_omega_scoring = false;  // rank peaks by |W|/sqrt(omega), for wavelet transforms of noisy signals
};

struct FrequencyBased {
  std::vector<double> reference;  // rad/s per time sample
  std::size_t candidates = 0;     // restrict to this many dominant peaks; 0 keeps all
};

using ExtractionScheme = std::variant<MaximumBased, FrequencyBased>;

struct SupportCurve {
  std::vector<double> time, omega_p, omega_minus, omega_plus;
  std::vector<std::size_t> bin_p, bin_minus, bin_plus;
  std::vector<double> offset;   // sub-bin position of the ridge
  std::vector<double> peak_amplitude;
  std::vector<std::uint8_t> gap;
  std::string scheme;

  [[nodiscard]] std::size_t size() const { return time.size(); }
  [[nodiscard]] std::size_t gap_count() const { return static_cast<std::size_t>(std::count(gap.begin(), gap.end(), 1)); }

  void resize(std::size_t n) {
    time.assign(n, 0.0);
    omega_p.assign(n, std::nan(""));
    omega_minus.assign(n, std::nan(""));
    omega_plus.assign(n, std::nan(""));
    bin_p.assign(n, 0);
    bin_minus.assign(n, 0);
    bin_plus.assign(n, 0);
    offset.assign(n, 0.0);
    peak_amplitude.assign(n, 0.0);
    gap.assign(n, 1);
  }

  void set(std::size_t t, const Peak& p, std::size_t lo, std::size_t hi, const FrequencyGrid& grid) {
    omega_p[t] = p.omega;
    bin_p[t] = p.bin;
    offset[t] = p.offset;
    peak_amplitude[t] = p.amplitude;
    bin_minus[t] = lo;
    bin_plus[t] = hi;
    omega_minus[t] = grid.omega(lo);
    omega_plus[t] = grid.omega(hi);
    gap[t] = 0;
  }
};

// Selects one peak per time and its unimodal support, bounded by the adjacent minima.
inline SupportCurve extract_tfs(const TFRMatrix& tfr, const ExtractionScheme& scheme, double threshold = defaults::peak_threshold) {
  const std::size_t nt = tfr.n_time();
  const std::size_t nf = tfr.n_freq();
  SupportCurve c;
  c.resize(nt);
  if (const auto* fb = std::get_if<FrequencyBased>(&scheme); fb != nullptr && fb->reference.size() != nt)
    throw ContractError("frequency-based extraction needs a reference track with one entry per time sample");
  c.scheme = std::holds_alternative<MaximumBased>(scheme) ? "maximum" : "frequency";
  for (std::size_t t = 0; t < nt; ++t) {
    c.time[t] = tfr.time.at(t);
    const ColumnScan scan = scan_column(tfr, t, threshold);
    if (scan.peaks.empty()) continue;
    std::size_t pick = 0;
    if (const auto* mb = std::get_if<MaximumBased>(&scheme)) {
      auto score = [&](const Peak& p) { return mb->sqrt_omega_scoring ? p.amplitude / std::sqrt(p.omega) : p.amplitude; };
      for (std::size_t i = 1; i < scan.peaks.size(); ++i)
        if (score(scan.peaks[i]) > score(scan.peaks[pick])) pick = i;
    } else {
      const auto& fb = std::get<FrequencyBased>(scheme);
      std::vector<std::size_t> order(scan.peaks.size());
      std::iota(order.begin(), order.end(), 0);
      if (fb.candidates > 0 && fb.candidates < order.size()) {
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scan.peaks[a].amplitude > scan.peaks[b].amplitude; });
        order.resize(fb.candidates);
      }
      const double target = tfr.grid.mu(fb.reference[t]);
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i : order) {
        const double d = std::abs(tfr.grid.mu(scan.peaks[i].omega) - target);
        if (d < best || (d == best && i < pick)) {
          best = d;
          pick = i;
        }
      }
    }
    const std::size_t lo = pick == 0 ? 0 : scan.minima[pick - 1];
    const std::size_t hi = pick + 1 == scan.peaks.size() ? nf - 1 : scan.minima[pick];
    c.set(t, scan.peaks[pick], lo, hi, tfr.grid);
  }
  return c;
}

}  // namespace tfrlab
