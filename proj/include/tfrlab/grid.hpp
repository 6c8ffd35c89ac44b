#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tfrlab/common.hpp"

namespace tfrlab {

enum class GridScale { Linear, Logarithmic };

// Analysis frequencies (rad/s) plus trapezoidal weights on the reconstruction measure
// (d omega for linear grids, d log omega for logarithmic ones).
class FrequencyGrid {
 public:
  static FrequencyGrid linear(double omega_min, double omega_max, double delta_omega) {
    if (!(omega_min < omega_max)) throw ConfigError("grid requires omega_min < omega_max");
    if (!(delta_omega > 0.0)) throw ConfigError("linear grid requires delta_omega > 0");
    FrequencyGrid g(GridScale::Linear, omega_min, omega_max, delta_omega);
    const auto n = static_cast<std::size_t>(std::floor((omega_max - omega_min) / delta_omega + 1e-9)) + 1;
    g.fill(n);
    return g;
  }

  static FrequencyGrid logarithmic(double omega_min, double omega_max, int voices) {
    if (!(omega_min > 0.0)) throw ConfigError("logarithmic grid requires omega_min > 0");
    if (!(omega_min < omega_max)) throw ConfigError("grid requires omega_min < omega_max");
    if (voices < 1) throw ConfigError("logarithmic grid requires n_v >= 1");
    FrequencyGrid g(GridScale::Logarithmic, omega_min, omega_max, std::log(2.0) / voices);
    g.voices_ = voices;
    const auto n = static_cast<std::size_t>(std::floor(voices * std::log2(omega_max / omega_min) + 1e-9)) + 1;
    g.fill(n);
    return g;
  }

  static FrequencyGrid linear_hz(Hz lo, Hz hi, Hz step) { return linear(lo.rad(), hi.rad(), step.rad()); }
  static FrequencyGrid logarithmic_hz(Hz lo, Hz hi, int voices) { return logarithmic(lo.rad(), hi.rad(), voices); }

  [[nodiscard]] GridScale scale() const { return scale_; }
  [[nodiscard]] std::size_t size() const { return omega_.size(); }
  [[nodiscard]] double omega(std::size_t k) const { return omega_[k]; }
  [[nodiscard]] std::span<const double> omegas() const { return omega_; }
  [[nodiscard]] std::span<const double> weights() const { return weight_; }
  [[nodiscard]] double omega_min() const { return omega_min_; }
  [[nodiscard]] double omega_max() const { return omega_max_; }
  // Spacing on the measure coordinate (delta omega, or ln2/n_v).
  [[nodiscard]] double step() const { return step_; }
  [[nodiscard]] int voices() const { return voices_; }
  [[nodiscard]] double mu(double omega) const { return scale_ == GridScale::Linear ? omega : std::log(omega); }
  [[nodiscard]] double mu_at(std::size_t k) const { return mu(omega_[k]); }

  // Bin whose cell contains omega, or -1 when it falls outside the grid.
  [[nodiscard]] long bin_of(double omega) const {
    if (scale_ == GridScale::Logarithmic && !(omega > 0.0)) return -1;
    if (!std::isfinite(omega)) return -1;
    const double x = (mu(omega) - mu(omega_min_)) / step_;
    const double k = std::floor(x + 0.5);
    if (k < 0.0 || k >= static_cast<double>(size())) return -1;
    return static_cast<long>(k);
  }

  // Frequency at a fractional bin position.
  [[nodiscard]] double omega_at(double pos) const {
    const double m = mu(omega_min_) + pos * step_;
    return scale_ == GridScale::Linear ? m : std::exp(m);
  }

  bool operator==(const FrequencyGrid& o) const {
    return scale_ == o.scale_ && omega_min_ == o.omega_min_ && omega_max_ == o.omega_max_ && step_ == o.step_ && size() == o.size();
  }

 private:
  FrequencyGrid(GridScale s, double lo, double hi, double step) : scale_(s), omega_min_(lo), omega_max_(hi), step_(step) {}

  void fill(std::size_t n) {
    omega_.resize(n);
    weight_.assign(n, step_);
    for (std::size_t k = 0; k < n; ++k) omega_[k] = omega_at(static_cast<double>(k));
    if (n > 1) {
      weight_.front() *= 0.5;
      weight_.back() *= 0.5;
    }
  }

  GridScale scale_;
  double omega_min_;
  double omega_max_;
  double step_;
  int voices_ = 0;
  std::vector<double> omega_;
  std::vector<double> weight_;
};

}  // namespace tfrlab
