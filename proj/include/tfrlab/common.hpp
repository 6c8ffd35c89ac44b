#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tfrlab {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Named defaults; every one of them can be overridden from an experiment config.
namespace defaults {
inline constexpr double eps = 1e-3;             // regime accuracy
inline constexpr double eps_bessel = 0.02;      // Bessel truncation threshold
inline constexpr double peak_threshold = 1e-6;  // spurious peak cut, relative to summed amplitude
inline constexpr double ifm_threshold = 1e-8;   // validity of the instantaneous frequency map
inline constexpr double pad_eps = 1e-3;         // time support used for padding
inline constexpr double df_hz = 0.002;          // linear grid step
inline constexpr int voices = 256;              // logarithmic grid voices per octave
inline constexpr int f0_voices = 2;             // f0 search grid density
inline constexpr double error_floor = 1e-3;     // reconstruction errors below this are not resolved
}  // namespace defaults

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DomainError : Error {
  using Error::Error;
};
struct SpecError : Error {
  using Error::Error;
};
struct ContractError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct NumericalError : Error {
  using Error::Error;
};
struct UndefinedMetricError : Error {
  using Error::Error;
};

// Frequency given in Hz; the library works in rad/s everywhere else.
struct Hz {
  double value;
  [[nodiscard]] constexpr double rad() const { return two_pi * value; }
};

// Dense row-major matrix; rows are frequency bins, columns are time samples.
template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  [[nodiscard]] std::size_t rows() const { return rows_; }
  [[nodiscard]] std::size_t cols() const { return cols_; }
  [[nodiscard]] bool empty() const { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  [[nodiscard]] std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<T> flat() { return data_; }
  [[nodiscard]] std::span<const T> flat() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

}  // namespace tfrlab
