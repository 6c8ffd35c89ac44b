#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "tfrlab/tfr.hpp"

namespace tfrlab {

struct InstFreqMap {
  Matrix<double> nu;            // rad/s
  Matrix<std::uint8_t> valid;   // 0 where |H| is below threshold
};

inline InstFreqMap inst_freq_map(const TFRMatrix& tfr, const Matrix<cplx>& derivative, double threshold = defaults::ifm_threshold) {
  if (is_squeezed(tfr.kind)) throw ContractError("inst_freq_map requires a WFT or WT, not a synchrosqueezed transform");
  const std::size_t nf = tfr.n_freq();
  const std::size_t nt = tfr.n_time();
  double peak = 0.0;
  for (const cplx v : tfr.values.flat()) peak = std::max(peak, std::abs(v));
  const double floor = threshold * peak;
  InstFreqMap m{Matrix<double>(nf, nt, std::nan("")), Matrix<std::uint8_t>(nf, nt, 0)};
  for (std::size_t k = 0; k < nf; ++k)
    for (std::size_t t = 0; t < nt; ++t) {
      const cplx h = tfr.values(k, t);
      const double mag = std::abs(h);
      if (!(mag > floor) || mag == 0.0) continue;
      m.nu(k, t) = std::imag(derivative(k, t) * std::conj(h)) / (mag * mag);
      m.valid(k, t) = 1;
    }
  return m;
}

// nu_H = Im[d_t H / H], with d_t H computed spectrally from the signal.
inline InstFreqMap inst_freq_map(const TFRMatrix& tfr, const RealSignal& signal, double threshold = defaults::ifm_threshold) {
  if (is_squeezed(tfr.kind)) throw ContractError("inst_freq_map requires a WFT or WT, not a synchrosqueezed transform");
  return inst_freq_map(tfr, compute_tfr_derivative(signal, tfr), threshold);
}

struct SqueezeResult {
  TFRMatrix tfr;                     // kind SWFT or SWT
  std::vector<double> dropped_mass;  // per column, sum of |H| dmu that left the grid
};

// Moves every valid coefficient (weighted by its bin measure) to the bin containing nu_H.
inline SqueezeResult synchrosqueeze(const TFRMatrix& tfr, const InstFreqMap& ifm) {
  if (is_squeezed(tfr.kind)) throw ContractError("synchrosqueeze expects a WFT or WT");
  if (ifm.nu.rows() != tfr.n_freq() || ifm.nu.cols() != tfr.n_time()) throw ContractError("instantaneous frequency map does not match the transform");
  const std::size_t nf = tfr.n_freq();
  const std::size_t nt = tfr.n_time();
  const auto w = tfr.grid.weights();
  SqueezeResult out{TFRMatrix{Matrix<cplx>(nf, nt), tfr.grid, tfr.time, tfr.window,
                              tfr.kind == TransformKind::WT ? TransformKind::SWT : TransformKind::SWFT, tfr.options, tfr.pad_len},
                    std::vector<double>(nt, 0.0)};
  // Bin lookup is per entry; the time loop is inner so each destination row is touched sequentially.
  std::vector<long> dest(nt);
  for (std::size_t k = 0; k < nf; ++k) {
    for (std::size_t t = 0; t < nt; ++t) dest[t] = ifm.valid(k, t) ? tfr.grid.bin_of(ifm.nu(k, t)) : -2;
    for (std::size_t t = 0; t < nt; ++t) {
      if (dest[t] == -2) continue;
      const cplx mass = tfr.values(k, t) * w[k];
      if (dest[t] < 0) {
        out.dropped_mass[t] += std::abs(mass);
        continue;
      }
      const auto d = static_cast<std::size_t>(dest[t]);
      out.tfr.values(d, t) += mass / w[d];
    }
  }
  return out;
}

}  // namespace tfrlab
