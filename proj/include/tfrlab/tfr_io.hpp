#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "tfrlab/tfr.hpp"

namespace tfrlab {

static_assert(std::endian::native == std::endian::little, "binary dumps assume a little-endian host");

// Layout of a "TFR1" dump (little endian, packed):
//   char[4] magic "TFR1"; u8 kind (0 WFT, 1 WT, 2 SWFT, 3 SWT);
//   u64 n_freq; u64 n_time; f64 fs;
//   u8 scale (0 linear, 1 logarithmic); f64 omega_min; f64 omega_max; f64 step (delta omega or ln2/n_v);
//   then n_freq*n_time pairs of f32 (re, im), row-major by frequency bin.
struct TfrDump {
  TransformKind kind;
  GridScale scale;
  double fs, omega_min, omega_max, step;
  Matrix<std::complex<float>> values;
};

namespace detail {
template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw Error("truncated TFR dump");
  return v;
}
}  // namespace detail

inline nlohmann::json window_json(const WindowSpec& w) {
  const auto& c = w.constants();
  nlohmann::json j{{"kind", to_string(w.kind())}, {"f0", w.f0()}, {"C_h", c.c_h}, {"omega_bar", c.omega_bar}, {"h_max", c.h_max}};
  j["D_h"] = c.d_h_finite() ? nlohmann::json(c.d_h) : nlohmann::json("inf");
  if (w.is_wavelet()) j["omega_psi"] = w.omega_psi();
  return j;
}

inline void write_tfr(const TFRMatrix& tfr, const std::filesystem::path& bin_path, const nlohmann::json& provenance = {}) {
  std::ofstream os(bin_path, std::ios::binary);
  if (!os) throw Error("cannot open " + bin_path.string() + " for writing");
  os.write("TFR1", 4);
  detail::put<std::uint8_t>(os, static_cast<std::uint8_t>(tfr.kind));
  detail::put<std::uint64_t>(os, tfr.n_freq());
  detail::put<std::uint64_t>(os, tfr.n_time());
  detail::put<double>(os, tfr.time.fs);
  detail::put<std::uint8_t>(os, tfr.grid.scale() == GridScale::Linear ? 0 : 1);
  detail::put<double>(os, tfr.grid.omega_min());
  detail::put<double>(os, tfr.grid.omega_max());
  detail::put<double>(os, tfr.grid.step());
  for (const cplx v : tfr.values.flat()) {
    detail::put<float>(os, static_cast<float>(v.real()));
    detail::put<float>(os, static_cast<float>(v.imag()));
  }
  nlohmann::json side{{"format", "TFR1"},
                      {"kind", to_string(tfr.kind)},
                      {"window", window_json(tfr.window)},
                      {"n_freq", tfr.n_freq()},
                      {"n_time", tfr.n_time()},
                      {"fs", tfr.time.fs},
                      {"t0", tfr.time.t0},
                      {"grid", {{"scale", tfr.grid.scale() == GridScale::Linear ? "linear" : "log"},
                                {"omega_min", tfr.grid.omega_min()},
                                {"omega_max", tfr.grid.omega_max()},
                                {"step", tfr.grid.step()}}},
                      {"padding", to_string(tfr.options.padding)},
                      {"pad_len", tfr.pad_len},
                      {"provenance", provenance}};
  auto side_path = bin_path;
  side_path += ".json";
  std::ofstream js(side_path);
  js << side.dump(2) << '\n';
}

inline TfrDump read_tfr(const std::filesystem::path& bin_path) {
  std::ifstream is(bin_path, std::ios::binary);
  if (!is) throw Error("cannot open " + bin_path.string());
  std::array<char, 4> magic{};
  is.read(magic.data(), 4);
  if (std::memcmp(magic.data(), "TFR1", 4) != 0) throw Error("bad TFR dump magic");
  TfrDump d{};
  d.kind = static_cast<TransformKind>(detail::get<std::uint8_t>(is));
  const auto nf = detail::get<std::uint64_t>(is);
  const auto nt = detail::get<std::uint64_t>(is);
  d.fs = detail::get<double>(is);
  d.scale = detail::get<std::uint8_t>(is) == 0 ? GridScale::Linear : GridScale::Logarithmic;
  d.omega_min = detail::get<double>(is);
  d.omega_max = detail::get<double>(is);
  d.step = detail::get<double>(is);
  d.values = Matrix<std::complex<float>>(nf, nt);
  for (auto& v : d.values.flat()) {
    const float re = detail::get<float>(is);
    const float im = detail::get<float>(is);
    v = {re, im};
  }
  return d;
}

}  // namespace tfrlab
