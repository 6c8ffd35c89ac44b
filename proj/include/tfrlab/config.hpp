#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tfrlab/reconstruction.hpp"
#include "tfrlab/signal.hpp"
#include "tfrlab/tfr.hpp"
#include "tfrlab/window.hpp"

namespace tfrlab {

using nlohmann::json;

// ---- signal specs as JSON -------------------------------------------------------------
// Frequencies are given in Hz ("*_hz"), phases in radians.
//   {"type":"tones","tones":[{"amplitude":1,"freq_hz":2,"phase":0}, ...]}
//   {"type":"am","amplitude":1,"depth":0.5,"mod_freq_hz":0.2,"mod_phase":0,"carrier_hz":1.5,"phase":0}
//   {"type":"fm", same fields as "am"}
//   {"type":"noisy_tone","carrier_hz":5,"sigma":0.1,"seed":1,"amplitude":1,"phase":0}
//   {"type":"delta","t0":25,"amplitude":50}
//   {"type":"composite","parts":[...]}

inline json signal_to_json(const SignalSpec& spec) {
  struct V {
    json operator()(const MultiTone& m) const {
      json tones = json::array();
      for (const auto& t : m.tones) tones.push_back({{"amplitude", t.amplitude}, {"freq_hz", t.frequency / two_pi}, {"phase", t.phase}});
      return {{"type", "tones"}, {"tones", tones}};
    }
    static json modulated(const char* type, double a, double depth, double mf, double mp, double c, double ph) {
      return {{"type", type}, {"amplitude", a}, {"depth", depth}, {"mod_freq_hz", mf / two_pi}, {"mod_phase", mp}, {"carrier_hz", c / two_pi}, {"phase", ph}};
    }
    json operator()(const AmComponent& a) const { return modulated("am", a.amplitude, a.depth, a.mod_freq, a.mod_phase, a.carrier, a.phase); }
    json operator()(const FmComponent& f) const { return modulated("fm", f.amplitude, f.depth, f.mod_freq, f.mod_phase, f.carrier, f.phase); }
    json operator()(const NoisyTone& n) const {
      return {{"type", "noisy_tone"}, {"carrier_hz", n.carrier / two_pi}, {"sigma", n.sigma}, {"seed", n.seed}, {"amplitude", n.amplitude}, {"phase", n.phase}};
    }
    json operator()(const DeltaPulse& d) const { return {{"type", "delta"}, {"t0", d.t0}, {"amplitude", d.amplitude}}; }
    json operator()(const Composite& c) const {
      json parts = json::array();
      for (const auto& p : c.parts) parts.push_back(std::visit(*this, p.model));
      return {{"type", "composite"}, {"parts", parts}};
    }
  };
  return std::visit(V{}, spec.model);
}

// Collects schema problems as "path: message" instead of stopping at the first one.
class ConfigReader {
 public:
  std::vector<std::string> issues;

  void fail(const std::string& path, const std::string& msg) { issues.push_back(path + ": " + msg); }

  double number(const json& j, const std::string& key, const std::string& path, std::optional<double> fallback = std::nullopt) {
    if (!j.contains(key)) {
      if (!fallback) fail(path + "." + key, "required number is missing");
      return fallback.value_or(0.0);
    }
    if (!j.at(key).is_number()) {
      fail(path + "." + key, "expected a number");
      return fallback.value_or(0.0);
    }
    return j.at(key).get<double>();
  }

  std::string text(const json& j, const std::string& key, const std::string& path, std::optional<std::string> fallback = std::nullopt) {
    if (!j.contains(key)) {
      if (!fallback) fail(path + "." + key, "required string is missing");
      return fallback.value_or("");
    }
    if (!j.at(key).is_string()) {
      fail(path + "." + key, "expected a string");
      return fallback.value_or("");
    }
    return j.at(key).get<std::string>();
  }

  std::optional<SignalSpec> signal(const json& j, const std::string& path) {
    if (!j.is_object()) {
      fail(path, "expected an object");
      return std::nullopt;
    }
    const std::string type = text(j, "type", path);
    SignalSpec spec;
    if (type == "tones") {
      MultiTone m;
      if (!j.contains("tones") || !j.at("tones").is_array()) {
        fail(path + ".tones", "expected an array of tones");
        return std::nullopt;
      }
      for (std::size_t i = 0; i < j.at("tones").size(); ++i) {
        const auto& t = j.at("tones")[i];
        const std::string p = path + ".tones[" + std::to_string(i) + "]";
        m.tones.push_back({number(t, "amplitude", p, 1.0), Hz{number(t, "freq_hz", p)}.rad(), number(t, "phase", p, 0.0)});
      }
      spec.model = m;
    } else if (type == "am" || type == "fm") {
      const double a = number(j, "amplitude", path, 1.0), depth = number(j, "depth", path), mf = Hz{number(j, "mod_freq_hz", path)}.rad();
      const double mp = number(j, "mod_phase", path, 0.0), c = Hz{number(j, "carrier_hz", path)}.rad(), ph = number(j, "phase", path, 0.0);
      if (type == "am")
        spec.model = AmComponent{a, depth, mf, mp, c, ph};
      else
        spec.model = FmComponent{a, depth, mf, mp, c, ph};
    } else if (type == "noisy_tone") {
      spec.model = NoisyTone{Hz{number(j, "carrier_hz", path)}.rad(), number(j, "sigma", path), static_cast<std::uint64_t>(number(j, "seed", path, 1.0)),
                             number(j, "amplitude", path, 1.0), number(j, "phase", path, 0.0)};
    } else if (type == "delta") {
      spec.model = DeltaPulse{number(j, "t0", path), number(j, "amplitude", path, 1.0)};
    } else if (type == "composite") {
      Composite c;
      if (!j.contains("parts") || !j.at("parts").is_array()) {
        fail(path + ".parts", "expected an array of signal specs");
        return std::nullopt;
      }
      for (std::size_t i = 0; i < j.at("parts").size(); ++i) {
        auto part = signal(j.at("parts")[i], path + ".parts[" + std::to_string(i) + "]");
        if (!part) return std::nullopt;
        c.parts.push_back(std::move(*part));
      }
      spec.model = std::move(c);
    } else {
      if (!type.empty()) fail(path + ".type", "unknown signal type '" + type + "'");
      return std::nullopt;
    }
    try {
      validate(spec);
    } catch (const SpecError& e) {
      fail(path, e.what());
      return std::nullopt;
    }
    return spec;
  }
};

inline SignalSpec signal_from_json(const json& j) {
  ConfigReader r;
  auto spec = r.signal(j, "signal");
  if (!spec || !r.issues.empty()) throw SpecError(r.issues.empty() ? "invalid signal spec" : r.issues.front());
  return *spec;
}

// ---- experiment configuration ---------------------------------------------------------

enum class ExperimentKind { RegimeMap, ReconSurface, NoiseSweep, AdaptF0, AdaptMethod, SkeletonDemo, SingleRun };

inline const std::map<std::string, ExperimentKind>& experiment_names() {
  static const std::map<std::string, ExperimentKind> names{{"regime_map", ExperimentKind::RegimeMap},       {"recon_surface", ExperimentKind::ReconSurface},
                                                           {"noise_sweep", ExperimentKind::NoiseSweep},     {"adapt_f0", ExperimentKind::AdaptF0},
                                                           {"adapt_method", ExperimentKind::AdaptMethod},   {"skeleton_demo", ExperimentKind::SkeletonDemo},
                                                           {"single_run", ExperimentKind::SingleRun}};
  return names;
}

inline std::string to_string(ExperimentKind k) {
  for (const auto& [name, kind] : experiment_names())
    if (kind == k) return name;
  return "?";
}

// Defaults overridable through the "settings" object.
struct Settings {
  double eps = defaults::eps;
  double eps_bessel = defaults::eps_bessel;
  double peak_threshold = defaults::peak_threshold;
  double ifm_threshold = defaults::ifm_threshold;
  double df_hz = defaults::df_hz;
  int voices = defaults::voices;
  int f0_voices = defaults::f0_voices;
  double error_floor = defaults::error_floor;
  Kappa kappa;
};

struct GridSettings {
  bool automatic = true;  // band from the signal's tones widened by the window support
  GridScale scale = GridScale::Linear;
  double fmin_hz = 0.0, fmax_hz = 0.0;
  std::optional<double> df_hz;
  std::optional<int> voices;
};

struct Axis {
  std::string name;
  std::vector<double> values;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::SingleRun;
  std::string name = "experiment";
  std::uint64_t seed = 1;
  Settings settings;
  std::optional<SignalSpec> signal;  // explicit signal; otherwise built from `family` and the point parameters
  std::string family;
  std::vector<WindowKind> windows{WindowKind::Gaussian};
  std::vector<TransformKind> transforms;  // empty: the unsqueezed transform of each window
  GridSettings grid;
  double fs = 50.0, duration = 100.0;
  Padding padding = Padding::Exact;
  std::map<std::string, double> params;
  std::vector<Axis> axes;  // cartesian product, last axis varies fastest
  std::size_t realizations = 1;
  std::filesystem::path out = "results";
  json raw;

  [[nodiscard]] std::size_t point_count() const {
    std::size_t n = 1;
    for (const auto& a : axes) n *= a.values.size();
    return n;
  }

  [[nodiscard]] std::map<std::string, double> point(std::size_t index) const {
    auto p = params;
    for (auto it = axes.rbegin(); it != axes.rend(); ++it) {
      p[it->name] = it->values[index % it->values.size()];
      index /= it->values.size();
    }
    return p;
  }

  [[nodiscard]] std::vector<std::string> parameter_names() const {
    std::vector<std::string> names;
    for (const auto& [k, _] : params) names.push_back(k);
    for (const auto& a : axes)
      if (!params.contains(a.name)) names.push_back(a.name);
    std::sort(names.begin(), names.end());
    return names;
  }
};

namespace detail {

inline const std::vector<std::string>& known_families() {
  static const std::vector<std::string> f{"two_tone", "am", "fm", "noisy_tone", "am_noise", "fm_noise"};
  return f;
}

// Axis values: a list, {"range":[a,b,n]} (linear) or {"log_range":[a,b,n]}.
inline std::vector<double> axis_values(const json& j, const std::string& path, ConfigReader& r) {
  std::vector<double> v;
  if (j.is_array()) {
    for (const auto& x : j) {
      if (!x.is_number()) {
        r.fail(path, "axis entries must be numbers");
        return {};
      }
      v.push_back(x.get<double>());
    }
  } else if (j.is_object() && (j.contains("range") || j.contains("log_range"))) {
    const bool log = j.contains("log_range");
    const json& spec = j.at(log ? "log_range" : "range");
    if (!spec.is_array() || spec.size() != 3 || !spec[0].is_number() || !spec[1].is_number() || !spec[2].is_number_integer()) {
      r.fail(path, "range must be [start, stop, count]");
      return {};
    }
    const double a = spec[0].get<double>(), b = spec[1].get<double>();
    const auto n = spec[2].get<long>();
    if (n < 1 || (log && !(a > 0.0 && b > 0.0))) {
      r.fail(path, "range needs count >= 1 (and positive bounds for log_range)");
      return {};
    }
    for (long i = 0; i < n; ++i) {
      const double f = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
      v.push_back(log ? a * std::pow(b / a, f) : a + (b - a) * f);
    }
  } else {
    r.fail(path, "expected a list or a {\"range\"|\"log_range\": [start, stop, count]} object");
  }
  if (v.empty() && r.issues.empty()) r.fail(path, "sweep axes must be non-empty");
  return v;
}

}  // namespace detail

inline ExperimentConfig parse_config(const json& j) {
  ConfigReader r;
  ExperimentConfig c;
  c.raw = j;
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");

  const std::string kind = r.text(j, "experiment", "config");
  if (auto it = experiment_names().find(kind); it != experiment_names().end())
    c.kind = it->second;
  else if (!kind.empty())
    r.fail("config.experiment", "unknown experiment '" + kind + "'");
  c.name = r.text(j, "name", "config", "experiment");
  c.seed = static_cast<std::uint64_t>(r.number(j, "seed", "config", 1.0));
  c.fs = r.number(j, "fs", "config", 50.0);
  c.duration = r.number(j, "duration", "config", 100.0);
  if (!(c.fs > 0.0)) r.fail("config.fs", "must be positive");
  if (!(c.duration > 0.0)) r.fail("config.duration", "must be positive");
  c.realizations = static_cast<std::size_t>(r.number(j, "realizations", "config", 1.0));
  if (c.realizations < 1) r.fail("config.realizations", "must be >= 1");
  if (j.contains("out")) c.out = r.text(j, "out", "config");
  try {
    c.padding = padding_from_string(r.text(j, "padding", "config", "exact"));
  } catch (const Error& e) {
    r.fail("config.padding", e.what());
  }

  if (j.contains("settings")) {
    const json& s = j.at("settings");
    auto& st = c.settings;
    st.eps = r.number(s, "eps", "config.settings", st.eps);
    st.eps_bessel = r.number(s, "eps_bessel", "config.settings", st.eps_bessel);
    st.peak_threshold = r.number(s, "peak_threshold", "config.settings", st.peak_threshold);
    st.ifm_threshold = r.number(s, "ifm_threshold", "config.settings", st.ifm_threshold);
    st.df_hz = r.number(s, "df_hz", "config.settings", st.df_hz);
    st.voices = static_cast<int>(r.number(s, "voices", "config.settings", st.voices));
    st.f0_voices = static_cast<int>(r.number(s, "f0_voices", "config.settings", st.f0_voices));
    st.error_floor = r.number(s, "error_floor", "config.settings", st.error_floor);
    for (const char* key : {"kappa_direct", "kappa_ridge"}) {
      if (!s.contains(key)) continue;
      const json& k = s.at(key);
      if (!k.is_array() || k.size() != 3) {
        r.fail(std::string("config.settings.") + key, "expected three numbers (amplitude, phase, frequency)");
        continue;
      }
      auto& dst = std::string(key) == "kappa_direct" ? st.kappa.direct : st.kappa.ridge;
      for (std::size_t i = 0; i < 3; ++i) dst[i] = k[i].get<double>();
    }
    if (!(st.eps > 0.0 && st.eps < 0.5)) r.fail("config.settings.eps", "must lie in (0, 0.5)");
    if (!(st.df_hz > 0.0)) r.fail("config.settings.df_hz", "must be positive");
    if (st.voices < 1) r.fail("config.settings.voices", "must be >= 1");
  }

  if (j.contains("signal")) c.signal = r.signal(j.at("signal"), "config.signal");
  c.family = r.text(j, "family", "config", "");
  if (!c.family.empty() && std::find(detail::known_families().begin(), detail::known_families().end(), c.family) == detail::known_families().end())
    r.fail("config.family", "unknown signal family '" + c.family + "'");

  if (j.contains("windows")) {
    c.windows.clear();
    const json& w = j.at("windows");
    if (!w.is_array() || w.empty()) r.fail("config.windows", "expected a non-empty list of window names");
    else
      for (std::size_t i = 0; i < w.size(); ++i) {
        try {
          c.windows.push_back(window_kind_from_string(w[i].get<std::string>()));
        } catch (const std::exception& e) {
          r.fail("config.windows[" + std::to_string(i) + "]", e.what());
        }
      }
  }
  if (j.contains("transforms")) {
    const json& t = j.at("transforms");
    for (std::size_t i = 0; t.is_array() && i < t.size(); ++i) {
      const std::string name = t[i].is_string() ? t[i].get<std::string>() : "";
      if (name == "wft") c.transforms.push_back(TransformKind::WFT);
      else if (name == "wt") c.transforms.push_back(TransformKind::WT);
      else if (name == "swft") c.transforms.push_back(TransformKind::SWFT);
      else if (name == "swt") c.transforms.push_back(TransformKind::SWT);
      else r.fail("config.transforms[" + std::to_string(i) + "]", "expected one of wft, wt, swft, swt");
    }
  }

  if (j.contains("grid")) {
    const json& g = j.at("grid");
    auto& gs = c.grid;
    const std::string scale = r.text(g, "scale", "config.grid", "auto");
    gs.automatic = scale == "auto";
    if (!gs.automatic) {
      if (scale == "linear") gs.scale = GridScale::Linear;
      else if (scale == "log") gs.scale = GridScale::Logarithmic;
      else r.fail("config.grid.scale", "expected auto, linear or log");
      gs.fmin_hz = r.number(g, "fmin_hz", "config.grid");
      gs.fmax_hz = r.number(g, "fmax_hz", "config.grid");
      if (!(gs.fmax_hz > gs.fmin_hz)) r.fail("config.grid", "fmax_hz must exceed fmin_hz");
      if (gs.fmax_hz > 0.5 * c.fs) r.fail("config.grid.fmax_hz", "exceeds the Nyquist frequency fs/2");
      if (gs.scale == GridScale::Logarithmic && !(gs.fmin_hz > 0.0)) r.fail("config.grid.fmin_hz", "log grids need fmin_hz > 0");
    }
    if (g.contains("df_hz")) gs.df_hz = r.number(g, "df_hz", "config.grid");
    if (g.contains("voices")) gs.voices = static_cast<int>(r.number(g, "voices", "config.grid"));
  }

  if (j.contains("params")) {
    if (!j.at("params").is_object()) r.fail("config.params", "expected an object of numbers");
    else
      for (const auto& [k, v] : j.at("params").items()) {
        if (!v.is_number()) r.fail("config.params." + k, "expected a number");
        else c.params[k] = v.get<double>();
      }
  }
  if (j.contains("sweep")) {
    if (!j.at("sweep").is_object()) r.fail("config.sweep", "expected an object of axes");
    else
      for (const auto& [k, v] : j.at("sweep").items()) c.axes.push_back({k, detail::axis_values(v, "config.sweep." + k, r)});
  }

  // kind-specific requirements
  const bool needs_signal = c.kind == ExperimentKind::SkeletonDemo || c.kind == ExperimentKind::SingleRun || c.kind == ExperimentKind::AdaptF0;
  if (needs_signal && !j.contains("signal") && c.family.empty()) r.fail("config", "this experiment needs a \"signal\" or a \"family\"");
  if (!needs_signal && c.family.empty() && !j.contains("signal")) r.fail("config.family", "this experiment needs a parametric signal family");
  if (c.kind == ExperimentKind::RegimeMap && !c.family.empty() && c.family != "two_tone" && c.family != "am" && c.family != "fm")
    r.fail("config.family", "regime maps support two_tone, am and fm");
  if (c.kind == ExperimentKind::AdaptMethod && !c.family.empty() && c.family != "noisy_tone" && c.family != "am_noise" && c.family != "fm_noise")
    r.fail("config.family", "adaptive method selection supports noisy_tone, am_noise and fm_noise");
  if (c.kind == ExperimentKind::RegimeMap && !c.transforms.empty()) r.fail("config.transforms", "regime maps are analytic and take no transforms");
  if (c.grid.automatic && c.kind == ExperimentKind::AdaptF0) r.fail("config.grid", "adapt_f0 needs an explicit grid");

  if (!r.issues.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& i : r.issues) msg += "\n  " + i;
    throw ConfigError(msg);
  }
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(is, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(j);
}

}  // namespace tfrlab
