#pragma once

#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "tfrlab/config.hpp"
#include "tfrlab/optimizer.hpp"
#include "tfrlab/reconstruction.hpp"
#include "tfrlab/regime.hpp"
#include "tfrlab/tfr_io.hpp"

namespace tfrlab {

inline constexpr const char* version = "0.1.0";

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
using Tables = std::map<std::string, Table>;

inline std::string fmt_num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

// Errors below the resolution floor are not meaningful and are reported as a bound.
inline std::string fmt_err(double x, double floor) {
  if (std::isfinite(x) && x < floor) return "≤" + fmt_num(floor);
  return fmt_num(x);
}

namespace detail {

using Params = std::map<std::string, double>;

inline double need(const Params& p, const std::string& key) {
  auto it = p.find(key);
  if (it == p.end()) throw ConfigError("missing parameter '" + key + "'");
  return it->second;
}

inline double param_or(const Params& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

inline std::uint64_t realization_seed(std::uint64_t base, std::size_t r) { return splitmix64(base + 0x9E3779B97F4A7C15ULL * (r + 1)); }

// Modulation frequency from either an explicit value in Hz or the product with f0 (rad/s units).
inline double mod_frequency(const Params& p, const char* hz_key, const char* product_key) {
  if (p.contains(hz_key)) return Hz{p.at(hz_key)}.rad();
  if (p.contains(product_key)) return need(p, product_key) / need(p, "f0");
  throw ConfigError(std::string("missing parameter '") + hz_key + "' or '" + product_key + "'");
}

inline SignalSpec family_signal(const std::string& family, const Params& p, std::uint64_t seed) {
  SignalSpec s;
  if (family == "two_tone") {
    const double nu1 = Hz{need(p, "nu1_hz")}.rad();
    double nu2 = 0.0;
    if (p.contains("nu2_hz")) nu2 = Hz{p.at("nu2_hz")}.rad();
    else if (p.contains("dnu_hz")) nu2 = nu1 + Hz{p.at("dnu_hz")}.rad();
    else if (p.contains("f0_dnu")) nu2 = nu1 + p.at("f0_dnu") / need(p, "f0");
    else if (p.contains("f0_log_ratio")) nu2 = nu1 * std::exp(p.at("f0_log_ratio") / need(p, "f0"));
    else throw ConfigError("two_tone needs one of nu2_hz, dnu_hz, f0_dnu, f0_log_ratio");
    s.model = MultiTone{{{1.0, nu1, param_or(p, "phi1", 0.0)}, {param_or(p, "r", 1.0), nu2, param_or(p, "phi2", 0.0)}}};
  } else if (family == "am" || family == "am_noise") {
    s.model = AmComponent{1.0, need(p, "r_a"), mod_frequency(p, "mod_freq_hz", "f0_nu_a"), param_or(p, "mod_phase", 0.0), Hz{need(p, "carrier_hz")}.rad(),
                          param_or(p, "phase", 0.0)};
  } else if (family == "fm" || family == "fm_noise") {
    s.model = FmComponent{1.0, need(p, "r_b"), mod_frequency(p, "mod_freq_hz", "f0_nu_b"), param_or(p, "mod_phase", 0.0), Hz{need(p, "carrier_hz")}.rad(),
                          param_or(p, "phase", 0.0)};
  } else if (family == "noisy_tone") {
    s.model = NoisyTone{Hz{need(p, "carrier_hz")}.rad(), need(p, "sigma"), seed, 1.0, param_or(p, "phase", 0.0)};
  } else {
    throw ConfigError("unknown signal family '" + family + "'");
  }
  if (family == "am_noise" || family == "fm_noise") {
    Composite c;
    c.parts.push_back(s);
    c.parts.push_back(SignalSpec{NoisyTone{1.0, need(p, "sigma"), seed, 0.0, 0.0}});
    s.model = std::move(c);
  }
  return s;
}

inline SignalSpec point_signal(const ExperimentConfig& cfg, const Params& p, std::uint64_t seed) {
  SignalSpec s = cfg.signal ? *cfg.signal : family_signal(cfg.family, p, seed);
  validate(s, cfg.settings.eps_bessel);
  return s;
}

// Frequencies of the deterministic tonal content (rad/s).
inline void tonal_frequencies(const SignalSpec& s, double eps_j, std::vector<double>& out) {
  struct V {
    double eps_j;
    std::vector<double>& out;
    void operator()(const MultiTone& m) const {
      for (const auto& t : m.tones) out.push_back(t.frequency);
    }
    void operator()(const AmComponent& a) const { (*this)(am_as_tones(a)); }
    void operator()(const FmComponent& f) const { (*this)(fm_as_tones(f, eps_j)); }
    void operator()(const NoisyTone& n) const {
      if (n.amplitude > 0.0) out.push_back(n.carrier);
    }
    void operator()(const DeltaPulse&) const {}
    void operator()(const Composite& c) const {
      for (const auto& p : c.parts) std::visit(*this, p.model);
    }
  };
  std::visit(V{eps_j, out}, s.model);
}

inline FrequencyGrid point_grid(const ExperimentConfig& cfg, const WindowSpec& w, const SignalSpec& s) {
  const auto& g = cfg.grid;
  const double df = Hz{g.df_hz.value_or(cfg.settings.df_hz)}.rad();
  const int voices = g.voices.value_or(cfg.settings.voices);
  const double nyquist = pi * cfg.fs;
  if (!g.automatic) {
    if (w.is_wavelet() != (g.scale == GridScale::Logarithmic))
      throw ConfigError("grid scale '" + std::string(g.scale == GridScale::Linear ? "linear" : "log") + "' does not suit the " + to_string(w.kind()) + " window");
    return g.scale == GridScale::Linear ? FrequencyGrid::linear(Hz{g.fmin_hz}.rad(), Hz{g.fmax_hz}.rad(), df)
                                        : FrequencyGrid::logarithmic(Hz{g.fmin_hz}.rad(), Hz{g.fmax_hz}.rad(), voices);
  }
  std::vector<double> f;
  tonal_frequencies(s, cfg.settings.eps_bessel, f);
  if (f.empty()) throw ConfigError("automatic grid needs tonal content; give an explicit grid");
  const auto [lo_it, hi_it] = std::minmax_element(f.begin(), f.end());
  const auto sup = w.epsilon_support(defaults::pad_eps);
  if (w.is_wavelet()) {
    const double lo = *lo_it * w.omega_psi() / sup.xi2;
    const double hi = std::min(*hi_it * w.omega_psi() / sup.xi1, nyquist);
    return FrequencyGrid::logarithmic(lo, hi, voices);
  }
  const double lo = std::max(0.0, *lo_it + sup.xi1);
  const double hi = std::min(*hi_it + sup.xi2, nyquist);
  return FrequencyGrid::linear(lo, hi, df);
}

inline std::vector<TransformKind> point_transforms(const ExperimentConfig& cfg, const WindowSpec& w) {
  if (cfg.transforms.empty()) return {w.is_wavelet() ? TransformKind::WT : TransformKind::WFT};
  std::vector<TransformKind> out;
  for (auto t : cfg.transforms)
    if (is_wavelet_family(t) == w.is_wavelet()) out.push_back(t);
  return out;
}

inline TfrOptions point_options(const ExperimentConfig& cfg, const SignalSpec& s) {
  TfrOptions o;
  o.padding = cfg.padding;
  if (o.padding == Padding::Exact) o.source = std::make_shared<SignalSpec>(s);
  return o;
}

struct Analysis {
  RealSignal signal;
  std::vector<ComponentTrack> truth;
  TFRMatrix base;
  std::optional<InstFreqMap> ifm;
  std::map<TransformKind, TFRMatrix> transforms;
};

inline Analysis analyse(const ExperimentConfig& cfg, const SignalSpec& s, const WindowSpec& w, const std::vector<TransformKind>& kinds) {
  auto syn = synthesize(s, cfg.fs, cfg.duration, cfg.settings.eps_bessel);
  const auto grid = point_grid(cfg, w, s);
  auto base = compute_tfr(syn.signal, w, grid, point_options(cfg, s));
  Analysis a{std::move(syn.signal), std::move(syn.truth), std::move(base), std::nullopt, {}};
  const bool squeezed = std::any_of(kinds.begin(), kinds.end(), [](auto k) { return is_squeezed(k); });
  if (squeezed || !w.constants().d_h_finite()) a.ifm = inst_freq_map(a.base, a.signal, cfg.settings.ifm_threshold);
  for (auto k : kinds) {
    if (is_squeezed(k))
      a.transforms.emplace(k, synchrosqueeze(a.base, *a.ifm).tfr);
    else
      a.transforms.emplace(k, a.base);
  }
  return a;
}

inline std::vector<std::pair<Method, ComponentTrack>> reconstruct_all(const Analysis& a, const TFRMatrix& tfr, const SupportCurve& c) {
  std::vector<std::pair<Method, ComponentTrack>> out;
  out.emplace_back(Method::Ridge, ridge_reconstruct(tfr, c, is_squeezed(tfr.kind) ? RidgeOutput::PhaseFrequency : RidgeOutput::Full));
  const bool hybrid = !is_squeezed(tfr.kind) && !tfr.window.constants().d_h_finite();
  auto d = direct_reconstruct(tfr, c, hybrid ? FrequencyEstimate::Hybrid : FrequencyEstimate::Direct, hybrid ? &*a.ifm : nullptr);
  out.emplace_back(d.method, std::move(d));
  return out;
}

inline std::vector<std::string> lead(const ExperimentConfig& cfg, std::size_t index, const Params& p) {
  std::vector<std::string> row{std::to_string(index)};
  for (const auto& name : cfg.parameter_names()) row.push_back(fmt_num(param_or(p, name, std::nan(""))));
  return row;
}

inline std::vector<std::string> lead_header(const ExperimentConfig& cfg) {
  std::vector<std::string> h{"index"};
  for (const auto& name : cfg.parameter_names()) h.push_back(name);
  return h;
}

inline Table& table(Tables& t, const std::string& name, const ExperimentConfig& cfg, std::initializer_list<const char*> cols) {
  Table& tab = t[name];
  if (tab.header.empty()) {
    tab.header = lead_header(cfg);
    tab.header.insert(tab.header.end(), cols.begin(), cols.end());
  }
  return tab;
}

inline void add_row(Table& t, std::vector<std::string> lead, std::initializer_list<std::string> cells) {
  lead.insert(lead.end(), cells.begin(), cells.end());
  t.rows.push_back(std::move(lead));
}

inline std::string opt_bool(const std::optional<bool>& b) { return b ? (*b ? "1" : "0") : ""; }

inline std::string hz_list(const std::vector<double>& omegas) {
  std::string s;
  for (double w : omegas) s += (s.empty() ? "" : ";") + fmt_num(w / two_pi);
  return s;
}

inline RegimeReport family_regime(const std::string& family, const WindowSpec& w, const SignalSpec& s, double eps, double eps_j) {
  if (family == "two_tone") {
    const auto& m = std::get<MultiTone>(s.model);
    return classify_two_tone(w, m.tones[0].frequency, m.tones[1].frequency, m.tones[1].amplitude / m.tones[0].amplitude, eps);
  }
  if (family == "am") {
    const auto& a = std::get<AmComponent>(s.model);
    return classify_am(w, a.carrier, a.mod_freq, a.depth, eps);
  }
  if (family == "fm") {
    const auto& f = std::get<FmComponent>(s.model);
    return classify_fm(w, f.carrier, f.mod_freq, f.depth, eps, eps_j);
  }
  throw ConfigError("no regime classification for family '" + family + "'");
}

// ---- experiment kinds -------------------------------------------------------------------

struct PointContext {
  const ExperimentConfig& cfg;
  std::size_t index;
  Params p;
  std::filesystem::path out;
};

inline Tables run_regime_map(const PointContext& ctx) {
  Tables t;
  const auto& cfg = ctx.cfg;
  const double eps = param_or(ctx.p, "eps", cfg.settings.eps);
  const SignalSpec s = point_signal(cfg, ctx.p, cfg.seed);
  auto& tab = table(t, "regimes", cfg,
                    {"window", "case", "eta_1", "eta_2", "max_eta", "intersections_hz", "interior_minima", "approx_i", "approx_iv", "mean_peaks", "regime"});
  for (auto kind : cfg.windows) {
    const WindowSpec w(kind, need(ctx.p, "f0"));
    RegimeReport rep = family_regime(cfg.family, w, s, eps, cfg.settings.eps_bessel);
    if (param_or(ctx.p, "mean_peaks", 0.0) != 0.0) {
      const auto syn = synthesize(s, cfg.fs, cfg.duration, cfg.settings.eps_bessel);
      rep.mean_peaks = mean_peak_count(compute_tfr(syn.signal, w, point_grid(cfg, w, s), point_options(cfg, s)), cfg.settings.peak_threshold);
    }
    std::string e1, e2;
    if (rep.kind == RegimeCase::TwoTone) {
      e1 = fmt_num(rep.eta.at("eta1"));
      e2 = fmt_num(rep.eta.at("eta2"));
    } else {
      e1 = fmt_num(rep.max_eta());
    }
    add_row(tab, lead(cfg, ctx.index, ctx.p),
            {to_string(kind), to_string(rep.kind), e1, e2, fmt_num(rep.max_eta()), hz_list(rep.intersections), std::to_string(rep.interior_minima),
             opt_bool(rep.approx_i), opt_bool(rep.approx_iv), rep.mean_peaks ? fmt_num(*rep.mean_peaks) : "", to_string(rep.regime)});
  }
  return t;
}

inline Tables run_recon_surface(const PointContext& ctx) {
  Tables t;
  const auto& cfg = ctx.cfg;
  const SignalSpec s = point_signal(cfg, ctx.p, cfg.seed);
  const double floor = cfg.settings.error_floor;
  auto& tab = table(t, "errors", cfg, {"window", "transform", "component", "method", "eps_a", "eps_phi", "eps_f", "regime"});
  for (auto kind : cfg.windows) {
    const WindowSpec w(kind, need(ctx.p, "f0"));
    const auto kinds = point_transforms(cfg, w);
    const Analysis a = analyse(cfg, s, w, kinds);
    std::string regime;
    if (cfg.family == "two_tone" || cfg.family == "am" || cfg.family == "fm")
      regime = to_string(family_regime(cfg.family, w, s, cfg.settings.eps, cfg.settings.eps_bessel).regime);
    for (const auto& [tk, tfr] : a.transforms) {
      for (std::size_t comp = 0; comp < a.truth.size(); ++comp) {
        ExtractionScheme scheme = MaximumBased{};
        if (a.truth.size() > 1) scheme = FrequencyBased{a.truth[comp].frequency, a.truth.size()};
        const auto curve = extract_tfs(tfr, scheme, cfg.settings.peak_threshold);
        for (const auto& [m, track] : reconstruct_all(a, tfr, curve)) {
          std::string ea, ep, ef;
          try {
            const auto e = error_metrics(track, a.truth[comp], tk);
            ea = track.amplitude.empty() ? "" : fmt_err(e.eps_a, floor);
            ep = fmt_err(e.eps_phi, floor);
            ef = fmt_err(e.eps_f, floor);
          } catch (const UndefinedMetricError&) {
            ea = ep = ef = "undefined";
          }
          add_row(tab, lead(cfg, ctx.index, ctx.p), {to_string(kind), to_string(tk), std::to_string(comp + 1), to_string(m), ea, ep, ef, regime});
        }
      }
    }
  }
  return t;
}

inline Tables run_noise_sweep(const PointContext& ctx) {
  Tables t;
  const auto& cfg = ctx.cfg;
  const double floor = cfg.settings.error_floor;
  auto& tab = table(t, "errors", cfg, {"window", "transform", "method", "eps_a", "eps_phi", "eps_f", "realizations"});
  for (auto kind : cfg.windows) {
    const WindowSpec w(kind, need(ctx.p, "f0"));
    const auto kinds = point_transforms(cfg, w);
    std::map<std::pair<TransformKind, Method>, std::array<double, 3>> sums;
    for (std::size_t r = 0; r < cfg.realizations; ++r) {
      const SignalSpec s = point_signal(cfg, ctx.p, realization_seed(cfg.seed, r));
      const Analysis a = analyse(cfg, s, w, kinds);
      for (const auto& [tk, tfr] : a.transforms) {
        const auto curve = extract_tfs(tfr, MaximumBased{w.is_wavelet()}, cfg.settings.peak_threshold);
        for (const auto& [m, track] : reconstruct_all(a, tfr, curve)) {
          const auto e = error_metrics(track, a.truth.at(0), tk);
          auto& acc = sums[{tk, m}];
          acc[0] += e.eps_a;
          acc[1] += e.eps_phi;
          acc[2] += e.eps_f;
        }
      }
    }
    const auto n = static_cast<double>(cfg.realizations);
    for (const auto& [key, acc] : sums)
      add_row(tab, lead(cfg, ctx.index, ctx.p),
              {to_string(kind), to_string(key.first), to_string(key.second), std::isnan(acc[0]) ? "" : fmt_err(acc[0] / n, floor), fmt_err(acc[1] / n, floor),
               fmt_err(acc[2] / n, floor), std::to_string(cfg.realizations)});
  }
  return t;
}

inline Tables run_adapt_f0(const PointContext& ctx) {
  Tables t;
  const auto& cfg = ctx.cfg;
  const SignalSpec s = point_signal(cfg, ctx.p, cfg.seed);
  auto& curve = table(t, "f0_curve", cfg, {"window", "f0", "F"});
  auto& summary = table(t, "summary", cfg, {"window", "F_p", "F_q", "f0_min", "f0_max", "f0_opt", "F_opt", "location", "am_regime_at_opt"});
  const auto syn = synthesize(s, cfg.fs, cfg.duration, cfg.settings.eps_bessel);
  const double p = param_or(ctx.p, "p", 1.0), q = param_or(ctx.p, "q", p * param_or(ctx.p, "q_over_p", 2.0));
  for (auto kind : cfg.windows) {
    const WindowSpec probe(kind, 1.0);
    const auto grid = point_grid(cfg, probe, s);
    OptimizeOptions opt;
    opt.n_tilde_v = cfg.settings.f0_voices;
    opt.tfr = point_options(cfg, s);
    if (ctx.p.contains("f0_lo") || ctx.p.contains("f0_hi")) opt.search_range = std::pair{param_or(ctx.p, "f0_lo", 0.0), param_or(ctx.p, "f0_hi", 1e300)};
    const auto res = optimize_f0(syn.signal, kind, grid, p, q, opt);
    for (std::size_t i = 0; i < res.f0_grid.size(); ++i)
      add_row(curve, lead(cfg, ctx.index, ctx.p), {to_string(kind), fmt_num(res.f0_grid[i]), fmt_num(res.F_values[i])});
    const std::string loc = res.argmin == 0 ? "min" : (res.argmin + 1 == res.f0_grid.size() ? "max" : "interior");
    std::string am_regime;
    if (const auto* am = std::get_if<AmComponent>(&s.model))
      am_regime = to_string(classify_am(WindowSpec(kind, res.f0_opt), am->carrier, am->mod_freq, am->depth, cfg.settings.eps).regime);
    add_row(summary, lead(cfg, ctx.index, ctx.p),
            {to_string(kind), fmt_num(p), fmt_num(q), fmt_num(res.bounds.f0_min), fmt_num(res.bounds.f0_max), fmt_num(res.f0_opt), fmt_num(res.F_opt), loc,
             am_regime});
  }
  return t;
}

inline Tables run_adapt_method(const PointContext& ctx) {
  Tables t;
  const auto& cfg = ctx.cfg;
  const double floor = cfg.settings.error_floor;
  auto& tab = table(t, "selection", cfg,
                    {"window", "parameter", "discrepancy_direct", "discrepancy_ridge", "selected", "error_direct", "error_ridge", "better"});
  const std::size_t edge = static_cast<std::size_t>(param_or(ctx.p, "edge_s", 0.0) * cfg.fs);
  for (auto kind : cfg.windows) {
    const WindowSpec w(kind, need(ctx.p, "f0"));
    std::array<double, 3> dd{}, dr{}, ed{}, er{};
    for (std::size_t r = 0; r < cfg.realizations; ++r) {
      const SignalSpec s = point_signal(cfg, ctx.p, realization_seed(cfg.seed, r));
      const auto syn = synthesize(s, cfg.fs, cfg.duration, cfg.settings.eps_bessel);
      const auto tfr = compute_tfr(syn.signal, w, point_grid(cfg, w, s), point_options(cfg, s));
      const auto curve = extract_tfs(tfr, MaximumBased{w.is_wavelet()}, cfg.settings.peak_threshold);
      const auto sel = adaptive_select(syn.signal, tfr, curve, cfg.settings.kappa, edge);
      const auto e_d = error_metrics(sel.direct, syn.truth.at(0), tfr.kind, edge);
      const auto e_r = error_metrics(sel.ridge, syn.truth.at(0), tfr.kind, edge);
      const std::array<double, 3> td{e_d.eps_a, e_d.eps_phi, e_d.eps_f}, tr{e_r.eps_a, e_r.eps_phi, e_r.eps_f};
      for (std::size_t i = 0; i < 3; ++i) {
        dd[i] += sel.discrepancy_direct[i];
        dr[i] += sel.discrepancy_ridge[i];
        ed[i] += td[i];
        er[i] += tr[i];
      }
    }
    static constexpr std::array<const char*, 3> names{"amplitude", "phase", "frequency"};
    for (std::size_t i = 0; i < 3; ++i) {
      add_row(tab, lead(cfg, ctx.index, ctx.p),
              {to_string(kind), names[i], fmt_num(dd[i]), fmt_num(dr[i]), dd[i] <= dr[i] ? "direct" : "ridge", fmt_err(ed[i] / cfg.realizations, floor),
               fmt_err(er[i] / cfg.realizations, floor), ed[i] <= er[i] ? "direct" : "ridge"});
    }
  }
  return t;
}

inline std::string dump_name(std::size_t index, WindowKind w, const std::string& what) {
  std::ostringstream os;
  os << "p" << std::setw(4) << std::setfill('0') << index << "_" << to_string(w) << "_" << what << ".tfr";
  return os.str();
}

inline json provenance(const PointContext& ctx, const std::string& what) {
  return {{"experiment", ctx.cfg.name}, {"point", ctx.index}, {"params", ctx.p}, {"content", what}, {"seed", ctx.cfg.seed}, {"version", version}};
}

inline double mean_atoms(const TFRMatrix& m) {
  std::size_t n = 0;
  for (const cplx v : m.values.flat()) n += v != cplx{} ? 1 : 0;
  return static_cast<double>(n) / static_cast<double>(m.n_time());
}

inline Tables run_skeleton_demo(const PointContext& ctx) {
  Tables t;
  const auto& cfg = ctx.cfg;
  const SignalSpec s = point_signal(cfg, ctx.p, cfg.seed);
  auto& tab = table(t, "skeletons", cfg, {"window", "mean_peaks", "ridge_atoms_per_column", "direct_atoms_per_column", "files"});
  std::filesystem::create_directories(ctx.out / "tfr");
  for (auto kind : cfg.windows) {
    const WindowSpec w(kind, need(ctx.p, "f0"));
    const Analysis a = analyse(cfg, s, w, {});
    const auto* ifm = a.ifm ? &*a.ifm : nullptr;
    const auto ridge = build_skeleton(a.base, Method::Ridge);
    const auto direct = build_skeleton(a.base, Method::Direct, ifm);
    std::string files;
    for (const auto& [what, m] : {std::pair<std::string, const TFRMatrix*>{"tfr", &a.base}, {"skeleton_ridge", &ridge}, {"skeleton_direct", &direct}}) {
      const auto name = dump_name(ctx.index, kind, what);
      write_tfr(*m, ctx.out / "tfr" / name, provenance(ctx, what));
      files += (files.empty() ? "" : ";") + ("tfr/" + name);
    }
    add_row(tab, lead(cfg, ctx.index, ctx.p),
            {to_string(kind), fmt_num(mean_peak_count(a.base, cfg.settings.peak_threshold)), fmt_num(mean_atoms(ridge)), fmt_num(mean_atoms(direct)), files});
  }
  return t;
}

inline Tables run_single(const PointContext& ctx) {
  Tables t;
  const auto& cfg = ctx.cfg;
  const double floor = cfg.settings.error_floor;
  const SignalSpec s = point_signal(cfg, ctx.p, cfg.seed);
  auto& runs = table(t, "runs", cfg, {"window", "transform", "mean_peaks", "file"});
  auto& errs = table(t, "errors", cfg, {"window", "transform", "method", "eps_a", "eps_phi", "eps_f"});
  std::filesystem::create_directories(ctx.out / "tfr");
  for (auto kind : cfg.windows) {
    const WindowSpec w(kind, need(ctx.p, "f0"));
    const Analysis a = analyse(cfg, s, w, point_transforms(cfg, w));
    for (const auto& [tk, tfr] : a.transforms) {
      const auto name = dump_name(ctx.index, kind, to_string(tk));
      write_tfr(tfr, ctx.out / "tfr" / name, provenance(ctx, to_string(tk)));
      add_row(runs, lead(cfg, ctx.index, ctx.p), {to_string(kind), to_string(tk), fmt_num(mean_peak_count(tfr, cfg.settings.peak_threshold)), "tfr/" + name});
      if (a.truth.size() != 1) continue;
      const auto curve = extract_tfs(tfr, MaximumBased{w.is_wavelet()}, cfg.settings.peak_threshold);
      for (const auto& [m, track] : reconstruct_all(a, tfr, curve)) {
        const auto e = error_metrics(track, a.truth[0], tk);
        add_row(errs, lead(cfg, ctx.index, ctx.p),
                {to_string(kind), to_string(tk), to_string(m), track.amplitude.empty() ? "" : fmt_err(e.eps_a, floor), fmt_err(e.eps_phi, floor),
                 fmt_err(e.eps_f, floor)});
      }
    }
  }
  return t;
}

inline Tables run_point(const PointContext& ctx) {
  switch (ctx.cfg.kind) {
    case ExperimentKind::RegimeMap: return run_regime_map(ctx);
    case ExperimentKind::ReconSurface: return run_recon_surface(ctx);
    case ExperimentKind::NoiseSweep: return run_noise_sweep(ctx);
    case ExperimentKind::AdaptF0: return run_adapt_f0(ctx);
    case ExperimentKind::AdaptMethod: return run_adapt_method(ctx);
    case ExperimentKind::SkeletonDemo: return run_skeleton_demo(ctx);
    case ExperimentKind::SingleRun: return run_single(ctx);
  }
  return {};
}

inline std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

inline void write_csv(const std::filesystem::path& path, const Table& t) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << csv_cell(cells[i]);
    os << '\n';
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
}

}  // namespace detail

// Checks that every sweep point yields a valid signal; returns problems as "point N: message".
inline std::vector<std::string> check_points(const ExperimentConfig& cfg) {
  std::vector<std::string> issues;
  for (std::size_t i = 0; i < cfg.point_count(); ++i) {
    const auto p = cfg.point(i);
    try {
      const auto s = detail::point_signal(cfg, p, cfg.seed);
      const double f_max = detail::max_frequency(s, cfg.settings.eps_bessel);
      if (!(cfg.fs > 2.0 * f_max / two_pi)) throw SpecError("sampling: fs > 2 * max frequency violated");
      if (cfg.kind != ExperimentKind::AdaptF0 && !p.contains("f0")) throw ConfigError("missing parameter 'f0'");
    } catch (const Error& e) {
      issues.push_back("point " + std::to_string(i) + ": " + e.what());
    }
  }
  return issues;
}

inline std::string describe(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "experiment: " << to_string(cfg.kind) << " (" << cfg.name << ")\n";
  os << "signal: " << (cfg.signal ? signal_to_json(*cfg.signal).dump() : "family " + cfg.family) << "\n";
  os << "windows:";
  for (auto w : cfg.windows) os << " " << to_string(w);
  os << "\nsampling: fs=" << cfg.fs << " Hz, T=" << cfg.duration << " s, padding=" << to_string(cfg.padding) << "\n";
  os << "fixed parameters:";
  for (const auto& [k, v] : cfg.params) os << " " << k << "=" << fmt_num(v);
  os << "\naxes:";
  if (cfg.axes.empty()) os << " none";
  for (const auto& a : cfg.axes) os << "\n  " << a.name << ": " << a.values.size() << " values [" << fmt_num(a.values.front()) << " .. " << fmt_num(a.values.back()) << "]";
  os << "\npoints: " << cfg.point_count() << ", realizations per point: " << cfg.realizations
     << ", transform evaluations: " << (cfg.kind == ExperimentKind::RegimeMap ? 0 : cfg.point_count() * cfg.windows.size() * cfg.realizations) << "\n";
  return os.str();
}

// Writes the transforms of every sweep point without extraction or scoring.
inline std::vector<std::filesystem::path> dump_tfrs(const ExperimentConfig& cfg, const std::filesystem::path& out) {
  std::vector<std::filesystem::path> files;
  std::filesystem::create_directories(out);
  for (std::size_t i = 0; i < cfg.point_count(); ++i) {
    const detail::PointContext ctx{cfg, i, cfg.point(i), out};
    const SignalSpec s = detail::point_signal(cfg, ctx.p, cfg.seed);
    for (auto kind : cfg.windows) {
      const WindowSpec w(kind, detail::need(ctx.p, "f0"));
      const auto a = detail::analyse(cfg, s, w, detail::point_transforms(cfg, w));
      for (const auto& [tk, tfr] : a.transforms) {
        files.push_back(out / detail::dump_name(i, kind, to_string(tk)));
        write_tfr(tfr, files.back(), detail::provenance(ctx, to_string(tk)));
      }
    }
  }
  return files;
}

struct RunReport {
  std::size_t points = 0;
  std::vector<std::pair<std::size_t, std::string>> failures;
  std::filesystem::path out;
};

// Runs every sweep point on `jobs` workers; tables are written in point order regardless of completion order.
inline RunReport run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out, unsigned jobs = 1, std::ostream* log = nullptr) {
  std::filesystem::create_directories(out);
  const std::size_t n = cfg.point_count();
  std::vector<Tables> results(n);
  std::vector<std::string> errors(n);
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  const auto started = std::chrono::system_clock::now();
  const auto t0 = std::chrono::steady_clock::now();

  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        results[i] = detail::run_point({cfg, i, cfg.point(i), out});
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
      if (log) {
        std::lock_guard lock(log_mutex);
        *log << "[" << (i + 1) << "/" << n << "] " << (errors[i].empty() ? "ok" : "FAILED: " + errors[i]) << "\n";
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (unsigned j = 1; j < std::max(1u, jobs); ++j) pool.emplace_back(worker);
    worker();
  }

  Tables merged;
  RunReport rep{n, {}, out};
  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i].empty()) rep.failures.emplace_back(i, errors[i]);
    for (auto& [name, tab] : results[i]) {
      auto& m = merged[name];
      if (m.header.empty()) m.header = tab.header;
      for (auto& r : tab.rows) m.rows.push_back(std::move(r));
    }
  }
  json tables = json::array();
  for (const auto& [name, tab] : merged) {
    detail::write_csv(out / (name + ".csv"), tab);
    tables.push_back({{"file", name + ".csv"}, {"rows", tab.rows.size()}, {"columns", tab.header}});
  }

  const std::time_t tt = std::chrono::system_clock::to_time_t(started);
  std::ostringstream ts;
  ts << std::put_time(std::gmtime(&tt), "%Y-%m-%dT%H:%M:%SZ");
  json failures = json::array();
  for (const auto& [i, msg] : rep.failures) failures.push_back({{"index", i}, {"params", cfg.point(i)}, {"error", msg}});
  const json manifest{{"tool", "tfrlab"},
                      {"version", version},
                      {"experiment", to_string(cfg.kind)},
                      {"name", cfg.name},
                      {"seed", cfg.seed},
                      {"points", n},
                      {"jobs", jobs},
                      {"config", cfg.raw},
                      {"tables", tables},
                      {"failures", failures},
                      {"started_utc", ts.str()},
                      {"wall_time_s", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}};
  std::ofstream(out / "manifest.json") << manifest.dump(2) << "\n";
  return rep;
}

}  // namespace tfrlab
