// tfrlab: batch runner for time-frequency experiments.
//
//   tfrlab run      --config FILE | --preset NAME [--jobs N] [--out DIR] [--seed N]
//   tfrlab describe --config FILE | --preset NAME
//   tfrlab validate --config FILE | --preset NAME
//   tfrlab dump-tfr --config FILE | --preset NAME [--out DIR]
//
// Exit codes: 0 success, 1 runtime error, 2 configuration error, 3 some sweep points failed.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "tfrlab/experiments.hpp"

namespace {

constexpr int exit_config = 2;
constexpr int exit_partial = 3;

struct Source {
  std::string config;
  std::string preset;
  std::optional<std::uint64_t> seed;
};

std::filesystem::path resolve(const Source& src) {
  if (!src.config.empty()) return src.config;
  if (src.preset.empty()) throw tfrlab::ConfigError("give --config PATH or --preset NAME");
  const std::filesystem::path dir = TFRLAB_PRESET_DIR;
  auto path = dir / (src.preset + ".json");
  if (!std::filesystem::exists(path)) throw tfrlab::ConfigError("unknown preset '" + src.preset + "' (looked in " + dir.string() + ")");
  return path;
}

tfrlab::ExperimentConfig load(const Source& src) {
  auto cfg = tfrlab::load_config(resolve(src));
  if (src.seed) cfg.seed = *src.seed;
  return cfg;
}

std::filesystem::path output_dir(const tfrlab::ExperimentConfig& cfg, const std::string& flag) {
  if (const char* env = std::getenv("TFRLAB_OUT"); env && *env) return env;
  return flag.empty() ? cfg.out : std::filesystem::path(flag);
}

void report(const std::vector<std::string>& issues, std::size_t shown = 20) {
  std::cerr << "invalid configuration:\n";
  for (std::size_t i = 0; i < std::min(shown, issues.size()); ++i) std::cerr << "  " << issues[i] << "\n";
  if (issues.size() > shown) std::cerr << "  ... and " << issues.size() - shown << " more\n";
}

void add_source(CLI::App* cmd, Source& src) {
  auto* c = cmd->add_option("--config", src.config, "experiment config (JSON)");
  auto* p = cmd->add_option("--preset", src.preset, "name of a bundled config");
  c->excludes(p);
  cmd->add_option("--seed", src.seed, "override the base seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-frequency analysis experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tfrlab::version);

  Source src;
  std::string out;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  bool quiet = false;

  auto* run = app.add_subcommand("run", "run every sweep point and write CSV tables and a manifest");
  add_source(run, src);
  run->add_option("--out", out, "output directory (TFRLAB_OUT takes precedence)");
  run->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  run->add_flag("-q,--quiet", quiet, "no per-point progress");

  auto* describe = app.add_subcommand("describe", "print the resolved sweep without running it");
  add_source(describe, src);

  auto* validate = app.add_subcommand("validate", "check the config and every sweep point");
  add_source(validate, src);

  auto* dump = app.add_subcommand("dump-tfr", "write the transforms of every sweep point");
  add_source(dump, src);
  dump->add_option("--out", out, "output directory (TFRLAB_OUT takes precedence)");

  CLI11_PARSE(app, argc, argv);

  try {
    const auto cfg = load(src);
    if (describe->parsed()) {
      std::cout << tfrlab::describe(cfg);
      return 0;
    }
    if (validate->parsed()) {
      const auto issues = tfrlab::check_points(cfg);
      if (!issues.empty()) {
        report(issues);
        return exit_config;
      }
      std::cout << "OK, " << cfg.point_count() << " points\n";
      return 0;
    }
    if (auto issues = tfrlab::check_points(cfg); !issues.empty()) {
      report(issues);
      return exit_config;
    }
    const auto dir = output_dir(cfg, out);
    if (dump->parsed()) {
      for (const auto& f : tfrlab::dump_tfrs(cfg, dir)) std::cout << f.string() << "\n";
      return 0;
    }
    const auto rep = tfrlab::run_experiment(cfg, dir, jobs, quiet ? nullptr : &std::cerr);
    std::cout << rep.points - rep.failures.size() << "/" << rep.points << " points written to " << dir.string() << "\n";
    return rep.failures.empty() ? 0 : exit_partial;
  } catch (const tfrlab::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return exit_config;
  } catch (const tfrlab::SpecError& e) {
    std::cerr << e.what() << "\n";
    return exit_config;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
