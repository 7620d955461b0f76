#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "driftgen/config.hpp"
#include "driftgen/data.hpp"
#include "driftgen/errors.hpp"
#include "driftgen/eval.hpp"
#include "driftgen/experiment.hpp"
#include "driftgen/serialize.hpp"
#include "driftgen/trainer.hpp"

namespace {

using namespace driftgen;

// Output root precedence: --out flag, then DRIFTGEN_OUT, then the config.
std::string resolve_root(const std::string& flag_out,
                         const ExperimentConfig& cfg) {
  if (!flag_out.empty()) return flag_out;
  if (const char* env = std::getenv("DRIFTGEN_OUT"); env && *env) return env;
  return cfg.output_dir;
}

std::uint64_t resolve_seed(bool seed_given, std::uint64_t seed,
                           const ExperimentConfig& cfg) {
  return seed_given ? seed : cfg.seeds.front();
}

void cmd_gen_data(const std::string& config_path, const std::string& out_flag,
                  bool seed_given, std::uint64_t seed_flag, bool force) {
  ExperimentConfig cfg = load_config(config_path);
  std::uint64_t seed = resolve_seed(seed_given, seed_flag, cfg);
  std::string dir = resolve_root(out_flag, cfg) + "/data/seed" +
                    std::to_string(seed);
  std::vector<DomainDataset> domains = experiment_domains(cfg, seed);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
  for (const DomainDataset& d : domains) {
    std::string path = dir + "/domain" + std::to_string(d.domain_index) +
                       ".csv";
    if (!force && std::filesystem::exists(path)) {
      throw IoError(path + " already exists; pass --force to overwrite");
    }
    write_csv(path, d);
  }
  std::printf("wrote %zu domain files to %s\n", domains.size(), dir.c_str());
}

void cmd_train(const std::string& config_path, const std::string& out_flag,
               bool seed_given, std::uint64_t seed_flag) {
  ExperimentConfig cfg = load_config(config_path);
  std::uint64_t seed = resolve_seed(seed_given, seed_flag, cfg);
  std::string root = resolve_root(out_flag, cfg);
  write_manifest(cfg, root);
  std::vector<DomainDataset> domains = experiment_domains(cfg, seed);
  for (Method method : cfg.methods) {
    std::string dir = root + "/seed" + std::to_string(seed) + "/" +
                      method_name(method);
    RunResult res = run_method(cfg, method, seed, domains, dir);
    std::printf("%-14s %s %.6f\n", method_name(method),
                cfg.dataset.task() == TaskKind::kClassification ? "err%"
                                                                : "mae",
                res.future_metric);
  }
}

void cmd_suite(const std::string& config_path, const std::string& out_flag) {
  ExperimentConfig cfg = load_config(config_path);
  std::string root = resolve_root(out_flag, cfg);
  SuiteResult suite = run_suite(cfg, root);
  std::fputs(format_table(cfg, suite).c_str(), stdout);
  std::printf("\nartifacts in %s\n", root.c_str());
}

void cmd_boundary(const std::string& config_path,
                  const std::string& checkpoint_path, std::size_t domain,
                  bool seed_given, std::uint64_t seed_flag,
                  const std::string& out_path, int resolution, bool no_points) {
  ExperimentConfig cfg = load_config(config_path);
  std::uint64_t seed = resolve_seed(seed_given, seed_flag, cfg);
  TrainedModel model = load_checkpoint(checkpoint_path);
  std::vector<DomainDataset> domains = experiment_domains(cfg, seed);
  if (domain >= domains.size()) {
    throw ConfigError("domain " + std::to_string(domain) +
                      " out of range for " + std::to_string(domains.size()) +
                      " domains");
  }

  ParamVector omega;
  const auto& train_idx = cfg.dataset.train_domains;
  auto it = std::find(train_idx.begin(), train_idx.end(), domain);
  if (it != train_idx.end()) {
    std::size_t pos = static_cast<std::size_t>(it - train_idx.begin());
    if (pos >= model.omega_sequence.size()) {
      throw ConfigError("checkpoint holds " +
                        std::to_string(model.omega_sequence.size()) +
                        " trained domains, cannot render train position " +
                        std::to_string(pos));
    }
    omega = model.omega_sequence[pos];
  } else if (domain == cfg.dataset.test_domain) {
    omega = predict_future(model);
  } else {
    throw ConfigError("domain " + std::to_string(domain) +
                      " is neither a train domain nor the test domain");
  }

  RenderSpec spec;
  spec.grid_resolution = resolution;
  spec.draw_points = !no_points;
  render_boundary(model.schema, model.prefix.data, omega, domains[domain],
                  spec, out_path);
  std::printf("wrote %s\n", out_path.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"temporal-drift experiments: a recurrent parameter generator "
               "against time-oblivious baselines"};
  app.require_subcommand(1);

  std::string config_path, out_flag, checkpoint_path, out_path;
  std::uint64_t seed_flag = 0;
  bool force = false, no_points = false;
  std::size_t domain = 0;
  int resolution = 200;

  CLI::App* gen = app.add_subcommand(
      "gen-data", "materialize every domain of the dataset as CSV");
  gen->add_option("--config", config_path, "experiment config (JSON)")
      ->required();
  gen->add_option("--out", out_flag, "output root (overrides config and env)");
  CLI::Option* gen_seed = gen->add_option("--seed", seed_flag, "data seed");
  gen->add_flag("--force", force, "overwrite existing files");

  CLI::App* train = app.add_subcommand(
      "train", "train every configured method for one seed");
  train->add_option("--config", config_path, "experiment config (JSON)")
      ->required();
  train->add_option("--out", out_flag, "output root");
  CLI::Option* train_seed = train->add_option("--seed", seed_flag, "run seed");

  CLI::App* suite = app.add_subcommand(
      "suite", "run all seeds x methods and aggregate a results table");
  suite->add_option("--config", config_path, "experiment config (JSON)")
      ->required();
  suite->add_option("--out", out_flag, "output root");

  CLI::App* boundary = app.add_subcommand(
      "boundary", "render a decision-boundary raster from a checkpoint");
  boundary->add_option("--config", config_path, "experiment config (JSON)")
      ->required();
  boundary->add_option("--checkpoint", checkpoint_path, "model checkpoint")
      ->required();
  boundary->add_option("--domain", domain, "domain index to render")
      ->required();
  boundary->add_option("--out", out_path, "output PPM path")->required();
  boundary->add_option("--resolution", resolution, "grid resolution");
  CLI::Option* boundary_seed =
      boundary->add_option("--seed", seed_flag, "data seed");
  boundary->add_flag("--no-points", no_points, "skip the data-point overlay");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) {
      cmd_gen_data(config_path, out_flag, !gen_seed->empty(), seed_flag,
                   force);
    } else if (train->parsed()) {
      cmd_train(config_path, out_flag, !train_seed->empty(), seed_flag);
    } else if (suite->parsed()) {
      cmd_suite(config_path, out_flag);
    } else if (boundary->parsed()) {
      cmd_boundary(config_path, checkpoint_path, domain,
                   !boundary_seed->empty(), seed_flag, out_path, resolution,
                   no_points);
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
