#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "driftgen/config.hpp"
#include "driftgen/errors.hpp"
#include "driftgen/experiment.hpp"

using namespace driftgen;

namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "driftgen_experiment_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ExperimentConfig tiny_config() {
  return parse_config(R"({
    "dataset": {"source": "moons", "num_domains": 4, "n_per_domain": 30,
                "step_degrees": 18.0, "noise_sigma": 0.1,
                "train_domains": [0, 1, 2], "test_domain": 3},
    "schema": {"input_dim": 2,
               "layers": [{"width": 8, "activation": "relu"},
                           {"width": 1, "activation": "identity"}],
               "output": "sigmoid"},
    "generator": {"latent_dim": 6, "lstm_depth": 2, "enc_hidden": 8,
                  "dec_hidden": 8, "g0_hidden": 8, "lambda": 0.1, "tau": 2},
    "train": {"learning_rate": 5e-3, "iters_per_domain": 50},
    "baselines": {"learning_rate": 5e-3, "iters": 120, "finetune_iters": 30},
    "seeds": [1, 2],
    "output_dir": "unused"
  })");
}

}  // namespace

TEST_CASE("sample statistics use the n-1 denominator") {
  std::vector<double> v = {2, 4, 4, 4, 5, 5, 7, 9};
  CHECK(sample_mean(v) == doctest::Approx(5.0));
  CHECK(sample_stddev(v) == doctest::Approx(std::sqrt(32.0 / 7.0)));
  CHECK(sample_median(v) == doctest::Approx(4.5));

  std::vector<double> odd = {3, 1, 2};
  CHECK(sample_median(odd) == doctest::Approx(2.0));
  std::vector<double> one = {42.0};
  CHECK(sample_stddev(one) == 0.0);
  CHECK(sample_mean(one) == 42.0);
}

TEST_CASE("domain streams depend on the seed but not the method") {
  ExperimentConfig cfg = tiny_config();
  auto a = experiment_domains(cfg, 1);
  auto b = experiment_domains(cfg, 1);
  auto c = experiment_domains(cfg, 2);
  REQUIRE(a.size() == 4);
  CHECK(a[0].features.data == b[0].features.data);
  CHECK(a[3].labels.data == b[3].labels.data);
  CHECK(a[0].features.data != c[0].features.data);
}

TEST_CASE("run_method writes artifacts and scores the future domain") {
  ExperimentConfig cfg = tiny_config();
  fs::path dir = scratch("one_method");
  auto domains = experiment_domains(cfg, 1);
  RunResult res = run_method(cfg, Method::kRecurrent, 1, domains,
                             (dir / "recurrent").string());
  CHECK(res.method == Method::kRecurrent);
  CHECK(res.seed == 1);
  CHECK(res.future_metric >= 0.0);
  CHECK(res.future_metric <= 100.0);
  CHECK(fs::exists(dir / "recurrent/model.ckpt"));
  CHECK(fs::exists(dir / "recurrent/future.pvec"));
  CHECK(fs::exists(dir / "recurrent/metrics.jsonl"));
  CHECK(fs::exists(dir / "recurrent/result.json"));

  // 3 phases x 50 iterations, one JSON line each.
  std::ifstream metrics(dir / "recurrent/metrics.jsonl");
  std::size_t lines = 0;
  std::string line;
  while (std::getline(metrics, line)) ++lines;
  CHECK(lines == 150);

  RunResult off = run_method(cfg, Method::kOffline, 1, domains,
                             (dir / "offline").string());
  CHECK(fs::exists(dir / "offline/omega.pvec"));
  CHECK(off.future_metric >= 0.0);
}

TEST_CASE("the recurrent method insists on one-step-ahead evaluation") {
  ExperimentConfig cfg = tiny_config();
  cfg.dataset.train_domains = {0, 1};  // leaves a gap before domain 3
  auto domains = experiment_domains(cfg, 1);
  fs::path dir = scratch("gap");
  CHECK_THROWS_WITH_AS(run_method(cfg, Method::kRecurrent, 1, domains,
                                  (dir / "recurrent").string()),
                       doctest::Contains("one step"), ConfigError);
  // Baselines have no such restriction.
  CHECK_NOTHROW(run_method(cfg, Method::kLastDomain, 1, domains,
                           (dir / "last").string()));
}

TEST_CASE("a suite aggregates every method over every seed") {
  ExperimentConfig cfg = tiny_config();
  fs::path dir = scratch("suite");
  SuiteResult suite = run_suite(cfg, dir.string());
  CHECK(suite.runs.size() == 2 * 4);
  REQUIRE(suite.stats.size() == 4);
  for (const MethodStats& s : suite.stats) {
    REQUIRE(s.values.size() == 2);
    CHECK(s.mean == doctest::Approx(0.5 * (s.values[0] + s.values[1])));
    CHECK(s.median == doctest::Approx(s.mean));
  }
  CHECK(fs::exists(dir / "manifest.json"));
  CHECK(fs::exists(dir / "results.json"));
  CHECK(fs::exists(dir / "table.txt"));

  std::string table = format_table(cfg, suite);
  CHECK(table.find("misclassification") != std::string::npos);
  CHECK(table.find("recurrent") != std::string::npos);
  CHECK(table.find("median") != std::string::npos);

  // The manifest pins the config hash it was produced from.
  std::ifstream manifest(dir / "manifest.json");
  std::string text(std::istreambuf_iterator<char>(manifest),
                   std::istreambuf_iterator<char>{});
  CHECK(text.find(std::to_string(config_hash(cfg))) != std::string::npos);
}
