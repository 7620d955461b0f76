#include "driftgen/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "driftgen/baselines.hpp"
#include "driftgen/errors.hpp"
#include "driftgen/eval.hpp"
#include "driftgen/rng.hpp"
#include "driftgen/serialize.hpp"
#include "driftgen/trainer.hpp"

namespace driftgen {

namespace {

using Json = nlohmann::json;

// Seed streams 1..4 are claimed by trainer and baseline internals; the data
// stream gets its own lane so no two draws ever collide.
constexpr std::uint64_t kDataSeedStream = 5;

void make_dirs(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << content;
  if (!out) throw IoError("write failed for " + path);
}

std::string jsonl_line(const LossRecord& r) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "{\"phase\":%zu,\"iter\":%zu,\"loss\":%.17g}\n",
                r.phase, r.iter, r.loss);
  return buf;
}

BaselineKind baseline_kind(Method method) {
  switch (method) {
    case Method::kOffline: return BaselineKind::kOffline;
    case Method::kLastDomain: return BaselineKind::kLastDomain;
    case Method::kIncFinetune: return BaselineKind::kIncFinetune;
    case Method::kRecurrent: break;
  }
  throw ConfigError("method has no baseline kind");
}

const char* metric_name(TaskKind task) {
  return task == TaskKind::kClassification ? "err_percent" : "mae";
}

}  // namespace

double sample_mean(std::span<const double> values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double sample_stddev(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  double mean = sample_mean(values);
  double acc = 0.0;
  for (double v : values) acc += (v - mean) * (v - mean);
  return std::sqrt(acc / static_cast<double>(values.size() - 1));
}

double sample_median(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::size_t n = sorted.size();
  if (n % 2 == 1) return sorted[n / 2];
  return 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

std::vector<DomainDataset> experiment_domains(const ExperimentConfig& config,
                                              std::uint64_t seed) {
  return materialize(config.dataset, mix_seed(seed, kDataSeedStream));
}

RunResult run_method(const ExperimentConfig& config, Method method,
                     std::uint64_t seed,
                     std::span<const DomainDataset> domains,
                     const std::string& method_dir) {
  const DatasetSpec& spec = config.dataset;
  if (spec.test_domain >= domains.size()) {
    throw ConfigError("test_domain " + std::to_string(spec.test_domain) +
                      " out of range for " + std::to_string(domains.size()) +
                      " materialized domains");
  }
  std::vector<DomainDataset> train;
  for (std::size_t idx : spec.train_domains) {
    if (idx >= domains.size()) {
      throw ConfigError("train domain " + std::to_string(idx) +
                        " out of range");
    }
    train.push_back(domains[idx]);
  }
  const DomainDataset& test = domains[spec.test_domain];
  const TaskKind task = spec.task();

  make_dirs(method_dir);
  std::string metrics_path = method_dir + "/metrics.jsonl";
  std::ofstream metrics(metrics_path, std::ios::binary);
  if (!metrics) throw IoError("cannot open " + metrics_path + " for writing");
  MetricsSink sink = [&metrics](const LossRecord& r) {
    metrics << jsonl_line(r);
  };

  RunResult result;
  result.method = method;
  result.seed = seed;

  if (method == Method::kRecurrent) {
    if (spec.test_domain != spec.train_domains.back() + 1) {
      throw ConfigError(
          "the recurrent method predicts exactly one step past the last "
          "train domain; test_domain must be train_domains.back() + 1");
    }
    TrainConfig tcfg = config.train;
    tcfg.seed = seed;
    TrainedModel model =
        train_sequence(config.schema, config.generator, tcfg, train, sink);
    ParamVector future = predict_future(model);
    save_checkpoint(model, method_dir + "/model.ckpt");
    save_param_vector(future, method_dir + "/future.pvec");
    result.future_metric =
        evaluate(config.schema, model.prefix.data, future, test, task);
  } else {
    BaselineConfig bcfg = config.baselines;
    bcfg.seed = seed;
    BaselineModel model =
        train_baseline(baseline_kind(method), config.schema, train, bcfg, sink);
    save_param_vector(model.omega, method_dir + "/omega.pvec");
    result.future_metric =
        evaluate(config.schema, model.prefix.data, model.omega, test, task);
  }
  metrics.close();
  if (!metrics) throw IoError("write failed for " + metrics_path);

  Json summary;
  summary["method"] = method_name(method);
  summary["seed"] = seed;
  summary["future_metric"] = result.future_metric;
  summary["metric"] = metric_name(task);
  write_text(method_dir + "/result.json", summary.dump(2) + "\n");
  return result;
}

std::string format_table(const ExperimentConfig& config,
                         const SuiteResult& suite) {
  const TaskKind task = config.dataset.task();
  std::string text = "future-domain ";
  text += task == TaskKind::kClassification ? "misclassification (%)"
                                            : "mean absolute error";
  text += ", " + std::to_string(suite.runs.size() / config.methods.size()) +
          " seeds\n\n";
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-14s %10s %10s %10s %6s\n", "method",
                "mean", "std", "median", "n");
  text += buf;
  for (const MethodStats& s : suite.stats) {
    std::snprintf(buf, sizeof(buf), "%-14s %10.4f %10.4f %10.4f %6zu\n",
                  method_name(s.method), s.mean, s.stddev, s.median,
                  s.values.size());
    text += buf;
  }
  return text;
}

void write_manifest(const ExperimentConfig& config, const std::string& dir) {
  make_dirs(dir);
  Json manifest;
  manifest["version"] = kDriftgenVersion;
  manifest["config_hash"] = config_hash(config);
  manifest["config"] = Json::parse(canonical_json(config));
  write_text(dir + "/manifest.json", manifest.dump(2) + "\n");
}

SuiteResult run_suite(const ExperimentConfig& config,
                      const std::string& override_dir) {
  config.validate();
  const std::string root =
      override_dir.empty() ? config.output_dir : override_dir;
  write_manifest(config, root);

  SuiteResult suite;
  for (std::uint64_t seed : config.seeds) {
    std::vector<DomainDataset> domains = experiment_domains(config, seed);
    for (Method method : config.methods) {
      std::string dir =
          root + "/seed" + std::to_string(seed) + "/" + method_name(method);
      suite.runs.push_back(run_method(config, method, seed, domains, dir));
    }
  }

  for (Method method : config.methods) {
    MethodStats stats;
    stats.method = method;
    for (const RunResult& run : suite.runs) {
      if (run.method == method) stats.values.push_back(run.future_metric);
    }
    stats.mean = sample_mean(stats.values);
    stats.stddev = sample_stddev(stats.values);
    stats.median = sample_median(stats.values);
    suite.stats.push_back(stats);
  }

  Json results;
  results["config_hash"] = config_hash(config);
  results["metric"] = metric_name(config.dataset.task());
  results["seeds"] = config.seeds;
  results["methods"] = Json::array();
  for (const MethodStats& s : suite.stats) {
    Json m;
    m["name"] = method_name(s.method);
    m["mean"] = s.mean;
    m["std"] = s.stddev;
    m["median"] = s.median;
    m["values"] = s.values;
    results["methods"].push_back(m);
  }
  write_text(root + "/results.json", results.dump(2) + "\n");
  write_text(root + "/table.txt", format_table(config, suite));
  return suite;
}

}  // namespace driftgen
