#ifndef DRIFTGEN_EXPERIMENT_HPP_
#define DRIFTGEN_EXPERIMENT_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "driftgen/config.hpp"
#include "driftgen/data.hpp"

namespace driftgen {

inline constexpr const char* kDriftgenVersion = "0.1.0";

struct RunResult {
  Method method = Method::kRecurrent;
  std::uint64_t seed = 0;
  double future_metric = 0.0;  // err% or MAE on the held-out domain
};

// Sample statistics over the per-seed metrics of one method.
struct MethodStats {
  Method method = Method::kRecurrent;
  double mean = 0.0;
  double stddev = 0.0;  // n-1 denominator, 0 for a single value
  double median = 0.0;
  std::vector<double> values;  // in seed order
};

struct SuiteResult {
  std::vector<RunResult> runs;
  std::vector<MethodStats> stats;  // in config method order
};

double sample_mean(std::span<const double> values);
double sample_stddev(std::span<const double> values);
double sample_median(std::span<const double> values);

// The full domain stream for one experiment seed. Synthetic sources draw
// from a stream derived from the seed; CSV sources ignore it.
std::vector<DomainDataset> experiment_domains(const ExperimentConfig& config,
                                              std::uint64_t seed);

// Trains one method on the experiment's train split and scores the held-out
// domain. Writes metrics.jsonl, result.json, and the trained parameters
// (checkpoint plus future .pvec for the recurrent method, .pvec only for
// baselines) into method_dir. Rerunning reproduces every byte.
RunResult run_method(const ExperimentConfig& config, Method method,
                     std::uint64_t seed,
                     std::span<const DomainDataset> domains,
                     const std::string& method_dir);

// Reproduction record: tool version, config hash, full canonical config.
void write_manifest(const ExperimentConfig& config, const std::string& dir);

// All seeds x all methods under config.output_dir (or override_dir when
// nonempty): per-run artifacts in seed<seed>/<method>/, plus manifest.json,
// results.json, and an aligned table.txt at the root.
SuiteResult run_suite(const ExperimentConfig& config,
                      const std::string& override_dir = "");

std::string format_table(const ExperimentConfig& config,
                         const SuiteResult& suite);

}  // namespace driftgen

#endif  // DRIFTGEN_EXPERIMENT_HPP_
