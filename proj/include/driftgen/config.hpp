#ifndef DRIFTGEN_CONFIG_HPP_
#define DRIFTGEN_CONFIG_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "driftgen/baselines.hpp"
#include "driftgen/data.hpp"
#include "driftgen/generator.hpp"
#include "driftgen/net.hpp"
#include "driftgen/trainer.hpp"

namespace driftgen {

enum class Method : std::uint8_t {
  kRecurrent,    // the recurrent parameter generator
  kOffline,      // pooled empirical risk
  kLastDomain,   // final training domain only
  kIncFinetune,  // first domain, then low-rate passes over the rest
};

const char* method_name(Method method);
Method method_from_name(const std::string& name);

// Everything one experiment needs, parsed from a single JSON file. Unknown
// keys are rejected so typos fail loudly instead of silently falling back to
// defaults. generator.target_param_count is always derived from the schema.
struct ExperimentConfig {
  DatasetSpec dataset;
  NetSchema schema;
  GeneratorConfig generator;
  TrainConfig train;
  BaselineConfig baselines;
  std::vector<Method> methods;
  std::vector<std::uint64_t> seeds;
  std::string output_dir = "runs";

  void validate() const;
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

// Fully-populated, key-sorted, whitespace-free dump. Two configs agree on
// every field iff their canonical strings match.
std::string canonical_json(const ExperimentConfig& config);
std::uint32_t config_hash(const ExperimentConfig& config);

}  // namespace driftgen

#endif  // DRIFTGEN_CONFIG_HPP_
