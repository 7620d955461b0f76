#ifndef DRIFTGEN_BASELINES_HPP_
#define DRIFTGEN_BASELINES_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "driftgen/data.hpp"
#include "driftgen/net.hpp"
#include "driftgen/trainer.hpp"

namespace driftgen {

// Direct empirical-risk baselines over the same schema. They differ only in
// which rows they see:
//   kOffline     pools every training domain into one set
//   kLastDomain  trains on the final training domain only
//   kIncFinetune full run on the first domain, then a short lower-rate pass
//                over each later domain in order
enum class BaselineKind : std::uint8_t { kOffline, kLastDomain, kIncFinetune };

struct BaselineConfig {
  double learning_rate = 1e-3;
  std::size_t iters = 2000;
  std::size_t finetune_iters = 400;
  double finetune_lr_factor = 0.1;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

struct BaselineModel {
  NetSchema schema;
  Tensor prefix;      // flat prefix parameters, length may be zero
  ParamVector omega;  // flat generated-suffix slot, here trained directly
  std::vector<std::vector<double>> loss_curves;
};

// All kinds share the same init draw and the same row-shuffle stream, so a
// single training domain makes every kind coincide exactly.
BaselineModel train_baseline(BaselineKind kind, const NetSchema& schema,
                             std::span<const DomainDataset> train_domains,
                             const BaselineConfig& cfg,
                             const MetricsSink& sink = nullptr);

const char* baseline_name(BaselineKind kind);

}  // namespace driftgen

#endif  // DRIFTGEN_BASELINES_HPP_
