#ifndef DRIFTGEN_TRAINER_HPP_
#define DRIFTGEN_TRAINER_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "driftgen/adam.hpp"
#include "driftgen/data.hpp"
#include "driftgen/generator.hpp"
#include "driftgen/net.hpp"

namespace driftgen {

struct TrainConfig {
  double learning_rate = 1e-4;
  std::size_t iters_per_domain = 300;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
  AdamConfig adam() const {
    return {learning_rate, beta1, beta2, epsilon};
  }
};

struct LossRecord {
  std::size_t phase = 0;
  std::size_t iter = 0;
  double loss = 0.0;
};
using MetricsSink = std::function<void(const LossRecord&)>;

struct DomainAccess {
  std::size_t phase;
  std::size_t domain_index;
};

struct TrainedModel {
  NetSchema schema;
  GeneratorConfig generator;
  TrainConfig train;
  GeneratorState state;
  Tensor prefix;  // flat prefix parameters, length may be zero
  std::vector<ParamVector> omega_sequence;  // realized vector per phase
  std::vector<std::vector<double>> loss_curves;
};

// One phase: every iteration rebuilds the generation chain and the
// prediction loss on a fresh tape with the previous realized state entering
// as constants, then takes one optimizer step on all reached parameters.
// Afterwards a no-grad pass realizes omega for this domain, advances the
// recurrent memory, and commits both. Returns the realized vector.
ParamVector train_on_domain(GeneratorState& state, Tensor& prefix,
                            const NetSchema& schema, const DomainDataset& data,
                            const TrainConfig& cfg, Adam& adam,
                            std::size_t phase, const MetricsSink& sink,
                            std::vector<double>* loss_curve);

// Walks the domains in the order given, one phase each, with a single
// optimizer shared across phases.
TrainedModel train_sequence(const NetSchema& schema,
                            const GeneratorConfig& gen_cfg,
                            const TrainConfig& cfg,
                            std::span<const DomainDataset> train_domains,
                            const MetricsSink& sink = nullptr,
                            std::vector<DomainAccess>* access_log = nullptr);

// Rolls the recurrence one step past the last trained domain and returns
// the parameter vector for the unseen next domain. Pure: the model is not
// modified and repeated calls give the same answer.
ParamVector predict_future(const TrainedModel& model);

}  // namespace driftgen

#endif  // DRIFTGEN_TRAINER_HPP_
