#include "driftgen/trainer.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "driftgen/errors.hpp"
#include "driftgen/rng.hpp"

namespace driftgen {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("train: learning_rate must be positive and finite");
  }
  if (iters_per_domain == 0) {
    throw ConfigError("train: iters_per_domain must be >= 1");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("train: betas must lie in [0, 1)");
  }
}

namespace {

ad::Var prediction_loss(ad::Tape& tape, ad::Var pred,
                        const DomainDataset& data) {
  if (data.task == TaskKind::kClassification) {
    return tape.loss_bce(pred, data.labels);
  }
  return tape.loss_mse(pred, data.labels);
}

void check_dataset(const NetSchema& schema, const DomainDataset& data) {
  data.validate();
  if (data.feature_dim() != schema.input_dim) {
    throw ShapeError("train: dataset feature dim " +
                     std::to_string(data.feature_dim()) +
                     " does not match schema input dim " +
                     std::to_string(schema.input_dim));
  }
}

// Uniform +-1/sqrt(fan_in) per layer, matching the generator's own init.
Tensor init_prefix(const NetSchema& schema, std::uint64_t seed) {
  const std::size_t len = prefix_param_count(schema);
  Tensor prefix = Tensor::zeros({len});
  Rng rng(seed);
  std::size_t off = 0;
  for (std::size_t layer = 0; layer < schema.first_generated_layer();
       ++layer) {
    const std::size_t in = schema.layer_input_dim(layer);
    const LayerSpec& spec = schema.layers[layer];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    const std::size_t count =
        in * spec.width + (spec.has_bias ? spec.width : 0);
    for (std::size_t k = 0; k < count; ++k) {
      prefix.data[off++] = rng.uniform(-bound, bound);
    }
  }
  return prefix;
}

// Realizes omega for the current phase from plain values and advances the
// memory in place. Assumes training for the phase has finished.
ParamVector realize_and_commit(GeneratorState& state, const NetSchema& schema) {
  Tensor a;
  if (state.step_index == 0) {
    refresh_initial_memory(state);
    a = Tensor::zeros({state.config.latent_dim});
  } else {
    a = encode_value(state, *state.last_omega);
  }
  Tensor top = step_value(state, a);
  ParamVector raw = decode_value(state, schema, top);
  std::vector<ParamVector> hist(state.history.begin(), state.history.end());
  ParamVector omega =
      skip_combine(raw, hist, state.config.lambda, state.config.tau);
  commit_step(state, omega, MemoryState(state.memory));
  return omega;
}

}  // namespace

ParamVector train_on_domain(GeneratorState& state, Tensor& prefix,
                            const NetSchema& schema, const DomainDataset& data,
                            const TrainConfig& cfg, Adam& adam,
                            std::size_t phase, const MetricsSink& sink,
                            std::vector<double>* loss_curve) {
  cfg.validate();
  check_dataset(schema, data);
  const bool has_prefix = prefix.data.size() > 0;

  std::vector<Tensor*> params = trainable_tensors(state);
  if (has_prefix) params.push_back(&prefix);

  for (std::size_t iter = 0; iter < cfg.iters_per_domain; ++iter) {
    ad::Tape tape;
    GeneratorVars vars = stage(tape, state);
    Generated gen = generate_next(tape, state, vars);
    std::optional<ad::Var> prefix_var;
    if (has_prefix) prefix_var = tape.input(prefix);
    ad::Var pred = forward(tape, schema, gen.omega, prefix_var, data.features);
    ad::Var loss = prediction_loss(tape, pred, data);
    const double loss_value = loss.value().data[0];
    if (!std::isfinite(loss_value)) {
      throw NumericError("train: loss diverged at phase " +
                         std::to_string(phase) + " iteration " +
                         std::to_string(iter) + ", value " +
                         std::to_string(loss_value));
    }
    if (sink) sink({phase, iter, loss_value});
    if (loss_curve) loss_curve->push_back(loss_value);

    ad::GradientMap gm = tape.backward(loss);
    std::vector<const Tensor*> grads;
    grads.reserve(params.size());
    for (std::size_t i = 0; i < vars.flat.size(); ++i) {
      grads.push_back(gm.reached(vars.flat[i]) ? &gm.grad(vars.flat[i])
                                               : nullptr);
    }
    if (has_prefix) {
      grads.push_back(gm.reached(*prefix_var) ? &gm.grad(*prefix_var)
                                              : nullptr);
    }
    adam.step(params, grads);
  }
  return realize_and_commit(state, schema);
}

TrainedModel train_sequence(const NetSchema& schema,
                            const GeneratorConfig& gen_cfg,
                            const TrainConfig& cfg,
                            std::span<const DomainDataset> train_domains,
                            const MetricsSink& sink,
                            std::vector<DomainAccess>* access_log) {
  schema.validate();
  gen_cfg.validate();
  cfg.validate();
  if (train_domains.empty()) {
    throw ConfigError("train: no training domains given");
  }
  if (gen_cfg.target_param_count != param_count(schema)) {
    throw ConfigError("train: generator target_param_count " +
                      std::to_string(gen_cfg.target_param_count) +
                      " does not match schema suffix size " +
                      std::to_string(param_count(schema)));
  }

  TrainedModel model;
  model.schema = schema;
  model.generator = gen_cfg;
  model.train = cfg;
  model.state = init_state(gen_cfg, mix_seed(cfg.seed, 1));
  model.prefix = init_prefix(schema, mix_seed(cfg.seed, 2));

  Adam adam(cfg.adam());
  for (std::size_t s = 0; s < train_domains.size(); ++s) {
    const DomainDataset& data = train_domains[s];
    if (access_log) access_log->push_back({s, data.domain_index});
    std::vector<double> curve;
    ParamVector omega = train_on_domain(model.state, model.prefix, schema,
                                        data, cfg, adam, s, sink, &curve);
    model.omega_sequence.push_back(std::move(omega));
    model.loss_curves.push_back(std::move(curve));
  }
  return model;
}

ParamVector predict_future(const TrainedModel& model) {
  if (model.state.step_index == 0 || !model.state.last_omega.has_value()) {
    throw ConfigError("predict: model has no trained domains");
  }
  GeneratorState scratch = model.state;
  Tensor a = encode_value(scratch, *scratch.last_omega);
  Tensor top = step_value(scratch, a);
  ParamVector raw = decode_value(scratch, model.schema, top);
  std::vector<ParamVector> hist(scratch.history.begin(),
                                scratch.history.end());
  return skip_combine(raw, hist, scratch.config.lambda, scratch.config.tau);
}

}  // namespace driftgen
