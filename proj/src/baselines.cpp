#include "driftgen/baselines.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "driftgen/adam.hpp"
#include "driftgen/errors.hpp"
#include "driftgen/rng.hpp"
#include "driftgen/tape.hpp"

namespace driftgen {

void BaselineConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("baseline: learning_rate must be positive and finite");
  }
  if (iters == 0) throw ConfigError("baseline: iters must be >= 1");
  if (finetune_iters == 0) {
    throw ConfigError("baseline: finetune_iters must be >= 1");
  }
  if (!(finetune_lr_factor > 0.0)) {
    throw ConfigError("baseline: finetune_lr_factor must be positive");
  }
}

const char* baseline_name(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::kOffline: return "offline";
    case BaselineKind::kLastDomain: return "last_domain";
    case BaselineKind::kIncFinetune: return "inc_finetune";
  }
  return "unknown";
}

namespace {

DomainDataset pool_domains(std::span<const DomainDataset> domains) {
  std::size_t total = 0;
  const std::size_t d = domains.front().feature_dim();
  for (const auto& ds : domains) {
    if (ds.feature_dim() != d) {
      throw ShapeError("baseline: feature dims differ across domains");
    }
    total += ds.size();
  }
  DomainDataset out;
  out.features = Tensor::zeros({total, d});
  out.labels = Tensor::zeros({total});
  out.task = domains.front().task;
  out.domain_index = domains.back().domain_index;
  std::size_t row = 0;
  for (const auto& ds : domains) {
    for (std::size_t r = 0; r < ds.size(); ++r, ++row) {
      for (std::size_t k = 0; k < d; ++k) {
        out.features.data[row * d + k] = ds.features.data[r * d + k];
      }
      out.labels.data[row] = ds.labels.data[r];
    }
  }
  return out;
}

void shuffle_rows(DomainDataset& ds, Rng& rng) {
  const std::size_t n = ds.size();
  const std::size_t d = ds.feature_dim();
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j =
        static_cast<std::size_t>(rng.uniform() * static_cast<double>(i));
    const std::size_t k = j < i ? j : i - 1;
    for (std::size_t c = 0; c < d; ++c) {
      std::swap(ds.features.data[(i - 1) * d + c], ds.features.data[k * d + c]);
    }
    std::swap(ds.labels.data[i - 1], ds.labels.data[k]);
  }
}

struct FlatNet {
  Tensor prefix;
  Tensor omega;
};

FlatNet init_flat_net(const NetSchema& schema, std::uint64_t seed) {
  // One continuous draw over all layers, bounds per layer fan-in; the split
  // into prefix and suffix follows the schema's flat layout.
  Rng rng(seed);
  FlatNet net;
  net.prefix = Tensor::zeros({prefix_param_count(schema)});
  net.omega = Tensor::zeros({param_count(schema)});
  std::size_t pre_off = 0;
  std::size_t suf_off = 0;
  for (std::size_t layer = 0; layer < schema.layers.size(); ++layer) {
    const std::size_t in = schema.layer_input_dim(layer);
    const LayerSpec& spec = schema.layers[layer];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    const std::size_t count =
        in * spec.width + (spec.has_bias ? spec.width : 0);
    const bool generated = layer >= schema.first_generated_layer();
    Tensor& target = generated ? net.omega : net.prefix;
    std::size_t& off = generated ? suf_off : pre_off;
    for (std::size_t k = 0; k < count; ++k) {
      target.data[off++] = rng.uniform(-bound, bound);
    }
  }
  return net;
}

void run_epochs(FlatNet& net, const NetSchema& schema,
                const DomainDataset& data, Adam& adam, std::size_t iters,
                std::size_t phase, const MetricsSink& sink,
                std::vector<double>* curve) {
  const bool has_prefix = net.prefix.data.size() > 0;
  std::vector<Tensor*> params;
  params.push_back(&net.omega);
  if (has_prefix) params.push_back(&net.prefix);
  for (std::size_t iter = 0; iter < iters; ++iter) {
    ad::Tape tape;
    ad::Var omega = tape.input(net.omega);
    std::optional<ad::Var> prefix;
    if (has_prefix) prefix = tape.input(net.prefix);
    ad::Var pred = forward(tape, schema, omega, prefix, data.features);
    ad::Var loss = data.task == TaskKind::kClassification
                       ? tape.loss_bce(pred, data.labels)
                       : tape.loss_mse(pred, data.labels);
    const double loss_value = loss.value().data[0];
    if (!std::isfinite(loss_value)) {
      throw NumericError("baseline: loss diverged at phase " +
                         std::to_string(phase) + " iteration " +
                         std::to_string(iter) + ", value " +
                         std::to_string(loss_value));
    }
    if (sink) sink({phase, iter, loss_value});
    if (curve) curve->push_back(loss_value);
    ad::GradientMap gm = tape.backward(loss);
    std::vector<const Tensor*> grads;
    grads.push_back(&gm.grad(omega));
    if (has_prefix) grads.push_back(&gm.grad(*prefix));
    adam.step(params, grads);
  }
}

}  // namespace

BaselineModel train_baseline(BaselineKind kind, const NetSchema& schema,
                             std::span<const DomainDataset> train_domains,
                             const BaselineConfig& cfg,
                             const MetricsSink& sink) {
  schema.validate();
  cfg.validate();
  if (train_domains.empty()) {
    throw ConfigError("baseline: no training domains given");
  }
  for (const auto& ds : train_domains) {
    ds.validate();
    if (ds.feature_dim() != schema.input_dim) {
      throw ShapeError("baseline: dataset feature dim " +
                       std::to_string(ds.feature_dim()) +
                       " does not match schema input dim " +
                       std::to_string(schema.input_dim));
    }
  }

  FlatNet net = init_flat_net(schema, mix_seed(cfg.seed, 3));
  Rng shuffle_rng(mix_seed(cfg.seed, 4));
  Adam adam(AdamConfig{cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon});

  BaselineModel model;
  model.schema = schema;

  switch (kind) {
    case BaselineKind::kOffline: {
      DomainDataset pooled = pool_domains(train_domains);
      shuffle_rows(pooled, shuffle_rng);
      std::vector<double> curve;
      run_epochs(net, schema, pooled, adam, cfg.iters, 0, sink, &curve);
      model.loss_curves.push_back(std::move(curve));
      break;
    }
    case BaselineKind::kLastDomain: {
      DomainDataset last = train_domains.back();
      shuffle_rows(last, shuffle_rng);
      std::vector<double> curve;
      run_epochs(net, schema, last, adam, cfg.iters, 0, sink, &curve);
      model.loss_curves.push_back(std::move(curve));
      break;
    }
    case BaselineKind::kIncFinetune: {
      for (std::size_t s = 0; s < train_domains.size(); ++s) {
        DomainDataset ds = train_domains[s];
        shuffle_rows(ds, shuffle_rng);
        if (s == 1) {
          adam.set_learning_rate(cfg.learning_rate * cfg.finetune_lr_factor);
        }
        std::vector<double> curve;
        run_epochs(net, schema, ds, adam, s == 0 ? cfg.iters : cfg.finetune_iters,
                   s, sink, &curve);
        model.loss_curves.push_back(std::move(curve));
      }
      break;
    }
  }
  model.prefix = std::move(net.prefix);
  model.omega = ParamVector::from_values(
      schema, std::vector<double>(net.omega.data));
  return model;
}

}  // namespace driftgen
