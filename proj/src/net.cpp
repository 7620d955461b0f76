#include "driftgen/net.hpp"

#include <cmath>
#include <cstring>
#include <utility>

#include "driftgen/errors.hpp"

namespace driftgen {

void NetSchema::validate() const {
  if (input_dim == 0) throw ConfigError("net schema: input_dim must be >= 1");
  if (layers.empty()) throw ConfigError("net schema: needs at least one layer");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].width == 0) {
      throw ConfigError("net schema: layer " + std::to_string(i) +
                        " has width 0");
    }
  }
  if (generated_suffix_len == 0 || generated_suffix_len > layers.size()) {
    throw ConfigError(
        "net schema: generated_suffix_len must be in [1, num_layers], got " +
        std::to_string(generated_suffix_len));
  }
}

std::size_t NetSchema::layer_input_dim(std::size_t layer) const {
  return layer == 0 ? input_dim : layers[layer - 1].width;
}

namespace {

std::uint32_t fnv1a_mix(std::uint32_t h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= static_cast<std::uint32_t>(v & 0xffu);
    h *= 16777619u;
    v >>= 8;
  }
  return h;
}

std::size_t layer_param_count(const NetSchema& schema, std::size_t layer) {
  const LayerSpec& spec = schema.layers[layer];
  return schema.layer_input_dim(layer) * spec.width +
         (spec.has_bias ? spec.width : 0);
}

std::size_t range_param_count(const NetSchema& schema, std::size_t first,
                              std::size_t last) {
  std::size_t total = 0;
  for (std::size_t i = first; i < last; ++i) total += layer_param_count(schema, i);
  return total;
}

}  // namespace

std::uint32_t schema_hash(const NetSchema& schema) {
  std::uint32_t h = 2166136261u;
  h = fnv1a_mix(h, schema.input_dim);
  h = fnv1a_mix(h, schema.layers.size());
  for (const LayerSpec& l : schema.layers) {
    h = fnv1a_mix(h, l.width);
    h = fnv1a_mix(h, static_cast<std::uint64_t>(l.activation));
    h = fnv1a_mix(h, l.has_bias ? 1 : 0);
  }
  h = fnv1a_mix(h, static_cast<std::uint64_t>(schema.output_activation));
  h = fnv1a_mix(h, schema.generated_suffix_len);
  return h;
}

std::size_t param_count(const NetSchema& schema) {
  schema.validate();
  return range_param_count(schema, schema.first_generated_layer(),
                           schema.layers.size());
}

std::size_t prefix_param_count(const NetSchema& schema) {
  schema.validate();
  return range_param_count(schema, 0, schema.first_generated_layer());
}

ParamVector ParamVector::zeros(const NetSchema& schema) {
  ParamVector pv;
  pv.values.assign(param_count(schema), 0.0);
  pv.owner_schema_hash = schema_hash(schema);
  return pv;
}

ParamVector ParamVector::from_values(const NetSchema& schema,
                                     std::vector<double> values) {
  const std::size_t want = param_count(schema);
  if (values.size() != want) {
    throw ShapeError("param vector: expected length " + std::to_string(want) +
                     ", got " + std::to_string(values.size()));
  }
  ParamVector pv;
  pv.values = std::move(values);
  pv.owner_schema_hash = schema_hash(schema);
  return pv;
}

ParamVector flatten(const NetSchema& schema,
                    std::span<const LayerParams> suffix_layers) {
  schema.validate();
  const std::size_t first = schema.first_generated_layer();
  if (suffix_layers.size() != schema.generated_suffix_len) {
    throw ShapeError("flatten: expected " +
                     std::to_string(schema.generated_suffix_len) +
                     " suffix layers, got " +
                     std::to_string(suffix_layers.size()));
  }
  std::vector<double> out;
  out.reserve(param_count(schema));
  for (std::size_t i = 0; i < suffix_layers.size(); ++i) {
    const std::size_t layer = first + i;
    const LayerSpec& spec = schema.layers[layer];
    const std::size_t in = schema.layer_input_dim(layer);
    const LayerParams& lp = suffix_layers[i];
    if (lp.weight.shape != std::vector<std::size_t>{in, spec.width}) {
      throw ShapeError("flatten: layer " + std::to_string(layer) +
                       " weight shape " + lp.weight.shape_str() +
                       " does not match (" + std::to_string(in) + ", " +
                       std::to_string(spec.width) + ")");
    }
    out.insert(out.end(), lp.weight.data.begin(), lp.weight.data.end());
    if (spec.has_bias) {
      if (lp.bias.shape != std::vector<std::size_t>{spec.width}) {
        throw ShapeError("flatten: layer " + std::to_string(layer) +
                         " bias shape " + lp.bias.shape_str() +
                         " does not match (" + std::to_string(spec.width) +
                         ")");
      }
      out.insert(out.end(), lp.bias.data.begin(), lp.bias.data.end());
    } else if (!lp.bias.data.empty()) {
      throw ShapeError("flatten: layer " + std::to_string(layer) +
                       " has no bias but one was provided");
    }
  }
  return ParamVector::from_values(schema, std::move(out));
}

std::vector<LayerParams> unflatten(const NetSchema& schema,
                                   const ParamVector& params) {
  schema.validate();
  const std::size_t want = param_count(schema);
  if (params.values.size() != want) {
    throw ShapeError("unflatten: expected length " + std::to_string(want) +
                     ", got " + std::to_string(params.values.size()));
  }
  std::vector<LayerParams> out;
  out.reserve(schema.generated_suffix_len);
  std::size_t off = 0;
  for (std::size_t layer = schema.first_generated_layer();
       layer < schema.layers.size(); ++layer) {
    const LayerSpec& spec = schema.layers[layer];
    const std::size_t in = schema.layer_input_dim(layer);
    LayerParams lp;
    lp.weight = Tensor::zeros({in, spec.width});
    std::memcpy(lp.weight.data.data(), params.values.data() + off,
                in * spec.width * sizeof(double));
    off += in * spec.width;
    if (spec.has_bias) {
      lp.bias = Tensor::zeros({spec.width});
      std::memcpy(lp.bias.data.data(), params.values.data() + off,
                  spec.width * sizeof(double));
      off += spec.width;
    }
    out.push_back(std::move(lp));
  }
  return out;
}

namespace {

ad::Var apply_activation(ad::Tape& tape, ad::Var v, Activation act) {
  switch (act) {
    case Activation::kRelu: return tape.relu(v);
    case Activation::kTanh: return tape.tanh(v);
    case Activation::kIdentity: return v;
  }
  throw ShapeError("unknown activation");
}

}  // namespace

ad::Var forward(ad::Tape& tape, const NetSchema& schema, ad::Var omega,
                std::optional<ad::Var> prefix, const Tensor& x) {
  schema.validate();
  if (x.shape.size() != 2 || x.shape[1] != schema.input_dim) {
    throw ShapeError("forward: input must be n x " +
                     std::to_string(schema.input_dim) + ", got " +
                     x.shape_str());
  }
  const std::size_t n = x.shape[0];
  const std::size_t suffix_len = param_count(schema);
  const std::size_t prefix_len = prefix_param_count(schema);
  if (omega.value().data.size() != suffix_len ||
      omega.value().shape.size() != 1) {
    throw ShapeError("forward: omega must be a vector of length " +
                     std::to_string(suffix_len));
  }
  if (prefix_len > 0) {
    if (!prefix.has_value()) {
      throw ShapeError("forward: schema has prefix parameters but none given");
    }
    if (prefix->value().data.size() != prefix_len ||
        prefix->value().shape.size() != 1) {
      throw ShapeError("forward: prefix must be a vector of length " +
                       std::to_string(prefix_len));
    }
  }

  // Column of ones; bias addition is composed as ones * b_row so the same
  // bias reaches every batch row.
  ad::Var ones = tape.input(Tensor::full({n, 1}, 1.0));
  ad::Var cur = tape.input(x);
  const std::size_t first_gen = schema.first_generated_layer();
  std::size_t prefix_off = 0;
  std::size_t suffix_off = 0;
  for (std::size_t layer = 0; layer < schema.layers.size(); ++layer) {
    const LayerSpec& spec = schema.layers[layer];
    const std::size_t in = schema.layer_input_dim(layer);
    const bool generated = layer >= first_gen;
    ad::Var source = generated ? omega : *prefix;
    std::size_t& off = generated ? suffix_off : prefix_off;

    ad::Var w_flat = tape.slice(source, off, off + in * spec.width);
    off += in * spec.width;
    ad::Var w = tape.reshape(w_flat, {in, spec.width});
    cur = tape.matmul(cur, w);
    if (spec.has_bias) {
      ad::Var b_flat = tape.slice(source, off, off + spec.width);
      off += spec.width;
      ad::Var b_row = tape.reshape(b_flat, {1, spec.width});
      cur = tape.add(cur, tape.matmul(ones, b_row));
    }
    cur = apply_activation(tape, cur, spec.activation);
  }
  if (schema.output_activation == OutputActivation::kSigmoid) {
    cur = tape.sigmoid(cur);
  }
  if (schema.layers.back().width == 1) {
    cur = tape.reshape(cur, {n});
  }
  return cur;
}

Tensor forward_eval(const NetSchema& schema, std::span<const double> omega,
                    std::span<const double> prefix, const Tensor& x) {
  schema.validate();
  if (x.shape.size() != 2 || x.shape[1] != schema.input_dim) {
    throw ShapeError("forward_eval: input must be n x " +
                     std::to_string(schema.input_dim) + ", got " +
                     x.shape_str());
  }
  if (omega.size() != param_count(schema)) {
    throw ShapeError("forward_eval: omega length " +
                     std::to_string(omega.size()) + ", expected " +
                     std::to_string(param_count(schema)));
  }
  if (prefix.size() != prefix_param_count(schema)) {
    throw ShapeError("forward_eval: prefix length " +
                     std::to_string(prefix.size()) + ", expected " +
                     std::to_string(prefix_param_count(schema)));
  }
  const std::size_t n = x.shape[0];
  const std::size_t first_gen = schema.first_generated_layer();
  Tensor cur = x;
  std::size_t prefix_off = 0;
  std::size_t suffix_off = 0;
  for (std::size_t layer = 0; layer < schema.layers.size(); ++layer) {
    const LayerSpec& spec = schema.layers[layer];
    const std::size_t in = schema.layer_input_dim(layer);
    const bool generated = layer >= first_gen;
    std::span<const double> source = generated ? omega : prefix;
    std::size_t& off = generated ? suffix_off : prefix_off;

    const double* w = source.data() + off;
    off += in * spec.width;
    const double* b = nullptr;
    if (spec.has_bias) {
      b = source.data() + off;
      off += spec.width;
    }
    Tensor next = Tensor::zeros({n, spec.width});
    for (std::size_t r = 0; r < n; ++r) {
      double* out_row = next.data.data() + r * spec.width;
      if (b != nullptr) {
        std::memcpy(out_row, b, spec.width * sizeof(double));
      }
      const double* in_row = cur.data.data() + r * in;
      for (std::size_t k = 0; k < in; ++k) {
        const double v = in_row[k];
        if (v == 0.0) continue;
        const double* w_row = w + k * spec.width;
        for (std::size_t c = 0; c < spec.width; ++c) out_row[c] += v * w_row[c];
      }
    }
    switch (spec.activation) {
      case Activation::kRelu:
        for (double& v : next.data) v = v > 0.0 ? v : 0.0;
        break;
      case Activation::kTanh:
        for (double& v : next.data) v = std::tanh(v);
        break;
      case Activation::kIdentity:
        break;
    }
    cur = std::move(next);
  }
  if (schema.output_activation == OutputActivation::kSigmoid) {
    for (double& v : cur.data) v = 1.0 / (1.0 + std::exp(-v));
  }
  if (schema.layers.back().width == 1) cur.shape = {n};
  return cur;
}

}  // namespace driftgen
