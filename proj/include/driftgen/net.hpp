#ifndef DRIFTGEN_NET_HPP_
#define DRIFTGEN_NET_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "driftgen/tape.hpp"
#include "driftgen/tensor.hpp"

namespace driftgen {

enum class Activation : std::uint8_t { kRelu, kTanh, kIdentity };
enum class OutputActivation : std::uint8_t { kSigmoid, kIdentity };

struct LayerSpec {
  std::size_t width = 1;
  Activation activation = Activation::kIdentity;
  bool has_bias = true;
};

// Fixed topology of the predictive network. The parameters are split into a
// trainable prefix and a generated suffix: the trailing generated_suffix_len
// layers receive their weights from the parameter generator, everything
// before them is trained directly.
struct NetSchema {
  std::size_t input_dim = 1;
  std::vector<LayerSpec> layers;  // includes the output layer
  OutputActivation output_activation = OutputActivation::kIdentity;
  std::size_t generated_suffix_len = 1;

  void validate() const;
  std::size_t layer_input_dim(std::size_t layer) const;
  std::size_t first_generated_layer() const {
    return layers.size() - generated_suffix_len;
  }
};

std::uint32_t schema_hash(const NetSchema& schema);

// Number of generated-suffix parameters (weights plus biases).
std::size_t param_count(const NetSchema& schema);
// Number of parameters in the non-generated prefix layers.
std::size_t prefix_param_count(const NetSchema& schema);

// Flat parameter state of the generated suffix at one timestamp. Layout is
// fixed: per layer, weight matrix row-major (row = input index) then bias,
// layers in forward order.
struct ParamVector {
  std::vector<double> values;
  std::uint32_t owner_schema_hash = 0;

  static ParamVector zeros(const NetSchema& schema);
  static ParamVector from_values(const NetSchema& schema,
                                 std::vector<double> values);
};

struct LayerParams {
  Tensor weight;  // in x out
  Tensor bias;    // out, empty when the layer has no bias
};

ParamVector flatten(const NetSchema& schema,
                    std::span<const LayerParams> suffix_layers);
std::vector<LayerParams> unflatten(const NetSchema& schema,
                                   const ParamVector& params);

// Differentiable batch forward. x is n x input_dim; omega holds the flat
// generated-suffix parameters and prefix the flat prefix parameters (absent
// when the schema has none). Gradients flow to both. Returns an n-vector
// when the output layer has width 1, otherwise an n x width matrix.
ad::Var forward(ad::Tape& tape, const NetSchema& schema, ad::Var omega,
                std::optional<ad::Var> prefix, const Tensor& x);

// Same computation on plain values, for evaluation paths that need no
// gradients (metrics, boundary grids).
Tensor forward_eval(const NetSchema& schema, std::span<const double> omega,
                    std::span<const double> prefix, const Tensor& x);

}  // namespace driftgen

#endif  // DRIFTGEN_NET_HPP_
