#ifndef DRIFTGEN_TAPE_HPP_
#define DRIFTGEN_TAPE_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "driftgen/tensor.hpp"

namespace driftgen::ad {

class Tape;

// Handle into a Tape. Only valid for the tape that created it; ops check.
struct Var {
  std::uint32_t id = 0;
  Tape* tape = nullptr;

  const Tensor& value() const;
};

// Gradients of one backward pass, keyed by node id. Vars the root does not
// reach map to zero tensors, materialized on first access.
class GradientMap {
 public:
  const Tensor& grad(Var v);
  bool reached(Var v) const;

 private:
  friend class Tape;
  std::vector<Tensor> grads_;
  std::vector<std::uint8_t> present_;
  const Tape* tape_ = nullptr;
};

// Append-only record of primitive ops. Node ids are topologically ordered by
// construction: every input id of node k is < k. A tape and its vars are
// single-threaded; independent tapes may live on different threads.
class Tape {
 public:
  Var input(Tensor value);

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);  // elementwise
  Var matmul(Var a, Var b);
  Var scale(Var a, double c);
  Var sum(Var a);   // -> scalar
  Var mean(Var a);  // -> scalar
  Var relu(Var a);
  Var tanh(Var a);
  Var sigmoid(Var a);
  Var concat(std::span<const Var> parts);  // rank-1 operands
  Var slice(Var a, std::size_t begin, std::size_t end);  // [begin, end)
  Var reshape(Var a, std::vector<std::size_t> shape);

  // Mean binary cross-entropy; predictions are clamped to
  // [kBceEps, 1 - kBceEps] before the logs.
  Var loss_bce(Var pred, const Tensor& labels);
  // Mean squared error, composed from sub/mul/mean.
  Var loss_mse(Var pred, const Tensor& target);

  // Reverse pass from a scalar root. Visits nodes in strictly decreasing id
  // order; gradients of fan-out nodes accumulate by summation.
  GradientMap backward(Var root) const;

  const Tensor& value(std::uint32_t id) const { return nodes_[id].value; }
  std::size_t size() const { return nodes_.size(); }

  static constexpr double kBceEps = 1e-12;

 private:
  enum class Op : std::uint8_t {
    kInput, kAdd, kSub, kMul, kMatMul, kScale, kSum, kMean,
    kRelu, kTanh, kSigmoid, kConcat, kSlice, kReshape, kBce,
  };

  struct Node {
    Op op;
    std::vector<std::uint32_t> inputs;
    Tensor value;
    double aux = 0.0;       // scale factor / slice begin
    Tensor aux_tensor;      // bce labels
  };

  Var push(Op op, std::vector<std::uint32_t> inputs, Tensor value);
  void check_owned(Var v, const char* op) const;

  std::vector<Node> nodes_;
};

}  // namespace driftgen::ad

#endif  // DRIFTGEN_TAPE_HPP_
