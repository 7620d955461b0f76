#include "driftgen/tape.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "driftgen/errors.hpp"

namespace driftgen::ad {

const Tensor& Var::value() const { return tape->value(id); }

const Tensor& GradientMap::grad(Var v) {
  if (!present_[v.id]) {
    grads_[v.id] = Tensor::zeros(tape_->value(v.id).shape);
    present_[v.id] = 1;
  }
  return grads_[v.id];
}

bool GradientMap::reached(Var v) const { return present_[v.id] != 0; }

Var Tape::push(Op op, std::vector<std::uint32_t> inputs, Tensor value) {
  nodes_.push_back(Node{op, std::move(inputs), std::move(value), 0.0, {}});
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1), this};
}

void Tape::check_owned(Var v, const char* op) const {
  if (v.tape != this || v.id >= nodes_.size())
    throw ShapeError(std::string(op) + ": var does not belong to this tape");
}

Var Tape::input(Tensor value) { return push(Op::kInput, {}, std::move(value)); }

Var Tape::add(Var a, Var b) {
  check_owned(a, "add");
  check_owned(b, "add");
  return push(Op::kAdd, {a.id, b.id}, kernels::add(a.value(), b.value()));
}

Var Tape::sub(Var a, Var b) {
  check_owned(a, "sub");
  check_owned(b, "sub");
  return push(Op::kSub, {a.id, b.id}, kernels::sub(a.value(), b.value()));
}

Var Tape::mul(Var a, Var b) {
  check_owned(a, "mul");
  check_owned(b, "mul");
  return push(Op::kMul, {a.id, b.id}, kernels::mul(a.value(), b.value()));
}

Var Tape::matmul(Var a, Var b) {
  check_owned(a, "matmul");
  check_owned(b, "matmul");
  return push(Op::kMatMul, {a.id, b.id},
              kernels::matmul(a.value(), b.value()));
}

Var Tape::scale(Var a, double c) {
  check_owned(a, "scale");
  Var v = push(Op::kScale, {a.id}, kernels::scale(a.value(), c));
  nodes_.back().aux = c;
  return v;
}

Var Tape::sum(Var a) {
  check_owned(a, "sum");
  return push(Op::kSum, {a.id}, Tensor::scalar(kernels::sum(a.value())));
}

Var Tape::mean(Var a) {
  check_owned(a, "mean");
  const std::size_t n = a.value().size();
  if (n == 0) throw ShapeError("mean: empty operand");
  return push(Op::kMean, {a.id},
              Tensor::scalar(kernels::sum(a.value()) / static_cast<double>(n)));
}

Var Tape::relu(Var a) {
  check_owned(a, "relu");
  return push(Op::kRelu, {a.id}, kernels::relu(a.value()));
}

Var Tape::tanh(Var a) {
  check_owned(a, "tanh");
  return push(Op::kTanh, {a.id}, kernels::tanh(a.value()));
}

Var Tape::sigmoid(Var a) {
  check_owned(a, "sigmoid");
  return push(Op::kSigmoid, {a.id}, kernels::sigmoid(a.value()));
}

Var Tape::concat(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat: no operands");
  std::vector<std::uint32_t> ids;
  std::size_t total = 0;
  for (Var p : parts) {
    check_owned(p, "concat");
    if (p.value().rank() != 1)
      throw ShapeError("concat: operand is not rank 1, got " +
                       p.value().shape_str());
    total += p.value().size();
    ids.push_back(p.id);
  }
  Tensor out = Tensor::zeros({total});
  std::size_t off = 0;
  for (Var p : parts) {
    const Tensor& v = p.value();
    std::copy(v.data.begin(), v.data.end(), out.data.begin() + off);
    off += v.size();
  }
  return push(Op::kConcat, std::move(ids), std::move(out));
}

Var Tape::slice(Var a, std::size_t begin, std::size_t end) {
  check_owned(a, "slice");
  const Tensor& v = a.value();
  if (v.rank() != 1)
    throw ShapeError("slice: operand is not rank 1, got " + v.shape_str());
  if (begin > end || end > v.size())
    throw ShapeError("slice: range [" + std::to_string(begin) + ", " +
                     std::to_string(end) + ") out of bounds for length " +
                     std::to_string(v.size()));
  Tensor out({end - begin},
             std::vector<double>(v.data.begin() + begin, v.data.begin() + end));
  Var r = push(Op::kSlice, {a.id}, std::move(out));
  nodes_.back().aux = static_cast<double>(begin);
  return r;
}

Var Tape::reshape(Var a, std::vector<std::size_t> shape) {
  check_owned(a, "reshape");
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  if (n != a.value().size())
    throw ShapeError("reshape: cannot view " + a.value().shape_str() +
                     " as new shape with " + std::to_string(n) + " elements");
  Tensor out(std::move(shape), a.value().data);
  return push(Op::kReshape, {a.id}, std::move(out));
}

Var Tape::loss_bce(Var pred, const Tensor& labels) {
  check_owned(pred, "loss_bce");
  kernels::check_same_shape("loss_bce", pred.value(), labels);
  const std::size_t n = pred.value().size();
  if (n == 0) throw ShapeError("loss_bce: empty prediction");
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = std::clamp(pred.value().data[i], kBceEps, 1.0 - kBceEps);
    const double y = labels.data[i];
    acc += -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
  }
  Var r = push(Op::kBce, {pred.id},
               Tensor::scalar(acc / static_cast<double>(n)));
  nodes_.back().aux_tensor = labels;
  return r;
}

Var Tape::loss_mse(Var pred, const Tensor& target) {
  check_owned(pred, "loss_mse");
  kernels::check_same_shape("loss_mse", pred.value(), target);
  Var t = input(target);
  Var d = sub(pred, t);
  return mean(mul(d, d));
}

GradientMap Tape::backward(Var root) const {
  check_owned(root, "backward");
  if (!root.value().is_scalar())
    throw ShapeError("backward: root must be scalar, got " +
                     root.value().shape_str());

  GradientMap gm;
  gm.tape_ = this;
  gm.grads_.resize(nodes_.size());
  gm.present_.assign(nodes_.size(), 0);
  gm.grads_[root.id] = Tensor::scalar(1.0);
  gm.present_[root.id] = 1;

  auto acc = [&](std::uint32_t id) -> Tensor& {
    if (!gm.present_[id]) {
      gm.grads_[id] = Tensor::zeros(nodes_[id].value.shape);
      gm.present_[id] = 1;
    }
    return gm.grads_[id];
  };

  for (std::uint32_t id = root.id + 1; id-- > 0;) {
    if (!gm.present_[id]) continue;
    const Node& node = nodes_[id];
    const Tensor& g = gm.grads_[id];
    switch (node.op) {
      case Op::kInput:
        break;
      case Op::kAdd: {
        Tensor& da = acc(node.inputs[0]);
        Tensor& db = acc(node.inputs[1]);
        for (std::size_t i = 0; i < g.data.size(); ++i) {
          da.data[i] += g.data[i];
          db.data[i] += g.data[i];
        }
        break;
      }
      case Op::kSub: {
        Tensor& da = acc(node.inputs[0]);
        Tensor& db = acc(node.inputs[1]);
        for (std::size_t i = 0; i < g.data.size(); ++i) {
          da.data[i] += g.data[i];
          db.data[i] -= g.data[i];
        }
        break;
      }
      case Op::kMul: {
        const Tensor& a = nodes_[node.inputs[0]].value;
        const Tensor& b = nodes_[node.inputs[1]].value;
        Tensor& da = acc(node.inputs[0]);
        Tensor& db = acc(node.inputs[1]);
        for (std::size_t i = 0; i < g.data.size(); ++i) {
          da.data[i] += g.data[i] * b.data[i];
          db.data[i] += g.data[i] * a.data[i];
        }
        break;
      }
      case Op::kMatMul: {
        const Tensor& a = nodes_[node.inputs[0]].value;
        const Tensor& b = nodes_[node.inputs[1]].value;
        kernels::matmul_grad_a(g, b, acc(node.inputs[0]));
        kernels::matmul_grad_b(a, g, acc(node.inputs[1]));
        break;
      }
      case Op::kScale: {
        Tensor& da = acc(node.inputs[0]);
        for (std::size_t i = 0; i < g.data.size(); ++i)
          da.data[i] += node.aux * g.data[i];
        break;
      }
      case Op::kSum: {
        Tensor& da = acc(node.inputs[0]);
        const double gv = g.data[0];
        for (double& v : da.data) v += gv;
        break;
      }
      case Op::kMean: {
        Tensor& da = acc(node.inputs[0]);
        const double gv = g.data[0] / static_cast<double>(da.data.size());
        for (double& v : da.data) v += gv;
        break;
      }
      case Op::kRelu: {
        const Tensor& x = nodes_[node.inputs[0]].value;
        Tensor& da = acc(node.inputs[0]);
        for (std::size_t i = 0; i < g.data.size(); ++i)
          if (x.data[i] > 0.0) da.data[i] += g.data[i];
        break;
      }
      case Op::kTanh: {
        const Tensor& y = node.value;
        Tensor& da = acc(node.inputs[0]);
        for (std::size_t i = 0; i < g.data.size(); ++i)
          da.data[i] += g.data[i] * (1.0 - y.data[i] * y.data[i]);
        break;
      }
      case Op::kSigmoid: {
        const Tensor& y = node.value;
        Tensor& da = acc(node.inputs[0]);
        for (std::size_t i = 0; i < g.data.size(); ++i)
          da.data[i] += g.data[i] * y.data[i] * (1.0 - y.data[i]);
        break;
      }
      case Op::kConcat: {
        std::size_t off = 0;
        for (std::uint32_t in : node.inputs) {
          Tensor& da = acc(in);
          for (std::size_t i = 0; i < da.data.size(); ++i)
            da.data[i] += g.data[off + i];
          off += da.data.size();
        }
        break;
      }
      case Op::kSlice: {
        Tensor& da = acc(node.inputs[0]);
        const std::size_t begin = static_cast<std::size_t>(node.aux);
        for (std::size_t i = 0; i < g.data.size(); ++i)
          da.data[begin + i] += g.data[i];
        break;
      }
      case Op::kReshape: {
        Tensor& da = acc(node.inputs[0]);
        for (std::size_t i = 0; i < g.data.size(); ++i)
          da.data[i] += g.data[i];
        break;
      }
      case Op::kBce: {
        const Tensor& p = nodes_[node.inputs[0]].value;
        const Tensor& y = node.aux_tensor;
        Tensor& da = acc(node.inputs[0]);
        const double gv = g.data[0] / static_cast<double>(p.data.size());
        for (std::size_t i = 0; i < p.data.size(); ++i) {
          const double pi = p.data[i];
          if (pi < kBceEps || pi > 1.0 - kBceEps) continue;  // clamped: flat
          da.data[i] += gv * (pi - y.data[i]) / (pi * (1.0 - pi));
        }
        break;
      }
    }
  }
  return gm;
}

}  // namespace driftgen::ad
