#ifndef DRIFTGEN_ADAM_HPP_
#define DRIFTGEN_ADAM_HPP_

#include <cmath>
#include <cstddef>
#include <vector>

#include "driftgen/errors.hpp"
#include "driftgen/tensor.hpp"

namespace driftgen {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with bias correction. Slot order is fixed by the first step() call;
// later calls must pass the same parameter tensors in the same order. A null
// grad skips its slot entirely, leaving that parameter and its moments
// untouched for the iteration.
class Adam {
 public:
  explicit Adam(AdamConfig config) : config_(config) {}

  void set_learning_rate(double lr) { config_.learning_rate = lr; }
  double learning_rate() const { return config_.learning_rate; }
  std::size_t step_count() const { return step_count_; }

  void step(const std::vector<Tensor*>& params,
            const std::vector<const Tensor*>& grads) {
    if (params.size() != grads.size()) {
      throw ShapeError("adam: params and grads count mismatch");
    }
    if (m_.empty()) {
      m_.reserve(params.size());
      v_.reserve(params.size());
      for (const Tensor* p : params) {
        m_.push_back(Tensor::zeros(p->shape));
        v_.push_back(Tensor::zeros(p->shape));
      }
    } else if (m_.size() != params.size()) {
      throw ShapeError("adam: parameter count changed between steps");
    }
    ++step_count_;
    const double t = static_cast<double>(step_count_);
    const double bc1 = 1.0 - std::pow(config_.beta1, t);
    const double bc2 = 1.0 - std::pow(config_.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (grads[i] == nullptr) continue;
      Tensor& p = *params[i];
      const Tensor& g = *grads[i];
      if (!p.same_shape(g)) {
        throw ShapeError("adam: grad shape " + g.shape_str() +
                         " does not match param shape " + p.shape_str());
      }
      Tensor& m = m_[i];
      Tensor& v = v_[i];
      for (std::size_t k = 0; k < p.data.size(); ++k) {
        const double gk = g.data[k];
        m.data[k] = config_.beta1 * m.data[k] + (1.0 - config_.beta1) * gk;
        v.data[k] = config_.beta2 * v.data[k] + (1.0 - config_.beta2) * gk * gk;
        const double m_hat = m.data[k] / bc1;
        const double v_hat = v.data[k] / bc2;
        p.data[k] -=
            config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
      }
    }
  }

 private:
  AdamConfig config_;
  std::size_t step_count_ = 0;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
};

}  // namespace driftgen

#endif  // DRIFTGEN_ADAM_HPP_
