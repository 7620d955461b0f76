#ifndef DRIFTGEN_TENSOR_HPP_
#define DRIFTGEN_TENSOR_HPP_

#include <cstddef>
#include <string>
#include <vector>

namespace driftgen {

// Dense row-major tensor of doubles. Rank 0 is a scalar, rank 1 a vector,
// rank 2 a matrix; nothing higher is needed. A tensor whose data contains
// NaN/Inf after a forward evaluation is an error state, checked at the
// points where it can actually arise (losses, dataset ingestion).
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::vector<std::size_t> s, std::vector<double> d)
      : shape(std::move(s)), data(std::move(d)) {}

  static Tensor scalar(double v) { return Tensor({}, {v}); }
  static Tensor zeros(std::vector<std::size_t> s);
  static Tensor full(std::vector<std::size_t> s, double v);
  static Tensor vec(std::vector<double> d) {
    std::size_t n = d.size();
    return Tensor({n}, std::move(d));
  }
  static Tensor matrix(std::size_t rows, std::size_t cols,
                       std::vector<double> d);

  std::size_t size() const { return data.size(); }
  std::size_t rank() const { return shape.size(); }
  bool is_scalar() const { return shape.empty(); }
  std::size_t rows() const { return shape.at(0); }
  std::size_t cols() const { return shape.at(1); }

  double& at(std::size_t i) { return data[i]; }
  double at(std::size_t i) const { return data[i]; }
  double& at2(std::size_t r, std::size_t c) { return data[r * shape[1] + c]; }
  double at2(std::size_t r, std::size_t c) const {
    return data[r * shape[1] + c];
  }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
  bool all_finite() const;
  std::string shape_str() const;
};

// Shape-checked forward kernels shared by the tape and the no-grad
// evaluation paths. Mismatches throw ShapeError naming the op.
namespace kernels {

void check_same_shape(const char* op, const Tensor& a, const Tensor& b);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);

// C (m x n) = A (m x k) * B (k x n); both operands must be rank 2.
Tensor matmul(const Tensor& a, const Tensor& b);

// dA += dC * B^T and dB += A^T * dC, the two halves of the matmul pullback.
void matmul_grad_a(const Tensor& dc, const Tensor& b, Tensor& da);
void matmul_grad_b(const Tensor& a, const Tensor& dc, Tensor& db);

double sum(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor sigmoid(const Tensor& a);

}  // namespace kernels

}  // namespace driftgen

#endif  // DRIFTGEN_TENSOR_HPP_
