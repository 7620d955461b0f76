#include "driftgen/tensor.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "driftgen/errors.hpp"

namespace driftgen {

namespace {

std::size_t shape_product(const std::vector<std::size_t>& s) {
  std::size_t n = 1;
  for (std::size_t d : s) n *= d;
  return n;
}

}  // namespace

Tensor Tensor::zeros(std::vector<std::size_t> s) {
  std::size_t n = shape_product(s);
  return Tensor(std::move(s), std::vector<double>(n, 0.0));
}

Tensor Tensor::full(std::vector<std::size_t> s, double v) {
  std::size_t n = shape_product(s);
  return Tensor(std::move(s), std::vector<double>(n, v));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols,
                      std::vector<double> d) {
  if (d.size() != rows * cols)
    throw ShapeError("matrix: data length " + std::to_string(d.size()) +
                     " does not match " + std::to_string(rows) + "x" +
                     std::to_string(cols));
  return Tensor({rows, cols}, std::move(d));
}

bool Tensor::all_finite() const {
  for (double v : data)
    if (!std::isfinite(v)) return false;
  return true;
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << "x";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

namespace kernels {

void check_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b))
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_str() +
                     " vs " + b.shape_str());
}

Tensor add(const Tensor& a, const Tensor& b) {
  check_same_shape("add", a, b);
  Tensor out = a;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.data[i];
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  check_same_shape("sub", a, b);
  Tensor out = a;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] -= b.data[i];
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check_same_shape("mul", a, b);
  Tensor out = a;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] *= b.data[i];
  return out;
}

Tensor scale(const Tensor& a, double c) {
  Tensor out = a;
  for (double& v : out.data) v *= c;
  return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.cols() != b.rows())
    throw ShapeError("matmul: nonconforming shapes " + a.shape_str() + " vs " +
                     b.shape_str());
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  Tensor c = Tensor::zeros({m, n});
  const double* pa = a.data.data();
  const double* pb = b.data.data();
  double* pc = c.data.data();
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = pc + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = pa[i * k + p];
      if (av == 0.0) continue;
      const double* brow = pb + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
  return c;
}

void matmul_grad_a(const Tensor& dc, const Tensor& b, Tensor& da) {
  // da (m x k) += dc (m x n) * b^T (n x k)
  const std::size_t m = da.rows(), k = da.cols(), n = b.cols();
  const double* pdc = dc.data.data();
  const double* pb = b.data.data();
  double* pda = da.data.data();
  for (std::size_t i = 0; i < m; ++i) {
    const double* dcrow = pdc + i * n;
    double* darow = pda + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double* brow = pb + p * n;
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += dcrow[j] * brow[j];
      darow[p] += acc;
    }
  }
}

void matmul_grad_b(const Tensor& a, const Tensor& dc, Tensor& db) {
  // db (k x n) += a^T (k x m) * dc (m x n)
  const std::size_t m = a.rows(), k = a.cols(), n = db.cols();
  const double* pa = a.data.data();
  const double* pdc = dc.data.data();
  double* pdb = db.data.data();
  for (std::size_t i = 0; i < m; ++i) {
    const double* dcrow = pdc + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = pa[i * k + p];
      if (av == 0.0) continue;
      double* dbrow = pdb + p * n;
      for (std::size_t j = 0; j < n; ++j) dbrow[j] += av * dcrow[j];
    }
  }
}

double sum(const Tensor& a) {
  double acc = 0.0;
  for (double v : a.data) acc += v;
  return acc;
}

Tensor relu(const Tensor& a) {
  Tensor out = a;
  for (double& v : out.data) v = v > 0.0 ? v : 0.0;
  return out;
}

Tensor tanh(const Tensor& a) {
  Tensor out = a;
  for (double& v : out.data) v = std::tanh(v);
  return out;
}

Tensor sigmoid(const Tensor& a) {
  Tensor out = a;
  for (double& v : out.data) v = 1.0 / (1.0 + std::exp(-v));
  return out;
}

}  // namespace kernels

}  // namespace driftgen
