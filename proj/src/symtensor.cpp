#include "shapeinv/symtensor.hpp"

#include "shapeinv/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace shapeinv {

std::size_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  std::size_t result = 1;
  for (int i = 1; i <= k; ++i) {
    result = result * static_cast<std::size_t>(n - k + i) / static_cast<std::size_t>(i);
  }
  return result;
}

std::size_t packed_size(int dim, int order) {
  return binomial(dim + order - 1, order);
}

std::size_t pack_index(int dim, std::span<const int> sorted_axes) {
  std::size_t rank = 0;
  for (std::size_t k = 0; k < sorted_axes.size(); ++k) {
    const int a = sorted_axes[k];
    if (a < 0 || a >= dim) throw std::out_of_range("pack_index: axis out of range");
    rank += binomial(a + static_cast<int>(k), static_cast<int>(k) + 1);
  }
  return rank;
}

double tuple_multiplicity(std::span<const int> sorted_axes) {
  const int r = static_cast<int>(sorted_axes.size());
  double result = 1.0;
  // multinomial r! / prod(count_a!) built incrementally as C(r, c1) C(r-c1, c2)...
  int remaining = r;
  std::size_t i = 0;
  while (i < sorted_axes.size()) {
    std::size_t j = i;
    while (j < sorted_axes.size() && sorted_axes[j] == sorted_axes[i]) ++j;
    const int count = static_cast<int>(j - i);
    result *= static_cast<double>(binomial(remaining, count));
    remaining -= count;
    i = j;
  }
  return result;
}

SymTensor::SymTensor(int dim, int order) : dim_(dim), order_(order) {
  if (dim < 1) throw std::invalid_argument("SymTensor: dim must be positive");
  if (order < 0) throw std::invalid_argument("SymTensor: order must be nonnegative");
  data_.assign(packed_size(dim, order), 0.0);
}

double SymTensor::at(std::span<const int> axes) const {
  std::vector<int> s(axes.begin(), axes.end());
  std::sort(s.begin(), s.end());
  return data_[pack_index(dim_, s)];
}

double& SymTensor::at(std::span<const int> axes) {
  std::vector<int> s(axes.begin(), axes.end());
  std::sort(s.begin(), s.end());
  return data_[pack_index(dim_, s)];
}

namespace {

std::size_t dense_size_checked(int dim, int order) {
  std::size_t n = 1;
  for (int k = 0; k < order; ++k) {
    n *= static_cast<std::size_t>(dim);
    if (n > (std::size_t{1} << 26)) {
      throw std::length_error("SymTensor: dense expansion too large");
    }
  }
  return n;
}

} // namespace

std::vector<double> SymTensor::to_dense() const {
  const std::size_t n = dense_size_checked(dim_, order_);
  std::vector<double> dense(n, 0.0);
  if (order_ == 0) {
    dense[0] = data_[0];
    return dense;
  }
  std::vector<int> idx(static_cast<std::size_t>(order_), 0);
  std::vector<int> sorted(static_cast<std::size_t>(order_));
  for (std::size_t flat = 0; flat < n; ++flat) {
    std::size_t rem = flat;
    for (int k = 0; k < order_; ++k) {
      idx[static_cast<std::size_t>(k)] = static_cast<int>(rem % static_cast<std::size_t>(dim_));
      rem /= static_cast<std::size_t>(dim_);
    }
    sorted = idx;
    std::sort(sorted.begin(), sorted.end());
    dense[flat] = data_[pack_index(dim_, sorted)];
  }
  return dense;
}

SymTensor SymTensor::from_dense(int dim, int order, std::span<const double> dense) {
  SymTensor t(dim, order);
  for_each_packed(dim, order, [&](std::span<const int> idx, std::size_t offset) {
    std::size_t flat = 0;
    std::size_t stride = 1;
    for (int k = 0; k < order; ++k) {
      flat += static_cast<std::size_t>(idx[static_cast<std::size_t>(k)]) * stride;
      stride *= static_cast<std::size_t>(dim);
    }
    t.data_[offset] = dense[flat];
  });
  return t;
}

double SymTensor::frobenius_norm() const { return std::sqrt(frobenius(*this, *this)); }

double frobenius(const SymTensor& p, const SymTensor& q) {
  if (p.dim() != q.dim() || p.order() != q.order()) {
    throw MismatchError("frobenius: tensor dim/order mismatch");
  }
  double sum = 0.0;
  for_each_packed(p.dim(), p.order(), [&](std::span<const int> idx, std::size_t offset) {
    sum += tuple_multiplicity(idx) * p[offset] * q[offset];
  });
  return sum;
}

SymTensor rotate(const SymTensor& t, const Eigen::MatrixXd& rotation) {
  const int d = t.dim();
  if (rotation.rows() != d || rotation.cols() != d) {
    throw MismatchError("rotate: matrix dimension mismatch");
  }
  const Eigen::MatrixXd gram = rotation.transpose() * rotation;
  const double dev = (gram - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff();
  if (dev > 1e-10) throw std::invalid_argument("rotate: matrix is not orthogonal");
  if (t.order() == 0) return t;

  std::vector<double> dense = t.to_dense();
  std::vector<double> next(dense.size());
  const std::size_t total = dense.size();
  std::vector<double> column(static_cast<std::size_t>(d));
  // one mode product per slot: new_{..i..} = sum_a old_{..a..} O_{a i}
  std::size_t stride = 1;
  for (int slot = 0; slot < t.order(); ++slot) {
    const std::size_t block = stride * static_cast<std::size_t>(d);
    for (std::size_t hi = 0; hi < total; hi += block) {
      for (std::size_t lo = 0; lo < stride; ++lo) {
        const std::size_t base = hi + lo;
        for (int a = 0; a < d; ++a) {
          column[static_cast<std::size_t>(a)] = dense[base + static_cast<std::size_t>(a) * stride];
        }
        for (int i = 0; i < d; ++i) {
          double acc = 0.0;
          for (int a = 0; a < d; ++a) {
            acc += column[static_cast<std::size_t>(a)] * rotation(a, i);
          }
          next[base + static_cast<std::size_t>(i) * stride] = acc;
        }
      }
    }
    dense.swap(next);
    stride *= static_cast<std::size_t>(d);
  }
  return SymTensor::from_dense(d, t.order(), dense);
}

double trace_power(const SymTensor& p, int power) {
  if (p.order() != 2) throw MismatchError("trace_power: order-2 tensor required");
  if (power < 1) throw std::invalid_argument("trace_power: power must be >= 1");
  const int d = p.dim();
  Eigen::MatrixXd m(d, d);
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) {
      const int idx[2] = {a, b};
      m(a, b) = p.at(std::span<const int>(idx, 2));
    }
  }
  Eigen::MatrixXd acc = m;
  for (int i = 1; i < power; ++i) acc = acc * m;
  return acc.trace();
}

} // namespace shapeinv
