#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace shapeinv {

// Exact C(n, k); arguments stay desk-scale (n <= ~40).
std::size_t binomial(int n, int k);

// Number of independent entries of a symmetric order-r tensor over R^d:
// C(d + r - 1, r).
std::size_t packed_size(int dim, int order);

// Rank of the sorted multi-index among nondecreasing tuples in
// colexicographic order. Axes are 0-based. Bijective over sorted tuples.
std::size_t pack_index(int dim, std::span<const int> sorted_axes);

// Number of distinct permutations of a sorted index tuple
// (multinomial of the per-axis counts).
double tuple_multiplicity(std::span<const int> sorted_axes);

// Visit all nondecreasing index tuples of length `order` over 0..dim-1 in
// packed (colexicographic) order. fn(tuple, packed_offset).
template <typename F>
void for_each_packed(int dim, int order, F&& fn) {
  std::vector<int> idx(static_cast<std::size_t>(order), 0);
  if (order == 0) {
    fn(std::span<const int>(idx), std::size_t{0});
    return;
  }
  std::size_t offset = 0;
  for (;;) {
    fn(std::span<const int>(idx), offset);
    int k = 0;
    while (k < order) {
      const int cap = (k + 1 < order) ? idx[static_cast<std::size_t>(k) + 1] : dim - 1;
      if (idx[static_cast<std::size_t>(k)] < cap) break;
      ++k;
    }
    if (k == order) break;
    ++idx[static_cast<std::size_t>(k)];
    for (int j = 0; j < k; ++j) idx[static_cast<std::size_t>(j)] = 0;
    ++offset;
  }
}

// Symmetric order-r tensor over R^d in packed storage: one entry per
// nondecreasing index tuple, full-tensor sums recovered through the
// multiplicity of each tuple.
class SymTensor {
public:
  SymTensor() = default;
  SymTensor(int dim, int order);

  int dim() const { return dim_; }
  int order() const { return order_; }
  std::size_t size() const { return data_.size(); }

  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }
  std::span<const double> packed() const { return data_; }

  // Accepts any index order; sorts internally.
  double at(std::span<const int> axes) const;
  double& at(std::span<const int> axes);
  double at(std::initializer_list<int> axes) const {
    return at(std::span<const int>(axes.begin(), axes.size()));
  }
  double& at(std::initializer_list<int> axes) {
    return at(std::span<const int>(axes.begin(), axes.size()));
  }

  // Dense expansion, flat index sum_k a_k * d^k. Throws for d^r beyond
  // a sanity cap.
  std::vector<double> to_dense() const;
  static SymTensor from_dense(int dim, int order, std::span<const double> dense);

  double frobenius_norm() const;

private:
  int dim_ = 0;
  int order_ = 0;
  std::vector<double> data_;
};

// Frobenius inner product over all r-index tuples, computed packed.
double frobenius(const SymTensor& p, const SymTensor& q);

// Applies O to every slot: out_{i1..ir} = sum_{a1..ar} t_{a1..ar} O_{a1 i1}...O_{ar ir}.
// O must be orthogonal within 1e-10 (max norm of O^T O - I).
SymTensor rotate(const SymTensor& t, const Eigen::MatrixXd& rotation);

// Trace of the i-th matrix power of an order-2 tensor.
double trace_power(const SymTensor& p, int power);

} // namespace shapeinv
