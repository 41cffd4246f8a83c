#pragma once

#include "shapeinv/align.hpp"
#include "shapeinv/contraction.hpp"
#include "shapeinv/shape.hpp"
#include "shapeinv/symtensor.hpp"

#include <Eigen/Dense>

#include <random>
#include <vector>

namespace testutil {

inline shapeinv::SymTensor random_symtensor(int dim, int order, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  shapeinv::SymTensor t(dim, order);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = uniform(rng);
  return t;
}

inline Eigen::MatrixXd random_orthogonal(int dim, std::mt19937_64& rng,
                                         bool allow_reflection = false) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> params(static_cast<std::size_t>(shapeinv::Rotation::param_count(dim)));
  for (double& p : params) p = normal(rng);
  Eigen::MatrixXd m = shapeinv::Rotation(dim, params).matrix();
  if (allow_reflection && (rng() & 1u)) m.col(0) *= -1.0;
  return m;
}

inline shapeinv::Shape random_shape(int dim, int n_points, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> wdist(0.1, 1.0);
  std::vector<double> coords, weights;
  for (int i = 0; i < n_points; ++i) {
    for (int a = 0; a < dim; ++a) coords.push_back(normal(rng));
    weights.push_back(wdist(rng));
  }
  return shapeinv::make_shape(dim, std::move(coords), std::move(weights));
}

inline shapeinv::Shape transform_points(const shapeinv::Shape& s, const Eigen::MatrixXd& m) {
  std::vector<double> coords(s.coords.size(), 0.0);
  for (std::size_t i = 0; i < s.num_points(); ++i) {
    for (int r = 0; r < s.dim; ++r) {
      double acc = 0.0;
      for (int c = 0; c < s.dim; ++c) {
        acc += m(r, c) * s.coords[i * static_cast<std::size_t>(s.dim) +
                                  static_cast<std::size_t>(c)];
      }
      coords[i * static_cast<std::size_t>(s.dim) + static_cast<std::size_t>(r)] = acc;
    }
  }
  return shapeinv::make_shape(s.dim, std::move(coords), std::vector<double>(s.weights));
}

// Literal summation over every edge-index assignment; independent of the
// packed pairwise contraction path.
inline double brute_force_graph(const shapeinv::ContractionGraph& g,
                                const std::vector<shapeinv::SymTensor>& tensors) {
  const int d = tensors.empty() ? 1 : tensors[0].dim();
  const std::size_t ne = g.edges.size();
  std::vector<std::vector<double>> dense;
  dense.reserve(tensors.size());
  for (const auto& t : tensors) dense.push_back(t.to_dense());

  std::size_t total = 1;
  for (std::size_t e = 0; e < ne; ++e) total *= static_cast<std::size_t>(d);
  double sum = 0.0;
  std::vector<int> assignment(ne, 0);
  std::vector<std::vector<int>> vertex_index(g.vertex_orders.size());
  for (std::size_t v = 0; v < g.vertex_orders.size(); ++v) {
    vertex_index[v].assign(static_cast<std::size_t>(g.vertex_orders[v]), 0);
  }
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    for (std::size_t e = 0; e < ne; ++e) {
      assignment[e] = static_cast<int>(rem % static_cast<std::size_t>(d));
      rem /= static_cast<std::size_t>(d);
    }
    for (std::size_t e = 0; e < ne; ++e) {
      const auto& edge = g.edges[e];
      vertex_index[static_cast<std::size_t>(edge.v0)][static_cast<std::size_t>(edge.p0)] =
          assignment[e];
      vertex_index[static_cast<std::size_t>(edge.v1)][static_cast<std::size_t>(edge.p1)] =
          assignment[e];
    }
    double prod = 1.0;
    for (std::size_t v = 0; v < g.vertex_orders.size(); ++v) {
      std::size_t offset = 0, stride = 1;
      for (int k = 0; k < g.vertex_orders[v]; ++k) {
        offset += static_cast<std::size_t>(vertex_index[v][static_cast<std::size_t>(k)]) * stride;
        stride *= static_cast<std::size_t>(d);
      }
      prod *= dense[v][offset];
    }
    sum += prod;
  }
  return sum;
}

} // namespace testutil
