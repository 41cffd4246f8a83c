#pragma once

#include "shapeinv/invariants.hpp"
#include "shapeinv/symtensor.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

namespace shapeinv {

// SO(d) element parameterized by the d(d-1)/2 coordinates of a
// skew-symmetric generator; the matrix is its exponential.
class Rotation {
public:
  explicit Rotation(int dim);
  Rotation(int dim, std::vector<double> params);

  int dim() const { return dim_; }
  const std::vector<double>& params() const { return params_; }
  const Eigen::MatrixXd& matrix() const { return matrix_; }

  static int param_count(int dim) { return dim * (dim - 1) / 2; }

private:
  int dim_ = 0;
  std::vector<double> params_;
  Eigen::MatrixXd matrix_;
};

// sqrt(sum_r w_r ||p^r - rotate(q^r, O)||_F^2); missing weight means 1.
double objective(const TensorSet& p, const TensorSet& q, const Rotation& rotation,
                 const std::map<int, double>& weights = {});

struct OptimizeConfig {
  int restarts = -1; // default: 8 for d=2, 32 otherwise
  int max_iter = 1000;
  double tol = 1e-9;
  std::uint64_t seed = 0;
  double fd_step = 1e-6;
  bool try_reflection = false;
};

struct AlignmentResult {
  Rotation rotation;
  double residual = 0.0;
  std::vector<std::pair<int, double>> objective_trace; // best restart only
  int restarts_used = 0;
  bool converged = false;
  bool reflected = false; // only with try_reflection
};

// Multi-start gradient descent on the generator parameters, central finite
// differences, backtracking line search. Deterministic under a fixed seed.
// The identity start is always evaluated.
AlignmentResult optimize(const TensorSet& p, const TensorSet& q,
                         const OptimizeConfig& config = {});

// Brute-force verification for d=2: objective at n equally spaced angles.
std::pair<double, double> grid_oracle_2d(const TensorSet& p, const TensorSet& q, int n_angles);

} // namespace shapeinv
