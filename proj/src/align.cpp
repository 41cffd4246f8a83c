#include "shapeinv/align.hpp"

#include "shapeinv/errors.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace shapeinv {

namespace {

Eigen::MatrixXd generator_matrix(int dim, const std::vector<double>& params) {
  Eigen::MatrixXd skew = Eigen::MatrixXd::Zero(dim, dim);
  std::size_t k = 0;
  for (int i = 0; i < dim; ++i) {
    for (int j = i + 1; j < dim; ++j) {
      skew(i, j) = params[k];
      skew(j, i) = -params[k];
      ++k;
    }
  }
  return skew;
}

Eigen::MatrixXd exp_generator(int dim, const std::vector<double>& params) {
  const bool all_zero =
      std::all_of(params.begin(), params.end(), [](double p) { return p == 0.0; });
  if (all_zero) return Eigen::MatrixXd::Identity(dim, dim);
  if (dim == 2) {
    const double angle = params[0];
    Eigen::MatrixXd m(2, 2);
    const double c = std::cos(angle), s = std::sin(angle);
    m << c, -s, s, c;
    return m;
  }
  return generator_matrix(dim, params).exp();
}

} // namespace

Rotation::Rotation(int dim)
    : dim_(dim), params_(static_cast<std::size_t>(param_count(dim)), 0.0),
      matrix_(Eigen::MatrixXd::Identity(dim, dim)) {
  if (dim < 1) throw std::invalid_argument("Rotation: dim must be positive");
}

Rotation::Rotation(int dim, std::vector<double> params) : dim_(dim), params_(std::move(params)) {
  if (dim < 1) throw std::invalid_argument("Rotation: dim must be positive");
  if (static_cast<int>(params_.size()) != param_count(dim)) {
    throw MismatchError("Rotation: wrong parameter count");
  }
  matrix_ = exp_generator(dim, params_);
}

double objective(const TensorSet& p, const TensorSet& q, const Rotation& rotation,
                 const std::map<int, double>& weights) {
  if (p.size() != q.size()) throw MismatchError("objective: tensor order sets differ");
  double sum = 0.0;
  for (const auto& [order, pr] : p) {
    const auto it = q.find(order);
    if (it == q.end()) throw MismatchError("objective: tensor order sets differ");
    const auto wit = weights.find(order);
    const double w = wit == weights.end() ? 1.0 : wit->second;
    SymTensor diff = rotate(it->second, rotation.matrix());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = pr[i] - diff[i];
    sum += w * frobenius(diff, diff);
  }
  return std::sqrt(std::max(sum, 0.0));
}

namespace {

struct DescentOutcome {
  std::vector<double> params;
  double value = 0.0;
  bool converged = false;
  std::vector<std::pair<int, double>> trace;
};

template <typename Objective>
DescentOutcome descend(Objective&& f, std::vector<double> params, const OptimizeConfig& config) {
  DescentOutcome out;
  const std::size_t n = params.size();
  double value = f(params);
  out.trace.emplace_back(0, value);
  std::vector<double> grad(n), trial(n);
  for (int iter = 1; iter <= config.max_iter; ++iter) {
    double grad_norm2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      trial = params;
      trial[k] += config.fd_step;
      const double f_plus = f(trial);
      trial[k] = params[k] - config.fd_step;
      const double f_minus = f(trial);
      grad[k] = (f_plus - f_minus) / (2.0 * config.fd_step);
      grad_norm2 += grad[k] * grad[k];
    }
    if (std::sqrt(grad_norm2) < config.tol || value < config.tol) {
      out.converged = true;
      break;
    }
    double step = 1.0;
    double best = value;
    bool improved = false;
    while (step > 1e-14) {
      for (std::size_t k = 0; k < n; ++k) trial[k] = params[k] - step * grad[k];
      const double candidate = f(trial);
      if (candidate < best) {
        best = candidate;
        params = trial;
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved) {
      out.converged = std::sqrt(grad_norm2) < 1e-6;
      break;
    }
    value = best;
    out.trace.emplace_back(iter, value);
    if (value < config.tol) {
      out.converged = true;
      break;
    }
  }
  out.params = std::move(params);
  out.value = value;
  return out;
}

TensorSet reflect_first_axis(const TensorSet& q, int dim) {
  Eigen::MatrixXd mirror = Eigen::MatrixXd::Identity(dim, dim);
  mirror(0, 0) = -1.0;
  TensorSet out;
  for (const auto& [order, t] : q) out.emplace(order, rotate(t, mirror));
  return out;
}

} // namespace

AlignmentResult optimize(const TensorSet& p, const TensorSet& q, const OptimizeConfig& config) {
  if (p.empty()) throw MismatchError("optimize: empty tensor set");
  const int dim = p.begin()->second.dim();
  const int n = Rotation::param_count(dim);
  const int restarts = config.restarts > 0 ? config.restarts : (dim == 2 ? 8 : 32);

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  auto run = [&](const TensorSet& target, bool reflected) {
    AlignmentResult best{Rotation(dim)};
    best.residual = std::numeric_limits<double>::infinity();
    // Descend on the squared objective: the square root has a gradient cusp
    // at a perfect match, which stalls plain descent near zero residual.
    auto f = [&](const std::vector<double>& params) {
      const double v = objective(p, target, Rotation(dim, params), {});
      return v * v;
    };
    OptimizeConfig inner = config;
    inner.tol = config.tol * config.tol;
    for (int r = 0; r < restarts; ++r) {
      std::vector<double> start(static_cast<std::size_t>(n), 0.0);
      if (r > 0) {
        // uniform direction, norm <= pi
        double norm2 = 0.0;
        for (double& s : start) {
          s = normal(rng);
          norm2 += s * s;
        }
        const double radius =
            std::numbers::pi * std::pow(uniform(rng), 1.0 / static_cast<double>(n));
        const double scale = norm2 > 0.0 ? radius / std::sqrt(norm2) : 0.0;
        for (double& s : start) s *= scale;
      }
      DescentOutcome outcome = descend(f, std::move(start), inner);
      outcome.value = std::sqrt(std::max(outcome.value, 0.0));
      for (auto& [iter, v] : outcome.trace) v = std::sqrt(std::max(v, 0.0));
      if (outcome.value < best.residual) {
        best.rotation = Rotation(dim, outcome.params);
        best.residual = outcome.value;
        best.converged = outcome.converged;
        best.objective_trace = std::move(outcome.trace);
        best.reflected = reflected;
      }
      best.restarts_used = r + 1;
      if (best.residual < config.tol) break;
    }
    best.residual = objective(p, target, best.rotation, {});
    return best;
  };

  AlignmentResult best = run(q, false);
  if (config.try_reflection) {
    const AlignmentResult mirrored = run(reflect_first_axis(q, dim), true);
    if (mirrored.residual < best.residual) best = mirrored;
  }
  return best;
}

std::pair<double, double> grid_oracle_2d(const TensorSet& p, const TensorSet& q, int n_angles) {
  if (p.empty()) throw MismatchError("grid_oracle_2d: empty tensor set");
  if (p.begin()->second.dim() != 2) {
    throw MismatchError("grid_oracle_2d: only defined for d = 2");
  }
  if (n_angles < 1) throw std::invalid_argument("grid_oracle_2d: n_angles must be >= 1");
  double best_angle = 0.0;
  double best_value = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n_angles; ++k) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) /
                         static_cast<double>(n_angles);
    const double value = objective(p, q, Rotation(2, {angle}), {});
    if (value < best_value) {
      best_value = value;
      best_angle = angle;
    }
  }
  return {best_angle, best_value};
}

} // namespace shapeinv
