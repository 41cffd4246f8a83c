#pragma once

#include "shapeinv/shape.hpp"
#include "shapeinv/symtensor.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <span>
#include <vector>

namespace shapeinv {

// Orthonormal Hermite function f_j(x) = h_j(x) e^{-x^2/2} / sqrt(2^j j! sqrt(pi)),
// evaluated with the normalized recurrence
// f_{j+1} = x sqrt(2/(j+1)) f_j - sqrt(j/(j+1)) f_{j-1}.
double hermite_fn(int degree, double x);

// f_0..f_jmax at one point; out.size() must be jmax+1.
void hermite_fn_all(int jmax, double x, std::span<double> out);

// All multi-degrees j with |j| <= m, grouped by total degree (shell), each
// shell in a fixed deterministic order.
std::vector<std::vector<int>> enumerate_degrees(int dim, int degree_max);

struct HermiteCoeffs {
  int dim = 0;
  int degree_max = 0;
  double scale = 1.0; // divisor applied to coordinates before encoding
  std::vector<std::vector<int>> degrees; // enumerate_degrees order
  std::vector<double> values;

  double coefficient(std::span<const int> degree) const;

  nlohmann::json to_json() const;
  static HermiteCoeffs from_json(const nlohmann::json& j);
};

// Polynomial split into homogeneous parts, each a packed symmetric tensor.
// The full-tensor sum over index tuples reproduces the monomial form.
struct Polynomial {
  int dim = 0;
  int degree_max = 0;
  std::map<int, SymTensor> homogeneous;

  double evaluate(std::span<const double> x) const;
};

// u_j = E[f_{j1}(x_1)...f_{jd}(x_d)] for every |j| <= m, with the shape
// measure as-is. `scale` is recorded for later decoding.
HermiteCoeffs encode(const Shape& shape, int degree_max, double scale = 1.0);

enum class ScaleMode { normalize, fixed, off };

// Fig.-style pipeline: normalize measure, subtract center, apply the scale
// mode, encode. With lattice_orthogonalize the coefficients are corrected by
// the lattice Gram matrix (grid shapes only).
HermiteCoeffs encode_shape(const Shape& shape, int degree_max,
                           ScaleMode scale_mode = ScaleMode::normalize,
                           double fixed_sigma = 1.0, bool lattice_orthogonalize = false);

// rho_hat(x) = sum_j u_j f_j(x) at cell centers; may go negative (truncated
// expansion), callers clip for image export.
std::vector<double> reconstruct(const HermiteCoeffs& coeffs, const GridInfo& grid);

// Lattice L2 error between a grid shape's density and the reconstruction of
// `coeffs` truncated at total degree m (m = -1 uses all coefficients).
double reconstruction_l2_error(const Shape& grid_shape, const HermiteCoeffs& coeffs,
                               int degree_limit = -1);

// Expands the Hermite series into plain monomial coefficients (Gaussian
// factor dropped) and regroups them into homogeneous symmetric tensors.
Polynomial to_polynomial(const HermiteCoeffs& coeffs);

} // namespace shapeinv
