#include "shapeinv/hermite.hpp"

#include "shapeinv/errors.hpp"

#include <Eigen/Dense>

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

namespace shapeinv {

namespace {

constexpr double kPi = std::numbers::pi;

} // namespace

double hermite_fn(int degree, double x) {
  if (degree < 0) throw std::invalid_argument("hermite_fn: degree must be >= 0");
  double prev = 0.0;
  double current = std::pow(kPi, -0.25) * std::exp(-0.5 * x * x);
  for (int j = 0; j < degree; ++j) {
    const double next = x * std::sqrt(2.0 / (j + 1)) * current -
                        std::sqrt(static_cast<double>(j) / (j + 1)) * prev;
    prev = current;
    current = next;
  }
  return current;
}

void hermite_fn_all(int jmax, double x, std::span<double> out) {
  if (static_cast<int>(out.size()) != jmax + 1) {
    throw MismatchError("hermite_fn_all: output span size mismatch");
  }
  out[0] = std::pow(kPi, -0.25) * std::exp(-0.5 * x * x);
  if (jmax == 0) return;
  out[1] = x * std::sqrt(2.0) * out[0];
  for (int j = 1; j < jmax; ++j) {
    out[static_cast<std::size_t>(j) + 1] =
        x * std::sqrt(2.0 / (j + 1)) * out[static_cast<std::size_t>(j)] -
        std::sqrt(static_cast<double>(j) / (j + 1)) * out[static_cast<std::size_t>(j) - 1];
  }
}

namespace {

void compositions(int remaining, int pos, int dim, std::vector<int>& current,
                  std::vector<std::vector<int>>& out) {
  if (pos == dim - 1) {
    current[static_cast<std::size_t>(pos)] = remaining;
    out.push_back(current);
    return;
  }
  for (int v = 0; v <= remaining; ++v) {
    current[static_cast<std::size_t>(pos)] = v;
    compositions(remaining - v, pos + 1, dim, current, out);
  }
}

} // namespace

std::vector<std::vector<int>> enumerate_degrees(int dim, int degree_max) {
  std::vector<std::vector<int>> out;
  std::vector<int> current(static_cast<std::size_t>(dim), 0);
  for (int r = 0; r <= degree_max; ++r) compositions(r, 0, dim, current, out);
  return out;
}

double HermiteCoeffs::coefficient(std::span<const int> degree) const {
  for (std::size_t i = 0; i < degrees.size(); ++i) {
    if (std::equal(degrees[i].begin(), degrees[i].end(), degree.begin(), degree.end())) {
      return values[i];
    }
  }
  throw MismatchError("HermiteCoeffs: degree not present");
}

nlohmann::json HermiteCoeffs::to_json() const {
  nlohmann::json j;
  j["dim"] = dim;
  j["degree_max"] = degree_max;
  j["scale"] = scale;
  j["coeffs"] = nlohmann::json::array();
  for (std::size_t i = 0; i < degrees.size(); ++i) {
    j["coeffs"].push_back({{"j", degrees[i]}, {"u", values[i]}});
  }
  return j;
}

HermiteCoeffs HermiteCoeffs::from_json(const nlohmann::json& j) {
  HermiteCoeffs c;
  c.dim = j.at("dim").get<int>();
  c.degree_max = j.at("degree_max").get<int>();
  c.scale = j.at("scale").get<double>();
  for (const auto& entry : j.at("coeffs")) {
    c.degrees.push_back(entry.at("j").get<std::vector<int>>());
    c.values.push_back(entry.at("u").get<double>());
  }
  return c;
}

HermiteCoeffs encode(const Shape& shape, int degree_max, double scale) {
  if (degree_max < 0) throw std::invalid_argument("encode: degree_max must be >= 0");
  HermiteCoeffs out;
  out.dim = shape.dim;
  out.degree_max = degree_max;
  out.scale = scale;
  out.degrees = enumerate_degrees(shape.dim, degree_max);
  out.values.assign(out.degrees.size(), 0.0);

  std::vector<double> table(static_cast<std::size_t>(shape.dim) *
                            static_cast<std::size_t>(degree_max + 1));
  for (std::size_t i = 0; i < shape.num_points(); ++i) {
    const auto p = shape.point(i);
    for (int a = 0; a < shape.dim; ++a) {
      hermite_fn_all(degree_max, p[static_cast<std::size_t>(a)],
                     std::span<double>(table.data() +
                                           static_cast<std::size_t>(a) *
                                               static_cast<std::size_t>(degree_max + 1),
                                       static_cast<std::size_t>(degree_max + 1)));
    }
    const double w = shape.weights[i];
    for (std::size_t k = 0; k < out.degrees.size(); ++k) {
      double prod = w;
      for (int a = 0; a < shape.dim; ++a) {
        prod *= table[static_cast<std::size_t>(a) * static_cast<std::size_t>(degree_max + 1) +
                      static_cast<std::size_t>(out.degrees[k][static_cast<std::size_t>(a)])];
      }
      out.values[k] += prod;
    }
  }
  return out;
}

namespace {

// Hermite product basis values at every cell of a grid, one row per cell.
Eigen::MatrixXd lattice_basis(const GridInfo& grid,
                              const std::vector<std::vector<int>>& degrees, int degree_max) {
  const int dim = static_cast<int>(grid.origin.size());
  const std::size_t cells = grid.cell_count();
  Eigen::MatrixXd basis(static_cast<Eigen::Index>(cells),
                        static_cast<Eigen::Index>(degrees.size()));
  std::vector<double> table(static_cast<std::size_t>(dim) *
                            static_cast<std::size_t>(degree_max + 1));
  for (std::size_t c = 0; c < cells; ++c) {
    const auto x = grid.cell_center(c);
    for (int a = 0; a < dim; ++a) {
      hermite_fn_all(degree_max, x[static_cast<std::size_t>(a)],
                     std::span<double>(table.data() +
                                           static_cast<std::size_t>(a) *
                                               static_cast<std::size_t>(degree_max + 1),
                                       static_cast<std::size_t>(degree_max + 1)));
    }
    for (std::size_t k = 0; k < degrees.size(); ++k) {
      double prod = 1.0;
      for (int a = 0; a < dim; ++a) {
        prod *= table[static_cast<std::size_t>(a) * static_cast<std::size_t>(degree_max + 1) +
                      static_cast<std::size_t>(degrees[k][static_cast<std::size_t>(a)])];
      }
      basis(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(k)) = prod;
    }
  }
  return basis;
}

} // namespace

HermiteCoeffs encode_shape(const Shape& shape, int degree_max, ScaleMode scale_mode,
                           double fixed_sigma, bool lattice_orthogonalize) {
  Shape s = center(shape);
  double scale = 1.0;
  switch (scale_mode) {
    case ScaleMode::normalize: {
      auto [normalized, divisor] = scale_normalize(s);
      s = std::move(normalized);
      scale = divisor;
      break;
    }
    case ScaleMode::fixed: {
      if (!(fixed_sigma > 0.0)) throw std::invalid_argument("encode_shape: fixed sigma <= 0");
      for (double& c : s.coords) c /= fixed_sigma;
      if (s.grid) {
        for (double& o : s.grid->origin) o /= fixed_sigma;
        for (double& sp : s.grid->spacing) sp /= fixed_sigma;
      }
      scale = fixed_sigma;
      break;
    }
    case ScaleMode::off:
      break;
  }
  HermiteCoeffs coeffs = encode(s, degree_max, scale);
  if (lattice_orthogonalize) {
    if (!s.grid) {
      throw MismatchError("encode_shape: lattice orthogonalization needs a grid shape");
    }
    const Eigen::MatrixXd basis = lattice_basis(*s.grid, coeffs.degrees, degree_max);
    const Eigen::MatrixXd gram = basis.transpose() * basis * s.grid->cell_volume();
    Eigen::Map<Eigen::VectorXd> u(coeffs.values.data(),
                                  static_cast<Eigen::Index>(coeffs.values.size()));
    const Eigen::VectorXd corrected = gram.ldlt().solve(u);
    u = corrected;
  }
  return coeffs;
}

std::vector<double> reconstruct(const HermiteCoeffs& coeffs, const GridInfo& grid) {
  if (static_cast<int>(grid.origin.size()) != coeffs.dim) {
    throw MismatchError("reconstruct: grid dimension mismatch");
  }
  const std::size_t cells = grid.cell_count();
  std::vector<double> field(cells, 0.0);
  std::vector<double> table(static_cast<std::size_t>(coeffs.dim) *
                            static_cast<std::size_t>(coeffs.degree_max + 1));
  for (std::size_t c = 0; c < cells; ++c) {
    const auto x = grid.cell_center(c);
    for (int a = 0; a < coeffs.dim; ++a) {
      hermite_fn_all(coeffs.degree_max, x[static_cast<std::size_t>(a)],
                     std::span<double>(
                         table.data() + static_cast<std::size_t>(a) *
                                            static_cast<std::size_t>(coeffs.degree_max + 1),
                         static_cast<std::size_t>(coeffs.degree_max + 1)));
    }
    double acc = 0.0;
    for (std::size_t k = 0; k < coeffs.degrees.size(); ++k) {
      double prod = coeffs.values[k];
      for (int a = 0; a < coeffs.dim; ++a) {
        prod *= table[static_cast<std::size_t>(a) *
                          static_cast<std::size_t>(coeffs.degree_max + 1) +
                      static_cast<std::size_t>(coeffs.degrees[k][static_cast<std::size_t>(a)])];
      }
      acc += prod;
    }
    field[c] = acc;
  }
  return field;
}

double reconstruction_l2_error(const Shape& grid_shape, const HermiteCoeffs& coeffs,
                               int degree_limit) {
  if (!grid_shape.grid) {
    throw MismatchError("reconstruction_l2_error: shape carries no grid");
  }
  HermiteCoeffs truncated = coeffs;
  if (degree_limit >= 0) {
    std::vector<std::vector<int>> degrees;
    std::vector<double> values;
    for (std::size_t k = 0; k < coeffs.degrees.size(); ++k) {
      int total = 0;
      for (int j : coeffs.degrees[k]) total += j;
      if (total <= degree_limit) {
        degrees.push_back(coeffs.degrees[k]);
        values.push_back(coeffs.values[k]);
      }
    }
    truncated.degrees = std::move(degrees);
    truncated.values = std::move(values);
  }
  const std::vector<double> field = reconstruct(truncated, *grid_shape.grid);
  const double cell_volume = grid_shape.grid->cell_volume();
  double err2 = 0.0;
  for (std::size_t c = 0; c < field.size(); ++c) {
    const double density = grid_shape.weights[c] / cell_volume;
    const double diff = density - field[c];
    err2 += diff * diff * cell_volume;
  }
  return std::sqrt(err2);
}

namespace {

using boost::multiprecision::cpp_int;

// Integer coefficients of the physicists' Hermite polynomials,
// h_{j+1} = 2x h_j - 2j h_{j-1}; table[j][k] multiplies x^k.
std::vector<std::vector<cpp_int>> hermite_poly_coeffs(int jmax) {
  std::vector<std::vector<cpp_int>> table(static_cast<std::size_t>(jmax) + 1);
  table[0] = {cpp_int(1)};
  if (jmax == 0) return table;
  table[1] = {cpp_int(0), cpp_int(2)};
  for (int j = 1; j < jmax; ++j) {
    std::vector<cpp_int> next(static_cast<std::size_t>(j) + 2, cpp_int(0));
    for (std::size_t k = 0; k < table[static_cast<std::size_t>(j)].size(); ++k) {
      next[k + 1] += 2 * table[static_cast<std::size_t>(j)][k];
    }
    for (std::size_t k = 0; k < table[static_cast<std::size_t>(j) - 1].size(); ++k) {
      next[k] -= 2 * j * table[static_cast<std::size_t>(j) - 1][k];
    }
    table[static_cast<std::size_t>(j) + 1] = std::move(next);
  }
  return table;
}

} // namespace

Polynomial to_polynomial(const HermiteCoeffs& coeffs) {
  Polynomial poly;
  poly.dim = coeffs.dim;
  poly.degree_max = coeffs.degree_max;

  const auto table = hermite_poly_coeffs(coeffs.degree_max);
  std::map<std::vector<int>, double> monomials; // power vector -> coefficient

  for (std::size_t k = 0; k < coeffs.degrees.size(); ++k) {
    const double u = coeffs.values[k];
    if (u == 0.0) continue;
    const std::vector<int>& j = coeffs.degrees[k];
    long double norm = 1.0L;
    for (int ja : j) {
      norm /= sqrtl(powl(2.0L, ja) * tgammal(static_cast<long double>(ja) + 1.0L) *
                    sqrtl(static_cast<long double>(kPi)));
    }
    // odometer over per-axis powers alpha_a in {j_a, j_a - 2, ...}
    std::vector<int> alpha(j.begin(), j.end());
    for (;;) {
      cpp_int prod(1);
      for (int a = 0; a < coeffs.dim; ++a) {
        prod *= table[static_cast<std::size_t>(j[static_cast<std::size_t>(a)])]
                     [static_cast<std::size_t>(alpha[static_cast<std::size_t>(a)])];
      }
      if (prod != 0) {
        monomials[alpha] +=
            u * static_cast<double>(norm) * prod.convert_to<double>();
      }
      int a = 0;
      while (a < coeffs.dim) {
        if (alpha[static_cast<std::size_t>(a)] >= 2) {
          alpha[static_cast<std::size_t>(a)] -= 2;
          break;
        }
        alpha[static_cast<std::size_t>(a)] = j[static_cast<std::size_t>(a)];
        ++a;
      }
      if (a == coeffs.dim) break;
    }
  }

  for (int r = 0; r <= coeffs.degree_max; ++r) {
    SymTensor t(coeffs.dim, r);
    for_each_packed(coeffs.dim, r, [&](std::span<const int> idx, std::size_t offset) {
      std::vector<int> alpha(static_cast<std::size_t>(coeffs.dim), 0);
      for (int axis : idx) ++alpha[static_cast<std::size_t>(axis)];
      const auto it = monomials.find(alpha);
      if (it != monomials.end()) {
        t[offset] = it->second / tuple_multiplicity(idx);
      }
    });
    poly.homogeneous.emplace(r, std::move(t));
  }
  return poly;
}

double Polynomial::evaluate(std::span<const double> x) const {
  double total = 0.0;
  for (const auto& [r, tensor] : homogeneous) {
    for_each_packed(dim, r, [&](std::span<const int> idx, std::size_t offset) {
      double prod = tuple_multiplicity(idx) * tensor[offset];
      for (int axis : idx) prod *= x[static_cast<std::size_t>(axis)];
      total += prod;
    });
  }
  return total;
}

} // namespace shapeinv
