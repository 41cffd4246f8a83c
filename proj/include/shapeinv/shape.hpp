#pragma once

#include "shapeinv/symtensor.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace shapeinv {

// Lattice metadata retained for grid shapes (PGM ingestion, reconstruction).
struct GridInfo {
  std::vector<double> origin;  // coordinate of cell (0,..,0) center
  std::vector<double> spacing; // per-axis cell size
  std::vector<int> extents;    // cells per axis

  double cell_volume() const;
  std::size_t cell_count() const;
  // Cell center, row-major flat index with axis 0 fastest.
  std::vector<double> cell_center(std::size_t flat) const;
};

// Weighted point cloud with a normalized measure defining E[]. Grid shapes
// carry their lattice metadata and are stored as the equivalent cell-center
// point set (weight = grayvalue * cell volume, then normalized).
struct Shape {
  int dim = 0;
  std::vector<double> coords;  // n * dim, point-major
  std::vector<double> weights; // n, sums to 1 after normalize_measure
  double total_weight = 0.0;   // pre-normalization mass
  std::optional<GridInfo> grid;
  bool centered = false;
  bool scale_normalized = false;

  std::size_t num_points() const { return weights.size(); }
  std::span<const double> point(std::size_t i) const {
    return std::span<const double>(coords.data() + i * static_cast<std::size_t>(dim),
                                   static_cast<std::size_t>(dim));
  }
  void normalize_measure();
};

enum class PointFormat { csv, xyz };
enum class XyzWeighting { unit, mass };

Shape make_shape(int dim, std::vector<double> coords, std::vector<double> weights);

// CSV: d coordinates per row, optional trailing weight column (detected via
// dim_hint), optional header. XYZ: count / comment / element x y z.
Shape load_points(const std::filesystem::path& path, PointFormat format, int dim_hint = -1,
                  XyzWeighting weighting = XyzWeighting::unit);

// PGM P2/P5, maxval <= 65535; pixel (row, col) -> (col, rows-1-row).
Shape load_grid(const std::filesystem::path& path);

double expectation(const Shape& shape,
                   const std::function<double(std::span<const double>)>& f);

std::vector<double> center_of_mass(const Shape& shape);

// Shifts coordinates so E[x_a] = 0; sets the centered flag.
Shape center(const Shape& shape);

// E[x_a x_b] of a centered shape.
SymTensor covariance(const Shape& shape);

// Divides coordinates by sqrt(Tr(cov)/d) so the covariance trace becomes d.
// Returns the divisor. Throws DegenerateShapeError on zero trace.
std::pair<Shape, double> scale_normalize(const Shape& shape);

// Packed symmetric order-r tensor of centered coordinate products.
SymTensor central_moment(const Shape& shape, int order);

struct MomentSet {
  int dim = 0;
  int order_max = 0;
  std::map<int, SymTensor> tensors;
  bool centered = false;
  bool scale_normalized = false;
};

MomentSet compute_moments(const Shape& shape, int order_max);

} // namespace shapeinv
