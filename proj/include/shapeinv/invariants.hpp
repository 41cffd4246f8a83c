#pragma once

#include "shapeinv/contraction.hpp"
#include "shapeinv/hermite.hpp"
#include "shapeinv/shape.hpp"
#include "shapeinv/symtensor.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <string>
#include <vector>

namespace shapeinv {

using TensorSet = std::map<int, SymTensor>;

struct CatalogEntry {
  std::string name;
  ContractionGraph graph;
  std::vector<int> binding; // tensor order per vertex
  int root = 1;             // vertex count unless overridden
  double weight = 1.0;
};

struct InvariantCatalog {
  std::vector<CatalogEntry> entries;

  nlohmann::json to_json() const;
  static InvariantCatalog from_json(const nlohmann::json& j);
};

// Connected-graph invariants over tensors up to order min(m, 4): scalar,
// vector norm, covariance trace powers, vector-covariance mixed terms, and
// order-3/4 Frobenius squares, Gram-matrix trace powers and cross links.
InvariantCatalog default_catalog(int dim, int order_max);

struct InvariantVector {
  std::vector<std::string> names;
  std::vector<double> values;
  int dim = 0;
  int order_max = 0;
  bool scale_normalized = false;
};

// Raw graph values, one per catalog entry, fixed summation order.
std::vector<double> raw_invariants(const TensorSet& tensors, const InvariantCatalog& catalog);

// Entry value = sign(v) |v|^(1/root) * weight; the signed root keeps
// odd invariants real.
InvariantVector feature_vector(const MomentSet& moments, const InvariantCatalog& catalog);
InvariantVector feature_vector(const Polynomial& poly, const InvariantCatalog& catalog);

enum class DistanceNorm { L2, Linf };

double similarity_distance(const InvariantVector& a, const InvariantVector& b,
                           DistanceNorm norm = DistanceNorm::L2);

struct EquivalenceReport {
  bool equivalent = false;
  std::string worst_name;
  double worst_delta = 0.0;
  std::vector<std::string> names;
  std::vector<double> deltas;
};

// Necessary-but-not-sufficient test for orders >= 3: true iff every catalog
// invariant matches within tol (relative where |reference| > 1, absolute
// otherwise).
EquivalenceReport rotation_equivalence_test(const MomentSet& p, const MomentSet& q, double tol);

} // namespace shapeinv
