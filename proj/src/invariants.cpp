#include "shapeinv/invariants.hpp"

#include "shapeinv/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace shapeinv {

nlohmann::json InvariantCatalog::to_json() const {
  nlohmann::json j = nlohmann::json::array();
  for (const CatalogEntry& e : entries) {
    nlohmann::json entry = e.graph.to_json();
    entry["name"] = e.name;
    entry["root"] = e.root;
    entry["weight"] = e.weight;
    j.push_back(entry);
  }
  return j;
}

InvariantCatalog InvariantCatalog::from_json(const nlohmann::json& j) {
  InvariantCatalog catalog;
  for (const auto& item : j) {
    CatalogEntry e;
    e.graph = ContractionGraph::from_json(item);
    e.name = item.at("name").get<std::string>();
    e.root = item.contains("root") ? item.at("root").get<int>()
                                   : static_cast<int>(e.graph.vertex_orders.size());
    e.weight = item.contains("weight") ? item.at("weight").get<double>() : 1.0;
    e.binding = e.graph.vertex_orders;
    catalog.entries.push_back(std::move(e));
  }
  return catalog;
}

namespace {

using Edge = ContractionGraph::Edge;

CatalogEntry make_entry(std::string name, std::vector<int> orders, std::vector<Edge> edges) {
  CatalogEntry e;
  e.name = std::move(name);
  e.graph.vertex_orders = std::move(orders);
  e.graph.edges = std::move(edges);
  for (int order : e.graph.vertex_orders) {
    e.graph.bind.push_back("p" + std::to_string(order));
  }
  e.binding = e.graph.vertex_orders;
  e.root = static_cast<int>(e.graph.vertex_orders.size());
  e.graph.validate();
  return e;
}

// Cycle of i order-2 vertices: Tr([p]^i); i = 1 is a self-loop (trace).
CatalogEntry cov_trace_power(int i) {
  std::vector<int> orders(static_cast<std::size_t>(i), 2);
  std::vector<Edge> edges;
  for (int k = 0; k < i; ++k) edges.push_back({k, 1, (k + 1) % i, 0});
  return make_entry("cov_tr_pow_" + std::to_string(i), std::move(orders), std::move(edges));
}

// Path vec - [p]^i - vec: sum_ab p_a ([p]^i)_ab p_b.
CatalogEntry mixed_vec_cov(int i) {
  std::vector<int> orders{1};
  orders.insert(orders.end(), static_cast<std::size_t>(i), 2);
  orders.push_back(1);
  std::vector<Edge> edges;
  for (int k = 0; k + 1 < static_cast<int>(orders.size()); ++k) {
    edges.push_back({k, k == 0 ? 0 : 1, k + 1, 0});
  }
  return make_entry("vec_cov_vec_" + std::to_string(i), std::move(orders), std::move(edges));
}

// Two order-r vertices with all ports paired: sum of squared entries.
CatalogEntry order_frob2(int r) {
  std::vector<Edge> edges;
  for (int p = 0; p < r; ++p) edges.push_back({0, p, 1, p});
  return make_entry("m" + std::to_string(r) + "_frob2", {r, r}, std::move(edges));
}

// Tr(G^i) for the Gram matrix of an order-r tensor: pairs of order-r
// vertices joined over r-f ports, chained cyclically over the remaining f
// free ports (f = 1 for order 3, f = 2 for order 4).
CatalogEntry gram_trace_power(int r, int free_ports, int i) {
  const int linked = r - free_ports;
  std::vector<int> orders(static_cast<std::size_t>(2 * i), r);
  std::vector<Edge> edges;
  for (int k = 0; k < i; ++k) {
    const int a = 2 * k, b = 2 * k + 1;
    for (int p = 0; p < linked; ++p) edges.push_back({a, free_ports + p, b, free_ports + p});
    const int next = (2 * k + 2) % (2 * i);
    for (int p = 0; p < free_ports; ++p) edges.push_back({b, p, next, p});
  }
  return make_entry("m" + std::to_string(r) + "_gram_tr_" + std::to_string(i),
                    std::move(orders), std::move(edges));
}

// sum_abc p_abc p_a p_b p_c.
CatalogEntry m3_vec3() {
  return make_entry("m3_vec3", {3, 1, 1, 1}, {{0, 0, 1, 0}, {0, 1, 2, 0}, {0, 2, 3, 0}});
}

// Tr(M [p]) with M_ab = sum_cd p_acd p_bcd.
CatalogEntry m3_cov_frob() {
  return make_entry("m3_cov_frob", {3, 3, 2},
                    {{0, 1, 1, 1}, {0, 2, 1, 2}, {0, 0, 2, 0}, {1, 0, 2, 1}});
}

// sum_abc p_abcc p_ab (partial trace of the order-4 tensor against [p]).
CatalogEntry m4_cov_frob() {
  return make_entry("m4_cov_frob", {4, 2}, {{0, 2, 0, 3}, {0, 0, 1, 0}, {0, 1, 1, 1}});
}

// sum p_abcd p_abe p_cde, the order-4 / order-3 bridge.
CatalogEntry m4_m3_link() {
  return make_entry("m4_m3_link", {4, 3, 3},
                    {{0, 0, 1, 0}, {0, 1, 1, 1}, {0, 2, 2, 0}, {0, 3, 2, 1}, {1, 2, 2, 2}});
}

} // namespace

InvariantCatalog default_catalog(int dim, int order_max) {
  if (dim < 1) throw std::invalid_argument("default_catalog: dim must be >= 1");
  if (order_max < 2) throw std::invalid_argument("default_catalog: order_max must be >= 2");
  InvariantCatalog catalog;
  catalog.entries.push_back(make_entry("p0", {0}, {}));
  catalog.entries.push_back(make_entry("p1_norm2", {1, 1}, {{0, 0, 1, 0}}));
  for (int i = 1; i <= dim; ++i) catalog.entries.push_back(cov_trace_power(i));
  for (int i = 0; i <= dim; ++i) catalog.entries.push_back(mixed_vec_cov(i));
  if (order_max >= 3) {
    catalog.entries.push_back(order_frob2(3));
    for (int i = 1; i <= dim; ++i) catalog.entries.push_back(gram_trace_power(3, 1, i));
    catalog.entries.push_back(m3_vec3());
    catalog.entries.push_back(m3_cov_frob());
  }
  if (order_max >= 4) {
    catalog.entries.push_back(order_frob2(4));
    for (int i = 1; i <= dim * dim; ++i) catalog.entries.push_back(gram_trace_power(4, 2, i));
    catalog.entries.push_back(m4_cov_frob());
    catalog.entries.push_back(m4_m3_link());
  }
  return catalog;
}

std::vector<double> raw_invariants(const TensorSet& tensors, const InvariantCatalog& catalog) {
  std::vector<double> values;
  values.reserve(catalog.entries.size());
  for (const CatalogEntry& entry : catalog.entries) {
    std::vector<SymTensor> bound;
    bound.reserve(entry.binding.size());
    for (int order : entry.binding) {
      const auto it = tensors.find(order);
      if (it == tensors.end()) {
        throw MismatchError("raw_invariants: missing tensor of order " + std::to_string(order) +
                            " for '" + entry.name + "'");
      }
      bound.push_back(it->second);
    }
    values.push_back(evaluate_graph(entry.graph, bound));
  }
  return values;
}

namespace {

InvariantVector features_from(const TensorSet& tensors, const InvariantCatalog& catalog,
                              int dim, int order_max, bool scale_normalized) {
  const std::vector<double> raw = raw_invariants(tensors, catalog);
  InvariantVector out;
  out.dim = dim;
  out.order_max = order_max;
  out.scale_normalized = scale_normalized;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const CatalogEntry& entry = catalog.entries[i];
    // Roundoff-level raw values (e.g. odd moments of a centered shape) would
    // be amplified by the fractional root; treat them as exact zeros.
    const double v = std::abs(raw[i]) < 1e-20 ? 0.0 : raw[i];
    const double rooted =
        std::copysign(std::pow(std::abs(v), 1.0 / static_cast<double>(entry.root)), v);
    out.names.push_back(entry.name);
    out.values.push_back(rooted * entry.weight);
  }
  return out;
}

} // namespace

InvariantVector feature_vector(const MomentSet& moments, const InvariantCatalog& catalog) {
  return features_from(moments.tensors, catalog, moments.dim, moments.order_max,
                       moments.scale_normalized);
}

InvariantVector feature_vector(const Polynomial& poly, const InvariantCatalog& catalog) {
  return features_from(poly.homogeneous, catalog, poly.dim, poly.degree_max, false);
}

double similarity_distance(const InvariantVector& a, const InvariantVector& b,
                           DistanceNorm norm) {
  if (a.names != b.names) throw MismatchError("similarity_distance: catalog mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double diff = std::abs(a.values[i] - b.values[i]);
    if (norm == DistanceNorm::L2) {
      acc += diff * diff;
    } else {
      acc = std::max(acc, diff);
    }
  }
  return norm == DistanceNorm::L2 ? std::sqrt(acc) : acc;
}

EquivalenceReport rotation_equivalence_test(const MomentSet& p, const MomentSet& q, double tol) {
  if (p.dim != q.dim) throw MismatchError("rotation_equivalence_test: dimension mismatch");
  if (p.order_max != q.order_max) {
    throw MismatchError("rotation_equivalence_test: order mismatch");
  }
  if (p.centered != q.centered || p.scale_normalized != q.scale_normalized) {
    throw MismatchError("rotation_equivalence_test: normalization flag mismatch");
  }
  const InvariantCatalog catalog = default_catalog(p.dim, std::min(p.order_max, 4));
  const std::vector<double> vp = raw_invariants(p.tensors, catalog);
  const std::vector<double> vq = raw_invariants(q.tensors, catalog);

  EquivalenceReport report;
  report.equivalent = true;
  double worst_ratio = -1.0;
  for (std::size_t i = 0; i < vp.size(); ++i) {
    const double ref = std::abs(vp[i]);
    const double delta = std::abs(vp[i] - vq[i]);
    const double normalized = ref > 1.0 ? delta / ref : delta;
    report.names.push_back(catalog.entries[i].name);
    report.deltas.push_back(normalized);
    if (normalized > tol) report.equivalent = false;
    if (normalized > worst_ratio) {
      worst_ratio = normalized;
      report.worst_name = catalog.entries[i].name;
      report.worst_delta = normalized;
    }
  }
  return report;
}

} // namespace shapeinv
