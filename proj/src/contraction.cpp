#include "shapeinv/contraction.hpp"

#include "shapeinv/errors.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace shapeinv {

int ContractionGraph::num_ports() const {
  return std::accumulate(vertex_orders.begin(), vertex_orders.end(), 0);
}

void ContractionGraph::validate() const {
  const int nv = static_cast<int>(vertex_orders.size());
  std::vector<std::vector<int>> seen(vertex_orders.size());
  for (int v = 0; v < nv; ++v) {
    if (vertex_orders[static_cast<std::size_t>(v)] < 0) {
      throw std::invalid_argument("ContractionGraph: negative vertex order");
    }
    seen[static_cast<std::size_t>(v)].assign(
        static_cast<std::size_t>(vertex_orders[static_cast<std::size_t>(v)]), 0);
  }
  for (const Edge& e : edges) {
    for (const auto& [v, p] : {std::pair{e.v0, e.p0}, std::pair{e.v1, e.p1}}) {
      if (v < 0 || v >= nv) throw std::invalid_argument("ContractionGraph: vertex out of range");
      if (p < 0 || p >= vertex_orders[static_cast<std::size_t>(v)]) {
        throw std::invalid_argument("ContractionGraph: port out of range");
      }
      ++seen[static_cast<std::size_t>(v)][static_cast<std::size_t>(p)];
    }
  }
  for (const auto& ports : seen) {
    for (int count : ports) {
      if (count != 1) throw std::invalid_argument("ContractionGraph: dangling or doubled port");
    }
  }
  if (!bind.empty() && static_cast<int>(bind.size()) != nv) {
    throw std::invalid_argument("ContractionGraph: bind size mismatch");
  }
}

std::vector<int> ContractionGraph::components() const {
  const int nv = static_cast<int>(vertex_orders.size());
  std::vector<int> comp(static_cast<std::size_t>(nv), -1);
  int next = 0;
  for (int start = 0; start < nv; ++start) {
    if (comp[static_cast<std::size_t>(start)] >= 0) continue;
    std::vector<int> stack{start};
    comp[static_cast<std::size_t>(start)] = next;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (const Edge& e : edges) {
        int other = -1;
        if (e.v0 == v) other = e.v1;
        if (e.v1 == v) other = e.v0;
        if (other >= 0 && comp[static_cast<std::size_t>(other)] < 0) {
          comp[static_cast<std::size_t>(other)] = next;
          stack.push_back(other);
        }
      }
    }
    ++next;
  }
  return comp;
}

bool ContractionGraph::connected() const {
  const auto comp = components();
  return std::all_of(comp.begin(), comp.end(), [](int c) { return c == 0; });
}

nlohmann::json ContractionGraph::to_json() const {
  nlohmann::json j;
  j["vertices"] = vertex_orders;
  j["edges"] = nlohmann::json::array();
  for (const Edge& e : edges) j["edges"].push_back({e.v0, e.p0, e.v1, e.p1});
  j["bind"] = bind;
  return j;
}

ContractionGraph ContractionGraph::from_json(const nlohmann::json& j) {
  ContractionGraph g;
  g.vertex_orders = j.at("vertices").get<std::vector<int>>();
  for (const auto& e : j.at("edges")) {
    if (!e.is_array() || e.size() != 4) throw ParseError("graph edge must be [vi,pi,vj,pj]");
    g.edges.push_back({e[0].get<int>(), e[1].get<int>(), e[2].get<int>(), e[3].get<int>()});
  }
  if (j.contains("bind")) g.bind = j.at("bind").get<std::vector<std::string>>();
  g.validate();
  return g;
}

namespace {

// Intermediate of the pairwise contraction: dense data where label k has
// stride d^k.
struct Factor {
  std::vector<int> labels;
  std::vector<double> data;
};

std::vector<std::size_t> label_strides(std::size_t count, int d) {
  std::vector<std::size_t> s(count);
  std::size_t stride = 1;
  for (std::size_t k = 0; k < count; ++k) {
    s[k] = stride;
    stride *= static_cast<std::size_t>(d);
  }
  return s;
}

// Sums out the first label that appears twice inside the factor.
Factor trace_duplicate(const Factor& f, int d, std::size_t pos_a, std::size_t pos_b) {
  Factor out;
  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < f.labels.size(); ++k) {
    if (k != pos_a && k != pos_b) {
      keep.push_back(k);
      out.labels.push_back(f.labels[k]);
    }
  }
  const auto strides = label_strides(f.labels.size(), d);
  std::size_t out_size = 1;
  for (std::size_t k = 0; k < out.labels.size(); ++k) out_size *= static_cast<std::size_t>(d);
  out.data.assign(out_size, 0.0);

  std::vector<int> idx(keep.size(), 0);
  for (std::size_t flat = 0; flat < out_size; ++flat) {
    std::size_t rem = flat;
    std::size_t base = 0;
    for (std::size_t k = 0; k < keep.size(); ++k) {
      const auto digit = rem % static_cast<std::size_t>(d);
      rem /= static_cast<std::size_t>(d);
      base += digit * strides[keep[k]];
    }
    double acc = 0.0;
    for (int a = 0; a < d; ++a) {
      acc += f.data[base + static_cast<std::size_t>(a) * (strides[pos_a] + strides[pos_b])];
    }
    out.data[flat] = acc;
  }
  return out;
}

Factor contract_pair(const Factor& a, const Factor& b, int d) {
  std::vector<std::size_t> shared_a, shared_b, free_a, free_b;
  for (std::size_t k = 0; k < a.labels.size(); ++k) {
    const auto it = std::find(b.labels.begin(), b.labels.end(), a.labels[k]);
    if (it != b.labels.end()) {
      shared_a.push_back(k);
      shared_b.push_back(static_cast<std::size_t>(it - b.labels.begin()));
    } else {
      free_a.push_back(k);
    }
  }
  for (std::size_t k = 0; k < b.labels.size(); ++k) {
    if (std::find(a.labels.begin(), a.labels.end(), b.labels[k]) == a.labels.end()) {
      free_b.push_back(k);
    }
  }

  Factor out;
  for (auto k : free_a) out.labels.push_back(a.labels[k]);
  for (auto k : free_b) out.labels.push_back(b.labels[k]);

  const auto strides_a = label_strides(a.labels.size(), d);
  const auto strides_b = label_strides(b.labels.size(), d);
  std::size_t out_size = 1;
  for (std::size_t k = 0; k < out.labels.size(); ++k) out_size *= static_cast<std::size_t>(d);
  std::size_t shared_size = 1;
  for (std::size_t k = 0; k < shared_a.size(); ++k) shared_size *= static_cast<std::size_t>(d);
  out.data.assign(out_size, 0.0);

  for (std::size_t flat = 0; flat < out_size; ++flat) {
    std::size_t rem = flat;
    std::size_t base_a = 0, base_b = 0;
    for (std::size_t k = 0; k < free_a.size(); ++k) {
      const auto digit = rem % static_cast<std::size_t>(d);
      rem /= static_cast<std::size_t>(d);
      base_a += digit * strides_a[free_a[k]];
    }
    for (std::size_t k = 0; k < free_b.size(); ++k) {
      const auto digit = rem % static_cast<std::size_t>(d);
      rem /= static_cast<std::size_t>(d);
      base_b += digit * strides_b[free_b[k]];
    }
    double acc = 0.0;
    for (std::size_t s = 0; s < shared_size; ++s) {
      std::size_t srem = s;
      std::size_t off_a = base_a, off_b = base_b;
      for (std::size_t k = 0; k < shared_a.size(); ++k) {
        const auto digit = srem % static_cast<std::size_t>(d);
        srem /= static_cast<std::size_t>(d);
        off_a += digit * strides_a[shared_a[k]];
        off_b += digit * strides_b[shared_b[k]];
      }
      acc += a.data[off_a] * b.data[off_b];
    }
    out.data[flat] = acc;
  }
  return out;
}

} // namespace

double evaluate_graph(const ContractionGraph& graph, std::span<const SymTensor> tensors) {
  graph.validate();
  const std::size_t nv = graph.vertex_orders.size();
  if (tensors.size() != nv) throw MismatchError("evaluate_graph: tensor count mismatch");
  int d = 0;
  for (std::size_t v = 0; v < nv; ++v) {
    if (tensors[v].order() != graph.vertex_orders[v]) {
      throw MismatchError("evaluate_graph: vertex/tensor order mismatch");
    }
    if (v == 0) {
      d = tensors[v].dim();
    } else if (tensors[v].dim() != d) {
      throw MismatchError("evaluate_graph: tensor dimension mismatch");
    }
  }
  if (nv == 0) return 1.0;

  // one label per edge, factor labels in port order
  std::vector<Factor> factors(nv);
  for (std::size_t v = 0; v < nv; ++v) {
    factors[v].labels.assign(static_cast<std::size_t>(graph.vertex_orders[v]), -1);
    factors[v].data = tensors[v].to_dense();
  }
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    const auto& edge = graph.edges[e];
    factors[static_cast<std::size_t>(edge.v0)].labels[static_cast<std::size_t>(edge.p0)] =
        static_cast<int>(e);
    factors[static_cast<std::size_t>(edge.v1)].labels[static_cast<std::size_t>(edge.p1)] =
        static_cast<int>(e);
  }

  double scalar = 1.0;
  auto absorb_scalars = [&] {
    for (std::size_t i = 0; i < factors.size();) {
      if (factors[i].labels.empty()) {
        scalar *= factors[i].data[0];
        factors.erase(factors.begin() + static_cast<std::ptrdiff_t>(i));
      } else {
        ++i;
      }
    }
  };

  while (true) {
    // internal traces first
    bool traced = true;
    while (traced) {
      traced = false;
      for (std::size_t i = 0; i < factors.size(); ++i) {
        auto& f = factors[i];
        for (std::size_t a = 0; a < f.labels.size() && !traced; ++a) {
          for (std::size_t b = a + 1; b < f.labels.size() && !traced; ++b) {
            if (f.labels[a] == f.labels[b]) {
              f = trace_duplicate(f, d, a, b);
              traced = true;
            }
          }
        }
      }
    }
    absorb_scalars();
    if (factors.empty()) break;

    // pick the pair of label-sharing factors with the smallest result order
    std::size_t best_i = 0, best_j = 0;
    int best_order = -1;
    for (std::size_t i = 0; i < factors.size(); ++i) {
      for (std::size_t j = i + 1; j < factors.size(); ++j) {
        int shared = 0;
        for (int la : factors[i].labels) {
          if (std::find(factors[j].labels.begin(), factors[j].labels.end(), la) !=
              factors[j].labels.end()) {
            ++shared;
          }
        }
        if (shared == 0) continue;
        const int order = static_cast<int>(factors[i].labels.size() + factors[j].labels.size()) -
                          2 * shared;
        if (best_order < 0 || order < best_order) {
          best_order = order;
          best_i = i;
          best_j = j;
        }
      }
    }
    if (best_order < 0) {
      throw std::logic_error("evaluate_graph: no contractable pair for a validated graph");
    }
    Factor merged = contract_pair(factors[best_i], factors[best_j], d);
    factors.erase(factors.begin() + static_cast<std::ptrdiff_t>(best_j));
    factors[best_i] = std::move(merged);
  }
  return scalar;
}

} // namespace shapeinv
