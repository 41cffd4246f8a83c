#pragma once

#include "shapeinv/symtensor.hpp"

#include <nlohmann/json.hpp>

#include <span>
#include <string>
#include <vector>

namespace shapeinv {

// Multigraph over tensor slots: a vertex of order r exposes r ports, every
// port is matched by exactly one edge, and each edge denotes a summed index
// pair. Any such graph evaluates to a rotation invariant of its bound tensors.
struct ContractionGraph {
  struct Edge {
    int v0, p0, v1, p1;
  };

  std::vector<int> vertex_orders;
  std::vector<Edge> edges;
  std::vector<std::string> bind; // tensor slot names, one per vertex

  int num_ports() const;
  // Ports matched exactly once; bind size 0 or vertex count.
  void validate() const;
  bool connected() const;
  // Vertex index -> component id (0-based).
  std::vector<int> components() const;

  nlohmann::json to_json() const;
  static ContractionGraph from_json(const nlohmann::json& j);
};

// Full summation over 1..d per edge of the product of tensor entries,
// contracted pairwise (smallest intermediate first). tensors[i] binds
// vertex i; orders must match and dims agree.
double evaluate_graph(const ContractionGraph& graph, std::span<const SymTensor> tensors);

} // namespace shapeinv
