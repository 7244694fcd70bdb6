#pragma once

#include "dgn/core.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace dgn {

/// Undirected edge with u < v.
struct Edge {
  Index u = 0;
  Index v = 0;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Keyed by the canonical (min, max) pair; the same vector serves both directions.
using EdgeFeatureMap = std::map<std::pair<Index, Index>, Eigen::VectorXd>;

/// Simple undirected graph over dense node ids 0..n-1.
///
/// Immutable after construction. Edges are kept sorted and neighbor lists are
/// stored in CSR form with ascending ids, so every traversal is deterministic.
class Graph {
 public:
  Graph() = default;

  Index node_count() const noexcept { return node_count_; }
  Index edge_count() const noexcept { return static_cast<Index>(edges_.size()); }
  std::span<const Edge> edges() const noexcept { return edges_; }

  std::span<const Index> neighbors(Index i) const {
    return {neighbor_ids_.data() + offsets_[i], neighbor_ids_.data() + offsets_[i + 1]};
  }
  Index degree(Index i) const { return offsets_[i + 1] - offsets_[i]; }
  bool has_edge(Index i, Index j) const;

  const std::optional<Eigen::MatrixXd>& node_features() const noexcept { return node_features_; }
  const EdgeFeatureMap& edge_features() const noexcept { return edge_features_; }

  Graph with_node_features(Eigen::MatrixXd features) const;
  Graph with_edge_features(EdgeFeatureMap features) const;
  /// Feature vector of edge (i, j) in either orientation, or nullptr.
  const Eigen::VectorXd* edge_feature(Index i, Index j) const;

  bool same_structure(const Graph& other) const noexcept {
    return node_count_ == other.node_count_ && edges_ == other.edges_;
  }
  bool operator==(const Graph& other) const;

 private:
  friend Graph build_graph(Index, std::span<const std::pair<Index, Index>>);

  Index node_count_ = 0;
  std::vector<Edge> edges_;
  std::vector<Index> offsets_{0};
  std::vector<Index> neighbor_ids_;
  std::optional<Eigen::MatrixXd> node_features_;
  EdgeFeatureMap edge_features_;
};

struct ComponentLabeling {
  std::vector<Index> labels;
  Index component_count = 0;

  /// Members of component c in ascending node order.
  std::vector<Index> members(Index c) const;
};

/// Canonical undirected graph; duplicate and reversed pairs are merged.
/// Throws ValidationError on out-of-range endpoints and self-loops.
Graph build_graph(Index node_count, std::span<const std::pair<Index, Index>> edge_list);
inline Graph build_graph(Index node_count, std::initializer_list<std::pair<Index, Index>> edge_list) {
  return build_graph(node_count, std::span<const std::pair<Index, Index>>(edge_list.begin(), edge_list.size()));
}

Graph gen_path(Index n);
Graph gen_cycle(Index n);
/// Row-major flattening over dims in the given order (last axis fastest).
Graph gen_lattice(std::span<const Index> dims);
inline Graph gen_lattice(std::initializer_list<Index> dims) {
  return gen_lattice(std::span<const Index>(dims.begin(), dims.size()));
}
/// Uniform random labelled tree (Pruefer decoding).
Graph gen_random_tree(Index n, std::uint64_t seed);
/// Two planted communities, each a random spanning tree plus Bernoulli(p_in)
/// chords, joined by Bernoulli(p_out) cross edges and at least one bridge.
Graph gen_two_community(Index n1, Index n2, double p_in, double p_out, std::uint64_t seed);

ComponentLabeling connected_components(const Graph& g);
SparseRealMatrix adjacency(const Graph& g);
Eigen::VectorXd degree_vector(const Graph& g);

/// Relabel nodes: node i of g becomes node perm[i].
Graph permute_nodes(const Graph& g, std::span<const Index> perm);
/// Nodes of b are shifted by a.node_count(). Features are dropped.
Graph disjoint_union(const Graph& a, const Graph& b);

/// Node coordinates of a lattice index under row-major flattening.
std::vector<Index> lattice_coordinates(std::span<const Index> dims, Index node);
Index lattice_index(std::span<const Index> dims, std::span<const Index> coords);

/// SHA-256 over a canonical encoding of structure and features.
std::string graph_hash(const Graph& g);

}  // namespace dgn
