#include "dgn/graph.hpp"

#include "dgn/hash.hpp"
#include "dgn/random.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <sstream>

namespace dgn {

bool Graph::has_edge(Index i, Index j) const {
  if (i < 0 || j < 0 || i >= node_count_ || j >= node_count_) return false;
  const auto nb = neighbors(i);
  return std::binary_search(nb.begin(), nb.end(), j);
}

Graph Graph::with_node_features(Eigen::MatrixXd features) const {
  if (features.rows() != node_count_) {
    throw ValidationError("node feature matrix has " + std::to_string(features.rows()) + " rows, expected " +
                          std::to_string(node_count_));
  }
  Graph g = *this;
  g.node_features_ = std::move(features);
  return g;
}

Graph Graph::with_edge_features(EdgeFeatureMap features) const {
  EdgeFeatureMap canonical;
  for (auto& [key, value] : features) {
    const auto [a, b] = key;
    if (!has_edge(a, b)) {
      throw ValidationError("edge feature for non-edge (" + std::to_string(a) + "," + std::to_string(b) + ")");
    }
    const auto canon = std::make_pair(std::min(a, b), std::max(a, b));
    const auto [it, inserted] = canonical.emplace(canon, value);
    if (!inserted && it->second != value) {
      throw ValidationError("conflicting edge features for (" + std::to_string(canon.first) + "," +
                            std::to_string(canon.second) + ")");
    }
  }
  Graph g = *this;
  g.edge_features_ = std::move(canonical);
  return g;
}

const Eigen::VectorXd* Graph::edge_feature(Index i, Index j) const {
  const auto it = edge_features_.find({std::min(i, j), std::max(i, j)});
  return it == edge_features_.end() ? nullptr : &it->second;
}

bool Graph::operator==(const Graph& other) const {
  if (!same_structure(other)) return false;
  if (node_features_.has_value() != other.node_features_.has_value()) return false;
  if (node_features_ && (node_features_->cols() != other.node_features_->cols() ||
                         *node_features_ != *other.node_features_)) {
    return false;
  }
  if (edge_features_.size() != other.edge_features_.size()) return false;
  for (const auto& [key, value] : edge_features_) {
    const auto it = other.edge_features_.find(key);
    if (it == other.edge_features_.end() || it->second.size() != value.size() || it->second != value) return false;
  }
  return true;
}

std::vector<Index> ComponentLabeling::members(Index c) const {
  std::vector<Index> out;
  for (Index i = 0; i < static_cast<Index>(labels.size()); ++i) {
    if (labels[i] == c) out.push_back(i);
  }
  return out;
}

Graph build_graph(Index node_count, std::span<const std::pair<Index, Index>> edge_list) {
  if (node_count < 0) throw ValidationError("node count must be non-negative");
  std::vector<Edge> edges;
  edges.reserve(edge_list.size());
  for (const auto& [a, b] : edge_list) {
    if (a < 0 || b < 0 || a >= node_count || b >= node_count) {
      throw ValidationError("edge (" + std::to_string(a) + "," + std::to_string(b) + "): endpoint " +
                            std::to_string(a < 0 || a >= node_count ? a : b) + " out of range for " +
                            std::to_string(node_count) + " nodes");
    }
    if (a == b) {
      throw ValidationError("edge (" + std::to_string(a) + "," + std::to_string(b) + ") is a self-loop");
    }
    edges.push_back({std::min(a, b), std::max(a, b)});
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  Graph g;
  g.node_count_ = node_count;
  g.edges_ = std::move(edges);
  std::vector<Index> deg(static_cast<std::size_t>(node_count), 0);
  for (const auto& e : g.edges_) {
    ++deg[e.u];
    ++deg[e.v];
  }
  g.offsets_.assign(static_cast<std::size_t>(node_count) + 1, 0);
  for (Index i = 0; i < node_count; ++i) g.offsets_[i + 1] = g.offsets_[i] + deg[i];
  g.neighbor_ids_.assign(static_cast<std::size_t>(g.offsets_.back()), 0);
  std::vector<Index> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
  for (const auto& e : g.edges_) {
    g.neighbor_ids_[cursor[e.u]++] = e.v;
    g.neighbor_ids_[cursor[e.v]++] = e.u;
  }
  for (Index i = 0; i < node_count; ++i) {
    std::sort(g.neighbor_ids_.begin() + g.offsets_[i], g.neighbor_ids_.begin() + g.offsets_[i + 1]);
  }
  return g;
}

Graph gen_path(Index n) {
  if (n < 1) throw ValidationError("path graph needs at least one node");
  std::vector<std::pair<Index, Index>> edges;
  for (Index i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  return build_graph(n, edges);
}

Graph gen_cycle(Index n) {
  if (n < 3) throw ValidationError("cycle graph needs at least three nodes");
  std::vector<std::pair<Index, Index>> edges;
  for (Index i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
  return build_graph(n, edges);
}

std::vector<Index> lattice_coordinates(std::span<const Index> dims, Index node) {
  std::vector<Index> coords(dims.size());
  for (std::size_t a = dims.size(); a-- > 0;) {
    coords[a] = node % dims[a];
    node /= dims[a];
  }
  return coords;
}

Index lattice_index(std::span<const Index> dims, std::span<const Index> coords) {
  Index idx = 0;
  for (std::size_t a = 0; a < dims.size(); ++a) idx = idx * dims[a] + coords[a];
  return idx;
}

Graph gen_lattice(std::span<const Index> dims) {
  if (dims.empty()) throw ValidationError("lattice needs at least one dimension");
  Index n = 1;
  for (const Index d : dims) {
    if (d < 1) throw ValidationError("lattice side lengths must be >= 1");
    n *= d;
  }
  std::vector<std::pair<Index, Index>> edges;
  for (Index node = 0; node < n; ++node) {
    auto coords = lattice_coordinates(dims, node);
    for (std::size_t a = 0; a < dims.size(); ++a) {
      if (coords[a] + 1 < dims[a]) {
        ++coords[a];
        edges.emplace_back(node, lattice_index(dims, coords));
        --coords[a];
      }
    }
  }
  return build_graph(n, edges);
}

Graph gen_random_tree(Index n, std::uint64_t seed) {
  if (n < 1) throw ValidationError("tree needs at least one node");
  if (n == 1) return build_graph(1, {});
  if (n == 2) return build_graph(2, {{0, 1}});
  SeededGenerator rng(seed);
  std::vector<Index> code(static_cast<std::size_t>(n - 2));
  for (auto& c : code) c = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
  std::vector<Index> deg(static_cast<std::size_t>(n), 1);
  for (const Index c : code) ++deg[c];
  std::vector<std::pair<Index, Index>> edges;
  // Min-leaf Pruefer decoding.
  std::priority_queue<Index, std::vector<Index>, std::greater<>> leaves;
  for (Index i = 0; i < n; ++i) {
    if (deg[i] == 1) leaves.push(i);
  }
  for (const Index c : code) {
    const Index leaf = leaves.top();
    leaves.pop();
    edges.emplace_back(leaf, c);
    if (--deg[c] == 1) leaves.push(c);
  }
  const Index a = leaves.top();
  leaves.pop();
  edges.emplace_back(a, leaves.top());
  return build_graph(n, edges);
}

Graph gen_two_community(Index n1, Index n2, double p_in, double p_out, std::uint64_t seed) {
  if (n1 < 1 || n2 < 1) throw ValidationError("communities must be non-empty");
  if (p_in < 0 || p_in > 1 || p_out < 0 || p_out > 1) throw ValidationError("probabilities must lie in [0,1]");
  SeededGenerator rng(seed);
  std::vector<std::pair<Index, Index>> edges;
  const auto add_tree = [&](Index offset, Index size) {
    const Graph t = gen_random_tree(size, rng.next());
    for (const auto& e : t.edges()) edges.emplace_back(offset + e.u, offset + e.v);
  };
  add_tree(0, n1);
  add_tree(n1, n2);
  const Index n = n1 + n2;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const bool same = (i < n1) == (j < n1);
      if (rng.uniform() < (same ? p_in : p_out)) edges.emplace_back(i, j);
    }
  }
  edges.emplace_back(static_cast<Index>(rng.below(static_cast<std::uint64_t>(n1))),
                     n1 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n2))));
  return build_graph(n, edges);
}

ComponentLabeling connected_components(const Graph& g) {
  ComponentLabeling out;
  out.labels.assign(static_cast<std::size_t>(g.node_count()), -1);
  std::vector<Index> stack;
  for (Index s = 0; s < g.node_count(); ++s) {
    if (out.labels[s] >= 0) continue;
    const Index c = out.component_count++;
    out.labels[s] = c;
    stack.push_back(s);
    while (!stack.empty()) {
      const Index u = stack.back();
      stack.pop_back();
      for (const Index v : g.neighbors(u)) {
        if (out.labels[v] < 0) {
          out.labels[v] = c;
          stack.push_back(v);
        }
      }
    }
  }
  return out;
}

SparseRealMatrix adjacency(const Graph& g) {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(2 * g.edges().size());
  for (const auto& e : g.edges()) {
    triplets.emplace_back(e.u, e.v, 1.0);
    triplets.emplace_back(e.v, e.u, 1.0);
  }
  SparseRealMatrix a(g.node_count(), g.node_count());
  a.setFromTriplets(triplets.begin(), triplets.end());
  return a;
}

Eigen::VectorXd degree_vector(const Graph& g) {
  Eigen::VectorXd d(g.node_count());
  for (Index i = 0; i < g.node_count(); ++i) d[i] = static_cast<double>(g.degree(i));
  return d;
}

Graph permute_nodes(const Graph& g, std::span<const Index> perm) {
  const Index n = g.node_count();
  if (static_cast<Index>(perm.size()) != n) throw ValidationError("permutation length mismatch");
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (const Index p : perm) {
    if (p < 0 || p >= n || seen[p]) throw ValidationError("not a permutation");
    seen[p] = true;
  }
  std::vector<std::pair<Index, Index>> edges;
  for (const auto& e : g.edges()) edges.emplace_back(perm[e.u], perm[e.v]);
  Graph out = build_graph(n, edges);
  if (g.node_features()) {
    Eigen::MatrixXd f(n, g.node_features()->cols());
    for (Index i = 0; i < n; ++i) f.row(perm[i]) = g.node_features()->row(i);
    out = out.with_node_features(std::move(f));
  }
  if (!g.edge_features().empty()) {
    EdgeFeatureMap ef;
    for (const auto& [key, value] : g.edge_features()) ef.emplace(std::make_pair(perm[key.first], perm[key.second]), value);
    out = out.with_edge_features(std::move(ef));
  }
  return out;
}

Graph disjoint_union(const Graph& a, const Graph& b) {
  std::vector<std::pair<Index, Index>> edges;
  for (const auto& e : a.edges()) edges.emplace_back(e.u, e.v);
  const Index off = a.node_count();
  for (const auto& e : b.edges()) edges.emplace_back(off + e.u, off + e.v);
  return build_graph(a.node_count() + b.node_count(), edges);
}

std::string graph_hash(const Graph& g) {
  Sha256 h;
  h.update("dgn-graph-v1");
  h.update_int(g.node_count());
  for (const auto& e : g.edges()) {
    h.update_int(e.u);
    h.update_int(e.v);
  }
  if (const auto& nf = g.node_features()) {
    h.update("node_features");
    h.update_int(nf->cols());
    for (Index i = 0; i < nf->rows(); ++i) {
      for (Index j = 0; j < nf->cols(); ++j) h.update_double((*nf)(i, j));
    }
  }
  if (!g.edge_features().empty()) {
    h.update("edge_features");
    for (const auto& [key, value] : g.edge_features()) {
      h.update_int(key.first);
      h.update_int(key.second);
      h.update_int(value.size());
      for (Index j = 0; j < value.size(); ++j) h.update_double(value[j]);
    }
  }
  return h.hex_digest();
}

}  // namespace dgn
