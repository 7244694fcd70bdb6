#include "dgn/graph.hpp"
#include "dgn/graph_io.hpp"
#include "dgn/hash.hpp"
#include "dgn/random.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

using namespace dgn;

namespace {

std::vector<std::pair<Index, Index>> edge_pairs(const Graph& g) {
  std::vector<std::pair<Index, Index>> out;
  for (const auto& e : g.edges()) out.emplace_back(e.u, e.v);
  return out;
}

// Every pair of coordinates at L1 distance one, found by brute force.
std::size_t lattice_edges_brute(const std::vector<Index>& dims) {
  Index n = 1;
  for (const Index d : dims) n *= d;
  std::vector<std::vector<Index>> coords;
  for (Index i = 0; i < n; ++i) {
    std::vector<Index> c(dims.size());
    Index r = i;
    for (std::size_t a = dims.size(); a-- > 0;) {
      c[a] = r % dims[a];
      r /= dims[a];
    }
    coords.push_back(c);
  }
  std::size_t count = 0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      Index dist = 0;
      for (std::size_t a = 0; a < dims.size(); ++a) dist += std::abs(coords[i][a] - coords[j][a]);
      if (dist == 1) ++count;
    }
  }
  return count;
}

}  // namespace

TEST_CASE("build_graph merges duplicates and validates") {
  const Graph p3 = build_graph(3, {{0, 1}, {1, 2}});
  CHECK(p3.node_count() == 3);
  CHECK(p3.edge_count() == 2);
  const Graph dup = build_graph(3, {{0, 1}, {1, 0}, {1, 2}});
  CHECK(dup == p3);
  CHECK_THROWS_AS(build_graph(2, {{0, 2}}), ValidationError);
  CHECK_THROWS_AS(build_graph(2, {{1, 1}}), ValidationError);
  CHECK_THROWS_AS(build_graph(2, {{-1, 0}}), ValidationError);
}

TEST_CASE("generators") {
  CHECK(gen_path(1).edge_count() == 0);
  CHECK(edge_pairs(gen_path(3)) == std::vector<std::pair<Index, Index>>{{0, 1}, {1, 2}});
  const Graph p5 = gen_path(5);
  CHECK(p5.edge_count() == 4);
  CHECK(degree_vector(p5) == Eigen::VectorXd((Eigen::VectorXd(5) << 1, 2, 2, 2, 1).finished()));
  CHECK(gen_lattice({3}) == gen_path(3));
  CHECK(gen_lattice({2, 3}).node_count() == 6);
  CHECK(gen_lattice({2, 3}).edge_count() == 7);
  CHECK(gen_lattice({2, 2, 2}).edge_count() == 12);
  CHECK(gen_cycle(3).edge_count() == 3);
  CHECK(gen_cycle(4).edge_count() == 4);
  const Graph hex = gen_cycle(6);
  for (Index i = 0; i < 6; ++i) CHECK(hex.degree(i) == 2);
  CHECK_THROWS_AS(gen_cycle(2), ValidationError);
}

TEST_CASE("lattice edge count matches brute force") {
  for (const auto& dims : std::vector<std::vector<Index>>{{4}, {2, 3}, {3, 3}, {2, 2, 2}, {9, 5}, {2, 3, 4}, {1, 5}}) {
    CHECK(static_cast<std::size_t>(gen_lattice(dims).edge_count()) == lattice_edges_brute(dims));
  }
}

TEST_CASE("lattice coordinates round trip, last axis fastest") {
  const std::vector<Index> dims{3, 4, 2};
  for (Index i = 0; i < 24; ++i) CHECK(lattice_index(dims, lattice_coordinates(dims, i)) == i);
  CHECK(lattice_coordinates(dims, 1) == std::vector<Index>{0, 0, 1});
}

TEST_CASE("random generators are seeded and well formed") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Index n = 2 + static_cast<Index>(s * 3);
    const Graph t = gen_random_tree(n, s);
    CHECK(t.edge_count() == n - 1);
    CHECK(connected_components(t).component_count == 1);
    CHECK(t == gen_random_tree(n, s));
    const Graph c = gen_two_community(n, n + 1, 0.3, 0.1, s);
    CHECK(connected_components(c).component_count == 1);
    CHECK(graph_hash(c) == graph_hash(gen_two_community(n, n + 1, 0.3, 0.1, s)));
  }
}

TEST_CASE("connected components") {
  CHECK(connected_components(gen_path(3)).component_count == 1);
  const Graph tri2 = build_graph(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}});
  const auto c = connected_components(tri2);
  CHECK(c.component_count == 2);
  CHECK(c.labels == std::vector<Index>{0, 0, 0, 1, 1, 1});
  CHECK(c.members(1) == std::vector<Index>{3, 4, 5});
  CHECK(connected_components(build_graph(3, {})).component_count == 3);
}

TEST_CASE("adjacency and degrees") {
  const Graph k3 = gen_cycle(3);
  const SparseRealMatrix a = adjacency(k3);
  CHECK(a.nonZeros() == 6);
  CHECK(a.sum() == 6.0);
  CHECK(degree_vector(k3) == Eigen::Vector3d(2, 2, 2));
  CHECK(degree_vector(gen_path(3)) == Eigen::Vector3d(1, 2, 1));
  const Graph iso = build_graph(3, {{0, 1}});
  CHECK(degree_vector(iso)[2] == 0.0);
  CHECK(Eigen::MatrixXd(adjacency(iso)).row(2).isZero());
}

TEST_CASE("property: relabeling preserves structure invariants") {
  SeededGenerator rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const Graph g = gen_two_community(5 + trial % 7, 4 + trial % 5, 0.4, 0.1, 100 + static_cast<std::uint64_t>(trial));
    std::vector<Index> perm(static_cast<std::size_t>(g.node_count()));
    std::iota(perm.begin(), perm.end(), Index(0));
    for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    const Graph h = permute_nodes(g, perm);
    CHECK(h.edge_count() == g.edge_count());
    for (Index i = 0; i < g.node_count(); ++i) CHECK(h.degree(perm[i]) == g.degree(i));
    for (const auto& e : g.edges()) CHECK(h.has_edge(perm[e.u], perm[e.v]));
    // Inverse permutation restores the original exactly.
    std::vector<Index> inv(perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i) inv[perm[i]] = static_cast<Index>(i);
    CHECK(permute_nodes(h, inv) == g);
  }
}

TEST_CASE("disjoint union") {
  const Graph u = disjoint_union(gen_path(3), gen_cycle(3));
  CHECK(u.node_count() == 6);
  CHECK(u.edge_count() == 5);
  CHECK(connected_components(u).component_count == 2);
  CHECK(u.has_edge(3, 5));
}

TEST_CASE("features carry through relabeling") {
  Eigen::MatrixXd x(3, 2);
  x << 1, 2, 3, 4, 5, 6;
  EdgeFeatureMap ef;
  ef[{1, 0}] = Eigen::Vector2d(7, 8);
  const Graph g = gen_path(3).with_node_features(x).with_edge_features(ef);
  REQUIRE(g.edge_feature(0, 1) != nullptr);
  CHECK(*g.edge_feature(1, 0) == Eigen::Vector2d(7, 8));
  CHECK(g.edge_feature(0, 2) == nullptr);
  const std::vector<Index> perm{2, 1, 0};
  const Graph h = permute_nodes(g, perm);
  CHECK(h.node_features()->row(2) == x.row(0));
  REQUIRE(h.edge_feature(2, 1) != nullptr);
  CHECK(*h.edge_feature(1, 2) == Eigen::Vector2d(7, 8));
  CHECK_THROWS_AS(gen_path(3).with_edge_features({{{0, 2}, Eigen::Vector2d(1, 1)}}), ValidationError);
  CHECK_THROWS_AS(gen_path(3).with_node_features(Eigen::MatrixXd(2, 1)), ValidationError);
}

TEST_CASE("graph JSON round trip") {
  Eigen::MatrixXd x(4, 1);
  x << 0.1, -2.5, 1e-300, 3;
  EdgeFeatureMap ef;
  ef[{2, 3}] = Eigen::Vector3d(1, 0.5, -1);
  const Graph g = gen_path(4).with_node_features(x).with_edge_features(ef);
  const Graph back = graph_from_json(graph_to_json(g));
  CHECK(back == g);
  CHECK(graph_hash(back) == graph_hash(g));
  CHECK_THROWS_AS(graph_from_json(nlohmann::json{{"nodes", 2}, {"edges", {{0, 5}}}}), ValidationError);
}

TEST_CASE("edge list parsing") {
  SUBCASE("header with integer ids") {
    std::istringstream in("# comment\nnodes=4\n0\t1\n1 2\n\n");
    const auto r = read_edge_list(in);
    CHECK(r.graph.node_count() == 4);
    CHECK(r.graph.edge_count() == 2);
    CHECK_FALSE(r.remapped);
  }
  SUBCASE("sparse integer ids are remapped densely in numeric order") {
    std::istringstream in("10 20\n20 5\n");
    const auto r = read_edge_list(in);
    CHECK(r.graph.node_count() == 3);
    CHECK(r.remapped);
    CHECK(r.original_ids == std::vector<std::string>{"5", "10", "20"});
    CHECK(r.graph.has_edge(0, 2));
  }
  SUBCASE("string ids keep first-appearance order") {
    std::istringstream in("b a\na c\n");
    const auto r = read_edge_list(in);
    CHECK(r.original_ids == std::vector<std::string>{"b", "a", "c"});
  }
  SUBCASE("out of range with header") {
    std::istringstream in("nodes=2\n0 2\n");
    CHECK_THROWS_AS(read_edge_list(in), ValidationError);
  }
  SUBCASE("writer round trip") {
    const Graph g = gen_lattice({3, 3});
    std::istringstream in(write_edge_list(g));
    CHECK(read_edge_list(in).graph == g);
  }
}

TEST_CASE("sha256 known answer") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("seeded generator is reproducible and in range") {
  SeededGenerator a(42), b(42);
  for (int i = 0; i < 100; ++i) {
    const double u = a.uniform();
    CHECK(u == b.uniform());
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  CHECK(derive_seed(1, "eigen") != derive_seed(1, "augment"));
  CHECK(derive_seed(1, "eigen") == derive_seed(1, "eigen"));
}
