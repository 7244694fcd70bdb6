#include "dgn/aggregate.hpp"
#include "dgn/augment.hpp"
#include "dgn/grid_kernel.hpp"
#include "dgn/random.hpp"
#include "dgn/verify.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace dgn;

namespace {

double max_abs(const SparseRealMatrix& m) {
  double out = 0.0;
  for (Index r = 0; r < m.outerSize(); ++r) {
    for (SparseRealMatrix::InnerIterator it(m, r); it; ++it) out = std::max(out, std::abs(it.value()));
  }
  return out;
}

VectorField random_field(std::shared_ptr<const Graph> g, SeededGenerator& rng) {
  return VectorField::from_edges(std::move(g), [&](Index, Index) { return rng.uniform(-2.0, 2.0); });
}

struct AxisPair {
  std::shared_ptr<const Graph> g;
  VectorField h, v;
};

AxisPair axis_pair() {
  const std::vector<Index> dims{9, 5};
  auto g = std::make_shared<const Graph>(gen_lattice(dims));
  return {g, lattice_axis_field(g, dims, 0, GridFieldSource::arccos_linear),
          lattice_axis_field(g, dims, 1, GridFieldSource::arccos_linear)};
}

bool on_edges(const Graph& g, const SparseRealMatrix& m) {
  const SparseRealMatrix a = adjacency(g);
  for (Index r = 0; r < m.outerSize(); ++r) {
    for (SparseRealMatrix::InnerIterator it(m, r); it; ++it) {
      if (it.value() != 0.0 && a.coeff(r, it.col()) == 0.0) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("reflect") {
  auto g = std::make_shared<const Graph>(gen_cycle(6));
  SeededGenerator rng(3);
  const VectorField f = random_field(g, rng);
  const VectorField r = reflect(f);
  CHECK(max_abs(reflect(r).values() - f.values()) == 0.0);
  CHECK(max_abs(r.values() + f.values()) == 0.0);
  CHECK(max_abs(reflect(VectorField::zero(g)).values()) == 0.0);
  const auto av = build_aggregator(f, AggregatorKind::av), avr = build_aggregator(r, AggregatorKind::av);
  const auto dx = build_aggregator(f, AggregatorKind::dx), dxr = build_aggregator(r, AggregatorKind::dx);
  CHECK(max_abs(avr.matrix - av.matrix) == 0.0);
  CHECK(max_abs(dxr.matrix + dx.matrix) == 0.0);
}

TEST_CASE("orthogonal lattice axis fields") {
  const auto [g, h, v] = axis_pair();
  const FieldPlane plane = build_plane(h, v);
  CHECK(plane.degenerate_rows().empty());
  for (Index i = 0; i < g->node_count(); ++i) CHECK(plane.alpha[i] == doctest::Approx(std::numbers::pi / 2));
  CHECK(max_abs(plane.f2_perp - plane.f2_hat) < 1e-12);

  const RotatedPair q = rotate(plane, std::numbers::pi / 2);
  CHECK(max_abs(q.f1 - plane.f2_perp) < 1e-10);
  CHECK(max_abs(q.f2 + plane.f1_hat) < 1e-10);
}

TEST_CASE("colinear fields are rejected") {
  const auto [g, h, v] = axis_pair();
  CHECK_THROWS_AS(build_plane(h, h), ValidationError);
  CHECK_THROWS_AS(build_plane(h, reflect(h)), ValidationError);
  auto other = std::make_shared<const Graph>(gen_path(4));
  CHECK_THROWS_AS(build_plane(h, VectorField::zero(other)), ValidationError);
}

TEST_CASE("plane decomposition and rotation on random field pairs") {
  int planes = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    auto g = std::make_shared<const Graph>(random_graph(40, 500 + s));
    SeededGenerator rng(s);
    const VectorField f1 = random_field(g, rng), f2 = random_field(g, rng);
    FieldPlane plane;
    try {
      plane = build_plane(f1, f2);
    } catch (const ValidationError&) {
      continue;  // every row colinear, e.g. a forest of stars
    }
    ++planes;
    const SparseRealMatrix& a = plane.f1_hat;
    const SparseRealMatrix& b = plane.f2_hat;
    const SparseRealMatrix& p = plane.f2_perp;
    for (Index i = 0; i < g->node_count(); ++i) {
      if (plane.degenerate[i]) continue;
      CHECK(std::abs(a.row(i).dot(p.row(i))) < 1e-10);
      const double al = plane.alpha[i];
      const Eigen::RowVectorXd rebuilt =
          std::cos(al) * Eigen::RowVectorXd(a.row(i)) + std::sin(al) * Eigen::RowVectorXd(p.row(i));
      CHECK((rebuilt - Eigen::RowVectorXd(b.row(i))).norm() < 1e-10);
    }
    const RotatedPair zero = rotate(plane, 0.0);
    CHECK(max_abs(zero.f1 - a) < 1e-12);
    CHECK(max_abs(zero.f2 - b) < 1e-12);

    const double theta = rng.uniform(-3.0, 3.0);
    const RotatedPair t = rotate(plane, theta);
    CHECK(on_edges(*g, t.f1));
    CHECK(on_edges(*g, t.f2));
    for (Index i = 0; i < g->node_count(); ++i) {
      if (!plane.degenerate[i]) CHECK(std::abs(t.f1.row(i).norm() - 1.0) < 1e-10);
    }
    CHECK(max_abs(rotate_rows(plane, t.f1, -theta) - a) < 1e-10);
    CHECK(max_abs(rotate_rows(plane, t.f2, -theta) - b) < 1e-10);
    // Degenerate rows pass through untouched.
    for (const Index i : t.passed_through) {
      CHECK((Eigen::RowVectorXd(t.f1.row(i)) - Eigen::RowVectorXd(a.row(i))).norm() == 0.0);
    }
  }
  CHECK(planes > 50);
}

TEST_CASE("distort") {
  auto g = std::make_shared<const Graph>(random_graph(30, 77));
  SeededGenerator rng(9);
  const VectorField f = random_field(g, rng);
  CHECK(max_abs(distort(f, 1, 0.0).values() - f.values()) == 0.0);
  const VectorField a = distort(f, 42, 0.3), b = distort(f, 42, 0.3), c = distort(f, 43, 0.3);
  CHECK(max_abs(a.values() - b.values()) == 0.0);
  CHECK(max_abs(a.values() - c.values()) > 0.0);
  CHECK(max_abs(a.values() + SparseRealMatrix(a.values().transpose())) == 0.0);
  CHECK(on_edges(*g, a.values()));

  double m = 0.0;
  for (const auto& e : g->edges()) m += std::abs(f(e.u, e.v));
  m /= static_cast<double>(g->edge_count());
  for (const auto& e : g->edges()) CHECK(std::abs(a(e.u, e.v) - f(e.u, e.v)) < 0.3 * m);
  CHECK_THROWS_AS(distort(f, 1, -0.1), ValidationError);
}
