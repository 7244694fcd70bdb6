#include "dgn/aggregate.hpp"
#include "dgn/random.hpp"

#include <doctest.h>

#include <cmath>

using namespace dgn;

namespace {

std::shared_ptr<const Graph> shared(Graph g) { return std::make_shared<const Graph>(std::move(g)); }

Eigen::MatrixXd dense(const SparseRealMatrix& m) { return Eigen::MatrixXd(m); }

VectorField random_field(const std::shared_ptr<const Graph>& g, SeededGenerator& rng) {
  return VectorField::from_edges(g, [&](Index, Index) { return rng.below(6) == 0 ? 0.0 : rng.uniform(-1.0, 1.0); });
}

// Textbook evaluation of every aggregator kind, row by row from the field entries.
Eigen::MatrixXd oracle(const Graph& g, const VectorField& f, AggregatorKind kind, double eps) {
  const Index n = g.node_count();
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    double l1 = 0, lp = 0, lm = 0;
    for (const Index j : g.neighbors(i)) {
      const double v = f(i, j);
      l1 += std::abs(v);
      if (v > 0) lp += v;
      if (v < 0) lm -= v;
    }
    for (const Index j : g.neighbors(i)) {
      const double v = f(i, j);
      const double pp = v > 0 ? v / (lp + eps) : 0.0;   // F'+
      const double mm = v < 0 ? -v / (lm + eps) : 0.0;  // |F'-|
      switch (kind) {
        case AggregatorKind::av: b(i, j) = std::abs(v) / (l1 + eps); break;
        case AggregatorKind::dx: b(i, j) = v / (l1 + eps); break;
        case AggregatorKind::av_center: b(i, j) = pp + mm; break;
        case AggregatorKind::dx_center: b(i, j) = 0.5 * (pp - mm); break;
        case AggregatorKind::av_0pad: b(i, j) = 0.5 * (pp + mm); break;
        case AggregatorKind::dx_0pad:
          if (lp > 0 && lm > 0) {
            b(i, j) = 0.5 * (pp - mm);
          } else {
            b(i, j) = pp - mm;
          }
          break;
      }
    }
    if (kind == AggregatorKind::av_center) {
      const double s = b.row(i).sum();
      if (s > 0) b.row(i) /= s;
    }
    const bool centered = kind == AggregatorKind::dx || kind == AggregatorKind::dx_center ||
                          (kind == AggregatorKind::dx_0pad && lp > 0 && lm > 0);
    if (centered) b(i, i) = -b.row(i).sum();
  }
  return b;
}

}  // namespace

TEST_CASE("P3 gradient aggregators") {
  const auto p3 = shared(gen_path(3));
  const VectorField f = gradient(p3, Eigen::Vector3d(0, 1, 2));
  const Eigen::MatrixXd dx = dense(build_aggregator(f, AggregatorKind::dx).matrix);
  CHECK(dx(1, 0) == doctest::Approx(-0.5).epsilon(1e-7));
  CHECK(dx(1, 1) == 0.0);
  CHECK(dx(1, 2) == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(dx(0, 0) == doctest::Approx(-1.0).epsilon(1e-7));
  CHECK(dx(0, 1) == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(dx(0, 2) == 0.0);
  const Eigen::VectorXd y = apply(build_aggregator(f, AggregatorKind::dx), Eigen::Vector3d(0, 1, 4));
  CHECK((y - Eigen::Vector3d(1, 2, 3)).cwiseAbs().maxCoeff() < 1e-7);
  // Boundary row of the 0pad derivative only sees the forward neighbor.
  const Eigen::MatrixXd pad = dense(build_aggregator(f, AggregatorKind::dx_0pad).matrix);
  CHECK(pad(0, 0) == 0.0);
  CHECK(pad(0, 1) == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(pad(1, 0) == doctest::Approx(-0.5).epsilon(1e-7));
  CHECK(pad(1, 2) == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(pad(2, 1) == doctest::Approx(-1.0).epsilon(1e-7));
}

TEST_CASE("mean and Laplacian recovery from constant-magnitude fields") {
  const auto k3 = shared(gen_cycle(3));
  const VectorField f = VectorField::from_edges(k3, [](Index i, Index) { return i == 0 ? 2.0 : -2.0; });
  const Eigen::MatrixXd av = dense(build_aggregator(f, AggregatorKind::av, 1e-14).matrix);
  const Eigen::MatrixXd mean = 0.5 * (Eigen::Matrix3d::Ones() - Eigen::Matrix3d::Identity());
  CHECK((av - mean).cwiseAbs().maxCoeff() < 1e-13);
  const Graph g = gen_two_community(9, 7, 0.4, 0.2, 4);
  const SparseRealMatrix a = adjacency(g);
  const SparseRealMatrix ca = 3.0 * a;
  const Eigen::VectorXd d = degree_vector(g);
  Eigen::VectorXd x(g.node_count());
  for (Index i = 0; i < x.size(); ++i) x[i] = std::sin(1.0 + i);
  const Eigen::VectorXd bx = apply(build_aggregator(g, ca, AggregatorKind::dx, 1e-14), x);
  const Eigen::VectorXd lx = (d.asDiagonal() * x - a * x).cwiseQuotient(d);
  CHECK((bx + lx).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("aggregators on constant input") {
  SeededGenerator rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = shared(gen_two_community(5 + trial, 4 + trial % 3, 0.3, 0.2, static_cast<std::uint64_t>(trial)));
    const VectorField f = random_field(g, rng);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(g->node_count());
    const Eigen::VectorXd av = apply(build_aggregator(f, AggregatorKind::av, 1e-300), ones);
    const Eigen::VectorXd dx = apply(build_aggregator(f, AggregatorKind::dx), ones);
    for (Index i = 0; i < g->node_count(); ++i) {
      bool any = false;
      for (const Index j : g->neighbors(i)) any = any || f(i, j) != 0.0;
      CHECK(av[i] == doctest::Approx(any ? 1.0 : 0.0));
      CHECK(std::abs(dx[i]) < 1e-14);
    }
    for (const auto kind : {AggregatorKind::dx_center, AggregatorKind::dx_0pad}) {
      const Eigen::VectorXd y = apply(build_aggregator(f, kind), ones);
      // 0pad boundary rows compare against a phantom zero, so only centered rows vanish.
      if (kind == AggregatorKind::dx_center) CHECK(y.cwiseAbs().maxCoeff() < 1e-14);
    }
  }
}

TEST_CASE("property: every kind matches the row-wise oracle") {
  SeededGenerator rng(17);
  const double eps = 1e-8;
  for (int trial = 0; trial < 30; ++trial) {
    const auto g = shared(gen_two_community(4 + trial % 10, 3 + trial % 5, 0.4, 0.2, 50 + static_cast<std::uint64_t>(trial)));
    const VectorField f = random_field(g, rng);
    for (const auto kind : {AggregatorKind::av, AggregatorKind::dx, AggregatorKind::av_center, AggregatorKind::dx_center,
                            AggregatorKind::av_0pad, AggregatorKind::dx_0pad}) {
      const Eigen::MatrixXd b = dense(build_aggregator(f, kind, eps).matrix);
      CHECK_MESSAGE((b - oracle(*g, f, kind, eps)).cwiseAbs().maxCoeff() < 1e-12, to_string(kind));
      if (kind == AggregatorKind::av || kind == AggregatorKind::av_center || kind == AggregatorKind::av_0pad) {
        CHECK(b.minCoeff() >= 0.0);
      }
    }
  }
}

TEST_CASE("harden and soft_harden") {
  const auto star = shared(build_graph(4, {{0, 1}, {0, 2}, {0, 3}}));
  const VectorField f = VectorField::from_edges(star, [](Index, Index j) { return j == 1 ? 0.2 : (j == 2 ? 0.0 : -0.9); });
  const Eigen::MatrixXd h = dense(transform_field(f.values(), FieldTransform{FieldTransformKind::harden, 1.0}));
  CHECK(h(0, 1) == 0.0);
  CHECK(h(0, 2) == 0.0);
  CHECK(h(0, 3) == -1.0);
  CHECK(h(3, 0) == 1.0);
  const Eigen::MatrixXd s = dense(transform_field(f.values(), FieldTransform{FieldTransformKind::soft_harden, 1e3}));
  CHECK((s - h).cwiseAbs().maxCoeff() < 1e-3);
  const Eigen::MatrixXd warm = dense(transform_field(f.values(), FieldTransform{FieldTransformKind::soft_harden, 1.0}));
  CHECK(std::abs(warm.row(0).cwiseAbs().sum() - 1.0) < 1e-12);
  // Ties go to the lowest column.
  const VectorField tie = VectorField::from_edges(star, [](Index, Index j) { return j == 1 ? 0.5 : -0.5; });
  const Eigen::MatrixXd ht = dense(transform_field(tie.values(), FieldTransform{FieldTransformKind::harden, 1.0}));
  CHECK(ht(0, 1) == 1.0);
  CHECK(ht(0, 2) == 0.0);
  CHECK_THROWS_AS(transform_field(f.values(), FieldTransform{FieldTransformKind::soft_harden, 0.0}), ValidationError);
}

TEST_CASE("forward and backward copies") {
  const auto p3 = shared(gen_path(3));
  const VectorField f = gradient(p3, Eigen::Vector3d(0, 1, 3));
  const Eigen::MatrixXd fc = dense(transform_field(f.values(), FieldTransform{FieldTransformKind::forward_copy, 1.0}));
  const Eigen::MatrixXd bc = dense(transform_field(f.values(), FieldTransform{FieldTransformKind::backward_copy, 1.0}));
  // Forward copy at node i reads its successor, backward copy its predecessor.
  const Eigen::Vector3d x(10, 20, 30);
  const Eigen::Vector3d fwd = fc * x, bwd = bc * x;
  CHECK(fwd == Eigen::Vector3d(20, 30, 0));
  CHECK(bwd == Eigen::Vector3d(0, 10, 20));
  const Eigen::MatrixXd r = dense(transform_field(f.values(), FieldTransform{FieldTransformKind::reflect, 1.0}));
  CHECK(r == -dense(f.values()));
}

TEST_CASE("aggregator validation") {
  const auto p3 = shared(gen_path(3));
  const VectorField f = gradient(p3, Eigen::Vector3d(0, 1, 2));
  CHECK_THROWS_AS(build_aggregator(f, AggregatorKind::av, 0.0), ValidationError);
  CHECK_THROWS_AS(apply(build_aggregator(f, AggregatorKind::av), Eigen::Vector2d(1, 1)), ValidationError);
  const Eigen::MatrixXd empty(3, 0);
  CHECK(apply(build_aggregator(f, AggregatorKind::av), empty).cols() == 0);
  CHECK(parse_aggregator_kind("dx_center") == AggregatorKind::dx_center);
  CHECK_THROWS_AS(parse_aggregator_kind("dy"), ValidationError);
  CHECK(is_derivative_kind(AggregatorKind::dx_0pad));
  CHECK_FALSE(is_derivative_kind(AggregatorKind::av_center));
}

TEST_CASE("isolated and zero rows stay zero") {
  const auto g = shared(build_graph(4, {{0, 1}, {1, 2}}));
  const VectorField f = VectorField::from_edges(g, [](Index i, Index) { return i == 0 ? 1.0 : 0.0; });
  for (const auto kind : {AggregatorKind::av, AggregatorKind::dx, AggregatorKind::av_center, AggregatorKind::dx_center,
                          AggregatorKind::av_0pad, AggregatorKind::dx_0pad}) {
    const Eigen::MatrixXd b = dense(build_aggregator(f, kind).matrix);
    CHECK(b.allFinite());
    CHECK(b.row(3).isZero());
    CHECK(b.row(2).isZero());
  }
}

TEST_CASE("radius-1 walk kernel reduces to forward minus backward") {
  const auto p5 = shared(gen_path(5));
  const VectorField f = gradient(p5, Eigen::VectorXd::LinSpaced(5, 0, 4));
  RadiusKernelSpec spec;
  spec.fields = {f};
  spec.radius = 1;
  spec.coefficients[{1}] = 1.0;
  spec.coefficients[{-1}] = -1.0;
  spec.coefficients[{0}] = 0.0;
  const Eigen::MatrixXd k = dense(radius_r_kernel(spec));
  const auto fwd = forward_backward_step(f.values(), +1), bwd = forward_backward_step(f.values(), -1);
  CHECK((k - dense(fwd) + dense(bwd)).cwiseAbs().maxCoeff() < 1e-15);
  // Row sums equal the divergence of the row-normalized field.
  const Eigen::VectorXd div = divergence(normalize_rows(f, FieldNorm{RowNorm::row_l1, 1e-300}).values);
  CHECK((k.rowwise().sum() - div).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("walk enumeration") {
  CHECK(walk_word_count(1, 2) == 7);
  CHECK(walk_word_count(2, 1) == 5);
  CHECK(walk_word_count(2, 2) == 21);
  CHECK(enumerate_step_words(1, 2).size() == 7);
  CHECK(enumerate_step_words(2, 2).size() == 21);
  const auto v = enumerate_walk_vectors(1, 2);
  CHECK(v.size() == 5);
  CHECK(enumerate_walk_vectors(2, 2).size() == 13);
}

TEST_CASE("walk products respect the density cap") {
  const auto p4 = shared(gen_path(4));
  const VectorField f = gradient(p4, Eigen::Vector4d(0, 1, 2, 3));
  const std::vector<SparseRealMatrix> fwd{forward_backward_step(f.values(), +1)}, bwd{forward_backward_step(f.values(), -1)};
  const std::vector<int> order{0};
  const SparseRealMatrix two = walk_product(fwd, bwd, {2}, order, 1.0);
  // Node 0 has one neighbor, node 1 splits its unit row between two.
  CHECK(two.coeff(0, 2) == doctest::Approx(0.5));
  CHECK_THROWS_AS(walk_product(fwd, bwd, {3}, order, 0.01), NumericalError);
}
