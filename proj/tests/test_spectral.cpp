#include "dgn/spectral.hpp"
#include "dgn/random.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

using namespace dgn;

namespace {

// Independent oracle: Eigen's dense self-adjoint solver on the textbook L = D - A.
Eigen::VectorXd oracle_spectrum(const Graph& g) {
  const Index n = g.node_count();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : g.edges()) {
    l(e.u, e.v) -= 1;
    l(e.v, e.u) -= 1;
    l(e.u, e.u) += 1;
    l(e.v, e.v) += 1;
  }
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(l).eigenvalues();
}

double path_eigenvalue(Index k, Index n) {
  return 2.0 - 2.0 * std::cos(std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
}

}  // namespace

TEST_CASE("laplacian kinds on small graphs") {
  const Graph p3 = gen_path(3);
  Eigen::Matrix3d expected;
  expected << 1, -1, 0, -1, 2, -1, 0, -1, 1;
  CHECK(Eigen::MatrixXd(laplacian(p3, LaplacianKind::combinatorial)).isApprox(expected, 0));
  const Eigen::MatrixXd norm = laplacian(gen_cycle(3), LaplacianKind::degree_normalized);
  Eigen::Matrix3d k3 = Eigen::Matrix3d::Identity() - 0.5 * (Eigen::Matrix3d::Ones() - Eigen::Matrix3d::Identity());
  CHECK((norm - k3).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  const Eigen::MatrixXd sym = laplacian(p3, LaplacianKind::symmetric_normalized);
  CHECK(sym(0, 0) == doctest::Approx(1.0));
  CHECK(sym(0, 1) == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-14));
  CHECK(sym(0, 2) == 0.0);
  const Eigen::MatrixXd iso = laplacian(build_graph(3, {{0, 1}}), LaplacianKind::symmetric_normalized);
  CHECK(iso.row(2).isZero());
  CHECK(parse_laplacian_kind("sym") == LaplacianKind::symmetric_normalized);
  CHECK_THROWS_AS(parse_laplacian_kind("bogus"), ValidationError);
}

TEST_CASE("P3 eigenpairs") {
  EigenOptions opt;
  opt.k = 3;
  const EigenBasis b = eigen_lowest(gen_path(3), opt);
  CHECK(b.eigenvalues[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(b.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(b.eigenvalues[2] == doctest::Approx(3.0).epsilon(1e-12));
  const Eigen::Vector3d phi1 = Eigen::Vector3d(std::sqrt(3.0) / 2, 0, -std::sqrt(3.0) / 2).normalized();
  CHECK((b.eigenvectors.col(1) - phi1).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("K3 multiplicity") {
  EigenOptions opt;
  opt.k = 3;
  const EigenBasis b = eigen_lowest(gen_cycle(3), opt);
  CHECK(b.eigenvalues[1] == doctest::Approx(3.0));
  CHECK(b.eigenvalues[2] == doctest::Approx(3.0));
  CHECK(b.groups == std::vector<std::vector<Index>>{{0}, {1, 2}});
  CHECK(b.repeated_groups().size() == 1);
  CHECK(eigen_residuals(gen_cycle(3), b).maxCoeff() < 1e-12);
}

TEST_CASE("multiplicity_groups") {
  CHECK(multiplicity_groups(Eigen::Vector3d(0, 1, 3), 1e-6) == std::vector<std::vector<Index>>{{0}, {1}, {2}});
  CHECK(multiplicity_groups(Eigen::Vector3d(0, 3, 3), 1e-6) == std::vector<std::vector<Index>>{{0}, {1, 2}});
  CHECK(multiplicity_groups(Eigen::Vector3d(0, 1, 1 + 1e-9), 1e-6) == std::vector<std::vector<Index>>{{0}, {1, 2}});
}

TEST_CASE("sample_eigenspace_basis") {
  EigenOptions opt;
  opt.k = 3;
  const EigenBasis b = eigen_lowest(gen_cycle(3), opt);
  const std::vector<Index> group{1, 2};
  const Eigen::MatrixXd s = sample_eigenspace_basis(b, group, 7);
  CHECK((s.transpose() * s - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
  const Eigen::MatrixXd orig = b.eigenvectors.middleCols(1, 2);
  const Eigen::MatrixXd residual = s - orig * (orig.transpose() * s);
  CHECK(residual.norm() < 1e-10);
  const Eigen::MatrixXd again = sample_eigenspace_basis(b, group, 7);
  CHECK((again.array() == s.array()).all());
  const std::vector<Index> single{0};
  CHECK_THROWS_AS(sample_eigenspace_basis(b, single, 7), ValidationError);
}

TEST_CASE("path spectra follow the closed form") {
  for (Index n = 3; n <= 12; ++n) {
    EigenOptions opt;
    opt.k = n;
    const EigenBasis b = eigen_lowest(gen_path(n), opt);
    for (Index k = 0; k < n; ++k) {
      CHECK(std::abs(b.eigenvalues[k] - path_eigenvalue(k, n)) < 1e-10);
      Eigen::VectorXd v(n);
      for (Index i = 0; i < n; ++i) v[i] = std::cos(std::numbers::pi * k * (i + 0.5) / n);
      v.normalize();
      canonicalize_sign(v);
      CHECK((b.eigenvectors.col(k) - v).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("canonicalize_sign") {
  Eigen::VectorXd v(3);
  v << 0.1, -0.9, 0.3;
  canonicalize_sign(v);
  CHECK(v[1] == 0.9);
  Eigen::VectorXd w = v;
  canonicalize_sign(w);
  CHECK(w == v);
  Eigen::VectorXd tie(2);
  tie << -0.5, 0.5;
  canonicalize_sign(tie);
  CHECK(tie[0] == 0.5);
}

TEST_CASE("property: spectra match the dense oracle on random graphs") {
  for (std::uint64_t s = 0; s < 25; ++s) {
    const Graph g = gen_two_community(4 + s % 9, 3 + s % 7, 0.35, 0.15, s);
    EigenOptions opt;
    opt.k = g.node_count();
    const EigenBasis b = eigen_lowest(g, opt);
    CHECK((b.eigenvalues - oracle_spectrum(g)).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(eigen_residuals(g, b).maxCoeff() < 1e-9);
    // Orthonormal columns.
    const Eigen::MatrixXd gram = b.eigenvectors.transpose() * b.eigenvectors;
    CHECK((gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("iterative solver agrees with the dense oracle") {
  for (const auto& g : {gen_lattice({30, 21}), gen_random_tree(700, 3), gen_two_community(300, 280, 0.02, 0.002, 5)}) {
    EigenOptions opt;
    opt.k = 6;
    opt.solver = EigenSolverKind::iterative;
    const EigenBasis b = eigen_lowest(g, opt);
    const Eigen::VectorXd oracle = oracle_spectrum(g);
    CHECK((b.eigenvalues - oracle.head(6)).cwiseAbs().maxCoeff() < 1e-7);
    CHECK(eigen_residuals(g, b).maxCoeff() < 1e-6);
    opt.solver = EigenSolverKind::dense;
    const EigenBasis d = eigen_lowest(g, opt);
    // Simple eigenvalues: same canonical vectors from both solvers.
    for (Index i = 0; i < 6; ++i) {
      bool simple = true;
      for (const auto& grp : d.groups) simple = simple && !(grp.size() > 1 && std::find(grp.begin(), grp.end(), i) != grp.end());
      if (simple) CHECK((b.eigenvectors.col(i) - d.eigenvectors.col(i)).cwiseAbs().maxCoeff() < 1e-5);
    }
  }
}

TEST_CASE("iterative solver reports non-convergence") {
  const SparseRealMatrix l = laplacian(gen_lattice({40, 40}), LaplacianKind::combinatorial);
  CHECK_THROWS_AS(lanczos_lowest(l, 8, 1e-14, 0, 8.0), NumericalError);
}

TEST_CASE("disconnected graphs are solved per component") {
  const Graph g = build_graph(7, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {5, 6}});
  EigenOptions opt;
  opt.k = 4;
  const EigenBasis b = eigen_lowest(g, opt);
  CHECK(b.eigenvalues[0] == doctest::Approx(0.0));
  CHECK(std::abs(b.eigenvalues[1]) < 1e-12);
  CHECK(b.component_of[0] == 0);
  CHECK(b.component_of[1] == 1);
  for (Index c = 0; c < b.size(); ++c) {
    const Index comp = b.component_of[static_cast<std::size_t>(c)];
    for (Index i = 0; i < 7; ++i) {
      const Index owner = i < 3 ? 0 : 1;
      if (owner != comp) CHECK(b.eigenvectors(i, c) == 0.0);
    }
  }
  const auto per = component_eigen_bases(g, opt);
  REQUIRE(per.size() == 2);
  const Eigen::VectorXd phi1 = assemble_component_vector(per, 1);
  // Triangle part is K3's first nontrivial vector, path part is P4's Fiedler vector.
  CHECK(std::abs(per[1].eigenvalues[1] - path_eigenvalue(1, 4)) < 1e-12);
  CHECK(phi1.tail(4).isApprox(per[1].eigenvectors.col(1).tail(4)));
  CHECK(phi1.head(3).isApprox(per[0].eigenvectors.col(1).head(3)));
}

TEST_CASE("eigen options validation") {
  EigenOptions opt;
  opt.k = 0;
  CHECK_THROWS_AS(eigen_lowest(gen_path(3), opt), ValidationError);
  opt.k = 5;
  CHECK_THROWS_AS(eigen_lowest(gen_path(3), opt), ValidationError);
}

TEST_CASE("normalized kinds agree with the dense oracle on the same matrix") {
  const Graph g = gen_two_community(12, 9, 0.4, 0.1, 3);
  for (const auto kind : {LaplacianKind::degree_normalized, LaplacianKind::symmetric_normalized}) {
    EigenOptions opt;
    opt.kind = kind;
    opt.k = 5;
    const EigenBasis b = eigen_lowest(g, opt);
    // L_norm and L_sym are similar matrices, so both share L_sym's spectrum.
    const Eigen::MatrixXd sym = laplacian(g, LaplacianKind::symmetric_normalized);
    const Eigen::VectorXd oracle = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym).eigenvalues();
    CHECK((b.eigenvalues - oracle.head(5)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(eigen_residuals(g, b).maxCoeff() < 1e-9);
  }
}
