#include "dgn/random.hpp"
#include "dgn/spectral.hpp"

#include <algorithm>
#include <cmath>

namespace dgn {

SymmetricEigenResult lanczos_lowest(const SparseRealMatrix& sym, Index k, double tol, int max_restarts,
                                    double upper_bound) {
  const Index n = sym.rows();
  if (k < 1 || k > n) throw ValidationError("lanczos: k out of range");
  const Index m = std::min(n, std::max<Index>(2 * k + 20, 40));
  const double scale = std::max(1.0, std::abs(upper_bound));
  // Op = upper_bound * I - sym; its largest eigenpairs are sym's smallest.
  const auto apply = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return upper_bound * x - sym * x; };

  Eigen::MatrixXd basis(n, m + 1);
  Eigen::MatrixXd op_basis(n, m);
  SeededGenerator rng(0x1a2c05);
  const auto random_unit_orthogonal = [&](Index against) {
    for (int attempt = 0; attempt < 8; ++attempt) {
      Eigen::VectorXd v(n);
      for (Index i = 0; i < n; ++i) v[i] = rng.uniform(-1.0, 1.0);
      for (int pass = 0; pass < 2; ++pass) {
        v -= basis.leftCols(against) * (basis.leftCols(against).transpose() * v);
      }
      const double norm = v.norm();
      if (norm > 1e-8) return Eigen::VectorXd(v / norm);
    }
    throw NumericalError("lanczos: could not extend the Krylov basis");
  };

  basis.col(0) = random_unit_orthogonal(0);
  Index kept = 0;
  Eigen::VectorXd ritz_values;
  Eigen::MatrixXd ritz_vectors;
  Eigen::VectorXd residuals;
  for (int restart = 0; restart <= max_restarts; ++restart) {
    for (Index j = kept; j < m; ++j) {
      op_basis.col(j) = apply(basis.col(j));
      Eigen::VectorXd f = op_basis.col(j);
      for (int pass = 0; pass < 2; ++pass) f -= basis.leftCols(j + 1) * (basis.leftCols(j + 1).transpose() * f);
      const double beta = f.norm();
      if (j + 1 < n && beta > 1e-12 * scale) {
        basis.col(j + 1) = f / beta;
      } else if (j + 1 < n) {
        basis.col(j + 1) = random_unit_orthogonal(j + 1);
      } else {
        basis.col(j + 1).setZero();
      }
    }
    Eigen::MatrixXd projected = basis.leftCols(m).transpose() * op_basis;
    projected = 0.5 * (projected + projected.transpose()).eval();
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(projected);
    // Descending order of Op = ascending order of sym.
    const Eigen::VectorXd theta = small.eigenvalues().reverse();
    const Eigen::MatrixXd s = small.eigenvectors().rowwise().reverse();
    ritz_vectors = basis.leftCols(m) * s;
    const Eigen::MatrixXd op_ritz = op_basis * s;
    residuals.resize(m);
    for (Index c = 0; c < m; ++c) residuals[c] = (op_ritz.col(c) - theta[c] * ritz_vectors.col(c)).norm();
    ritz_values = theta;
    if (residuals.head(k).maxCoeff() <= tol * scale || m == n) {
      SymmetricEigenResult out;
      out.values = (upper_bound - ritz_values.head(k).array()).matrix();
      out.vectors = ritz_vectors.leftCols(k);
      for (Index c = 0; c < k; ++c) out.vectors.col(c).normalize();
      out.residuals.resize(k);
      for (Index c = 0; c < k; ++c) {
        out.residuals[c] = (sym * out.vectors.col(c) - out.values[c] * out.vectors.col(c)).norm();
      }
      out.restarts = restart;
      return out;
    }
    // Thick restart: keep the leading Ritz vectors plus the next Krylov direction,
    // which is orthogonal to all of them.
    kept = std::min<Index>(m - 1, k + (m - k) / 2);
    const Eigen::VectorXd next = basis.col(m);
    basis.leftCols(kept) = ritz_vectors.leftCols(kept);
    op_basis.leftCols(kept) = op_ritz.leftCols(kept);
    basis.col(kept) = next;
    if (next.norm() < 0.5) basis.col(kept) = random_unit_orthogonal(kept);
  }
  throw NumericalError("lanczos: no convergence after " + std::to_string(max_restarts) + " restarts",
                       std::vector<double>(residuals.data(), residuals.data() + std::min<Index>(k, residuals.size())));
}

}  // namespace dgn
