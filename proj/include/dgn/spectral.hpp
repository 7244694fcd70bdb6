#pragma once

#include "dgn/graph.hpp"

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace dgn {

enum class LaplacianKind { combinatorial, degree_normalized, symmetric_normalized };

std::string_view to_string(LaplacianKind kind);
LaplacianKind parse_laplacian_kind(std::string_view name);

/// L = D - A, L_norm = D^-1 L, L_sym = D^-1/2 L D^-1/2.
/// Isolated nodes get zero rows under the normalized kinds.
SparseRealMatrix laplacian(const Graph& g, LaplacianKind kind);

enum class EigenSolverKind { automatic, dense, iterative };

struct EigenOptions {
  LaplacianKind kind = LaplacianKind::combinatorial;
  Index k = 1;
  /// Residual tolerance relative to the spectral scale; 0 selects 1e-10 (dense) or 1e-8 (iterative).
  double tol = 0.0;
  EigenSolverKind solver = EigenSolverKind::automatic;
  /// Components with more nodes than this use the iterative solver under `automatic`.
  Index dense_threshold = 512;
  double multiplicity_tol = 1e-6;
  int max_restarts = 2000;
};

/// Lowest eigenpairs of a graph Laplacian.
///
/// Columns are unit L2 norm, supported on a single connected component, and
/// sign-canonical: the largest-magnitude entry is positive, ties going to the
/// lowest node index. Inside a repeated eigenvalue the basis is the canonical
/// one obtained by Gram-Schmidt on the eigenspace projector's columns in node
/// order, so it depends only on the eigenspace.
struct EigenBasis {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;
  LaplacianKind kind = LaplacianKind::combinatorial;
  std::vector<Index> component_of;
  std::vector<std::vector<Index>> groups;

  Index size() const noexcept { return eigenvalues.size(); }
  /// Groups with more than one column.
  std::vector<std::vector<Index>> repeated_groups() const;
};

/// The k smallest pairs of the whole graph, computed per connected component
/// and merged in ascending eigenvalue order (ties by component id).
EigenBasis eigen_lowest(const Graph& g, const EigenOptions& options);

/// For every component, its own min(k, size) lowest pairs embedded in R^n.
/// Element c corresponds to component c of connected_components(g).
std::vector<EigenBasis> component_eigen_bases(const Graph& g, const EigenOptions& options);

/// Sum over components of each component's i-th eigenvector ("phi_i of each
/// component taken separately"). Components with fewer than i+1 pairs contribute zero.
Eigen::VectorXd assemble_component_vector(std::span<const EigenBasis> per_component, Index i);

/// Adjacent ascending values whose gap is <= rel_tol * max(1, |a|, |b|) share a group.
std::vector<std::vector<Index>> multiplicity_groups(const Eigen::VectorXd& ascending, double rel_tol);

/// Orthonormal basis of the span of `group`'s columns mixed by a seeded random
/// orthogonal matrix. Returns n x |group|.
Eigen::MatrixXd sample_eigenspace_basis(const EigenBasis& basis, std::span<const Index> group, std::uint64_t seed);

/// Flip so the largest-magnitude entry is positive; ties (within 1e-8 relative)
/// go to the lowest index. Idempotent.
void canonicalize_sign(Eigen::Ref<Eigen::VectorXd> v);

/// Max over columns of ||L v - lambda v||_2 for the basis' own Laplacian kind.
Eigen::VectorXd eigen_residuals(const Graph& g, const EigenBasis& basis);

struct SymmetricEigenResult {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // unit columns
  Eigen::VectorXd residuals;
  int restarts = 0;
};

/// All eigenpairs of a symmetric matrix via a dense solver, ascending.
SymmetricEigenResult dense_symmetric_eigen(const SparseRealMatrix& sym);

/// k lowest pairs of a symmetric matrix by thick-restart Lanczos with full
/// reorthogonalisation, run on (upper_bound * I - sym) so the wanted end of the
/// spectrum is the dominant one. Throws NumericalError with the residual norms
/// when `max_restarts` is exhausted.
SymmetricEigenResult lanczos_lowest(const SparseRealMatrix& sym, Index k, double tol, int max_restarts,
                                    double upper_bound);

}  // namespace dgn
