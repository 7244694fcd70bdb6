#include "dgn/spectral.hpp"

#include "dgn/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dgn {

std::string_view to_string(LaplacianKind kind) {
  switch (kind) {
    case LaplacianKind::combinatorial: return "combinatorial";
    case LaplacianKind::degree_normalized: return "degree_normalized";
    case LaplacianKind::symmetric_normalized: return "symmetric_normalized";
  }
  return "combinatorial";
}

LaplacianKind parse_laplacian_kind(std::string_view name) {
  if (name == "combinatorial") return LaplacianKind::combinatorial;
  if (name == "degree_normalized" || name == "norm") return LaplacianKind::degree_normalized;
  if (name == "symmetric_normalized" || name == "sym") return LaplacianKind::symmetric_normalized;
  throw ValidationError("unknown Laplacian kind '" + std::string(name) + "'");
}

SparseRealMatrix laplacian(const Graph& g, LaplacianKind kind) {
  const Index n = g.node_count();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(n + 2 * g.edge_count()));
  for (Index i = 0; i < n; ++i) {
    const double di = static_cast<double>(g.degree(i));
    if (di == 0.0) continue;
    switch (kind) {
      case LaplacianKind::combinatorial:
        triplets.emplace_back(i, i, di);
        for (const Index j : g.neighbors(i)) triplets.emplace_back(i, j, -1.0);
        break;
      case LaplacianKind::degree_normalized:
        triplets.emplace_back(i, i, 1.0);
        for (const Index j : g.neighbors(i)) triplets.emplace_back(i, j, -1.0 / di);
        break;
      case LaplacianKind::symmetric_normalized:
        triplets.emplace_back(i, i, 1.0);
        for (const Index j : g.neighbors(i)) {
          triplets.emplace_back(i, j, -1.0 / std::sqrt(di * static_cast<double>(g.degree(j))));
        }
        break;
    }
  }
  SparseRealMatrix l(n, n);
  l.setFromTriplets(triplets.begin(), triplets.end());
  return l;
}

std::vector<std::vector<Index>> EigenBasis::repeated_groups() const {
  std::vector<std::vector<Index>> out;
  for (const auto& grp : groups) {
    if (grp.size() > 1) out.push_back(grp);
  }
  return out;
}

std::vector<std::vector<Index>> multiplicity_groups(const Eigen::VectorXd& ascending, double rel_tol) {
  std::vector<std::vector<Index>> groups;
  for (Index i = 0; i < ascending.size(); ++i) {
    if (i > 0) {
      const double a = ascending[i - 1];
      const double b = ascending[i];
      const double scale = std::max({1.0, std::abs(a), std::abs(b)});
      if (std::abs(b - a) <= rel_tol * scale) {
        groups.back().push_back(i);
        continue;
      }
    }
    groups.push_back({i});
  }
  return groups;
}

void canonicalize_sign(Eigen::Ref<Eigen::VectorXd> v) {
  if (v.size() == 0) return;
  const double peak = v.cwiseAbs().maxCoeff();
  if (peak == 0.0) return;
  for (Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) >= peak * (1.0 - 1e-8)) {
      if (v[i] < 0) v = -v;
      return;
    }
  }
}

namespace {

struct ComponentPairs {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;  // local coordinates
};

// Canonical orthonormal basis of span(block): Gram-Schmidt on P e_i, P = block block^T.
Eigen::MatrixXd canonical_span_basis(const Eigen::MatrixXd& block) {
  const Index m = block.rows();
  const Index r = block.cols();
  Eigen::MatrixXd out(m, r);
  Index found = 0;
  for (Index i = 0; i < m && found < r; ++i) {
    Eigen::VectorXd w = block * block.row(i).transpose();
    for (int pass = 0; pass < 2; ++pass) {
      for (Index c = 0; c < found; ++c) w -= out.col(c).dot(w) * out.col(c);
    }
    const double norm = w.norm();
    if (norm > 1e-6) out.col(found++) = w / norm;
  }
  // Only reachable under severe loss of orthogonality in the input block.
  for (Index c = found; c < r; ++c) out.col(c) = block.col(c);
  return out;
}

ComponentPairs solve_component(const Graph& g, const std::vector<Index>& nodes, const EigenOptions& opt) {
  const Index m = static_cast<Index>(nodes.size());
  ComponentPairs out;
  if (m == 1) {
    out.values = Eigen::VectorXd::Zero(1);
    out.vectors = Eigen::MatrixXd::Ones(1, 1);
    return out;
  }
  std::vector<Index> local(static_cast<std::size_t>(g.node_count()), -1);
  for (Index i = 0; i < m; ++i) local[nodes[i]] = i;
  std::vector<std::pair<Index, Index>> edges;
  Index max_degree = 0;
  for (const Index u : nodes) {
    max_degree = std::max(max_degree, g.degree(u));
    for (const Index v : g.neighbors(u)) {
      if (u < v) edges.emplace_back(local[u], local[v]);
    }
  }
  const Graph sub = build_graph(m, edges);
  const bool normalized = opt.kind != LaplacianKind::combinatorial;
  const SparseRealMatrix sym = laplacian(sub, normalized ? LaplacianKind::symmetric_normalized : LaplacianKind::combinatorial);
  const double upper = normalized ? 2.0 : 2.0 * static_cast<double>(max_degree);
  const double scale = std::max(1.0, upper);

  const bool dense = opt.solver == EigenSolverKind::dense ||
                     (opt.solver == EigenSolverKind::automatic && m <= opt.dense_threshold);
  const Index want = std::min(opt.k, m);
  SymmetricEigenResult res;
  double tol = opt.tol;
  if (dense) {
    if (tol <= 0) tol = 1e-10;
    res = dense_symmetric_eigen(sym);
  } else {
    if (tol <= 0) tol = 1e-8;
    res = lanczos_lowest(sym, std::min(m, want + 4), tol, opt.max_restarts, upper);
  }
  for (Index c = 0; c < res.values.size(); ++c) {
    if (res.residuals[c] > tol * scale) {
      throw NumericalError("eigenpair residual " + std::to_string(res.residuals[c]) + " exceeds tolerance",
                           std::vector<double>(res.residuals.begin(), res.residuals.end()));
    }
  }

  Eigen::MatrixXd u = res.vectors;
  for (const auto& grp : multiplicity_groups(res.values, opt.multiplicity_tol)) {
    if (grp.size() < 2) continue;
    const Index first = grp.front();
    const Index r = static_cast<Index>(grp.size());
    u.middleCols(first, r) = canonical_span_basis(u.middleCols(first, r));
  }

  const Index keep = std::min(want, res.values.size());
  out.values = res.values.head(keep);
  out.vectors = u.leftCols(keep);
  if (opt.kind == LaplacianKind::degree_normalized) {
    for (Index i = 0; i < m; ++i) out.vectors.row(i) /= std::sqrt(static_cast<double>(sub.degree(i)));
    for (Index c = 0; c < keep; ++c) out.vectors.col(c).normalize();
  }
  for (Index c = 0; c < keep; ++c) canonicalize_sign(out.vectors.col(c));
  return out;
}

EigenBasis embed(const Graph& g, LaplacianKind kind, const std::vector<Index>& nodes, Index component,
                 const ComponentPairs& pairs, double multiplicity_tol) {
  EigenBasis b;
  b.kind = kind;
  b.eigenvalues = pairs.values;
  b.eigenvectors = Eigen::MatrixXd::Zero(g.node_count(), pairs.values.size());
  for (Index i = 0; i < static_cast<Index>(nodes.size()); ++i) b.eigenvectors.row(nodes[i]) = pairs.vectors.row(i);
  b.component_of.assign(static_cast<std::size_t>(pairs.values.size()), component);
  b.groups = multiplicity_groups(b.eigenvalues, multiplicity_tol);
  return b;
}

void validate_options(const Graph& g, const EigenOptions& opt) {
  if (opt.k < 1 || opt.k > std::max<Index>(g.node_count(), 1) || g.node_count() == 0) {
    throw ValidationError("eigen: k=" + std::to_string(opt.k) + " must satisfy 1 <= k <= node count (" +
                          std::to_string(g.node_count()) + ")");
  }
}

}  // namespace

std::vector<EigenBasis> component_eigen_bases(const Graph& g, const EigenOptions& options) {
  if (options.k < 1) throw ValidationError("eigen: k must be >= 1");
  const auto comps = connected_components(g);
  std::vector<EigenBasis> out;
  out.reserve(static_cast<std::size_t>(comps.component_count));
  for (Index c = 0; c < comps.component_count; ++c) {
    const auto nodes = comps.members(c);
    out.push_back(embed(g, options.kind, nodes, c, solve_component(g, nodes, options), options.multiplicity_tol));
  }
  return out;
}

EigenBasis eigen_lowest(const Graph& g, const EigenOptions& options) {
  validate_options(g, options);
  const auto per_component = component_eigen_bases(g, options);

  struct Candidate {
    double value;
    Index component;
    Index local;
  };
  std::vector<Candidate> all;
  for (const auto& b : per_component) {
    for (Index c = 0; c < b.size(); ++c) all.push_back({b.eigenvalues[c], b.component_of[c], c});
  }
  std::stable_sort(all.begin(), all.end(), [](const Candidate& a, const Candidate& b) { return a.value < b.value; });
  // Eigenvalues equal within tolerance are ordered by component so float noise cannot reorder them.
  for (std::size_t start = 0; start < all.size();) {
    std::size_t end = start + 1;
    while (end < all.size()) {
      const double a = all[end - 1].value;
      const double b = all[end].value;
      if (std::abs(b - a) > options.multiplicity_tol * std::max({1.0, std::abs(a), std::abs(b)})) break;
      ++end;
    }
    std::stable_sort(all.begin() + static_cast<std::ptrdiff_t>(start), all.begin() + static_cast<std::ptrdiff_t>(end),
                     [](const Candidate& a, const Candidate& b) {
                       return std::tie(a.component, a.local) < std::tie(b.component, b.local);
                     });
    start = end;
  }

  const Index k = std::min<Index>(options.k, static_cast<Index>(all.size()));
  EigenBasis out;
  out.kind = options.kind;
  out.eigenvalues.resize(k);
  out.eigenvectors.resize(g.node_count(), k);
  out.component_of.resize(static_cast<std::size_t>(k));
  for (Index c = 0; c < k; ++c) {
    const auto& cand = all[static_cast<std::size_t>(c)];
    out.eigenvalues[c] = cand.value;
    out.eigenvectors.col(c) = per_component[cand.component].eigenvectors.col(cand.local);
    out.component_of[c] = cand.component;
  }
  out.groups = multiplicity_groups(out.eigenvalues, options.multiplicity_tol);
  return out;
}

Eigen::VectorXd assemble_component_vector(std::span<const EigenBasis> per_component, Index i) {
  if (per_component.empty()) return {};
  Eigen::VectorXd v = Eigen::VectorXd::Zero(per_component.front().eigenvectors.rows());
  for (const auto& b : per_component) {
    if (i < b.size()) v += b.eigenvectors.col(i);
  }
  return v;
}

Eigen::MatrixXd sample_eigenspace_basis(const EigenBasis& basis, std::span<const Index> group, std::uint64_t seed) {
  if (group.size() < 2) throw ValidationError("eigenspace sampling needs a group of dimension >= 2");
  const Index r = static_cast<Index>(group.size());
  Eigen::MatrixXd block(basis.eigenvectors.rows(), r);
  for (Index c = 0; c < r; ++c) {
    if (group[c] < 0 || group[c] >= basis.size()) throw ValidationError("eigenspace group index out of range");
    block.col(c) = basis.eigenvectors.col(group[c]);
  }
  SeededGenerator rng(seed);
  Eigen::MatrixXd gauss(r, r);
  for (Index i = 0; i < r; ++i) {
    for (Index j = 0; j < r; ++j) gauss(i, j) = rng.normal();
  }
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(gauss);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(r, r);
  const Eigen::MatrixXd rmat = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < r; ++j) {
    if (rmat(j, j) < 0) q.col(j) = -q.col(j);
  }
  // Re-orthonormalize: normalized-kind eigenvectors are not mutually orthogonal.
  const Eigen::HouseholderQR<Eigen::MatrixXd> span_qr(block);
  Eigen::MatrixXd orth = span_qr.householderQ() * Eigen::MatrixXd::Identity(block.rows(), r);
  return orth * q;
}

Eigen::VectorXd eigen_residuals(const Graph& g, const EigenBasis& basis) {
  const SparseRealMatrix l = laplacian(g, basis.kind);
  Eigen::VectorXd res(basis.size());
  for (Index c = 0; c < basis.size(); ++c) {
    res[c] = (l * basis.eigenvectors.col(c) - basis.eigenvalues[c] * basis.eigenvectors.col(c)).norm();
  }
  return res;
}

SymmetricEigenResult dense_symmetric_eigen(const SparseRealMatrix& sym) {
  const Eigen::MatrixXd dense(sym);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense);
  if (solver.info() != Eigen::Success) throw NumericalError("dense eigensolver failed to converge");
  SymmetricEigenResult out;
  out.values = solver.eigenvalues();
  out.vectors = solver.eigenvectors();
  out.residuals = (dense * out.vectors - out.vectors * out.values.asDiagonal()).colwise().norm().transpose();
  return out;
}

}  // namespace dgn
