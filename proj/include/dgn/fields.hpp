#pragma once

#include "dgn/graph.hpp"
#include "dgn/hash.hpp"

#include <cmath>
#include <memory>
#include <string>
#include <string_view>

namespace dgn {

enum class RowNorm { row_l1, row_l2, global };

/// How a field is scaled to unit rows. `global` divides every entry by the
/// Frobenius norm of the whole field (plus epsilon) and keeps antisymmetry.
struct FieldNorm {
  RowNorm kind = RowNorm::row_l1;
  double epsilon = 1e-8;
};

std::string_view to_string(RowNorm kind);
RowNorm parse_row_norm(std::string_view name);

namespace detail {

// n x n matrix whose pattern is exactly the directed edge set of g.
template <typename Scalar, typename Fn>
SparseMatrix<Scalar> edge_pattern_matrix(const Graph& g, Fn&& value) {
  const Index n = g.node_count();
  SparseMatrix<Scalar> m(n, n);
  Eigen::VectorXi per_row(n);
  for (Index i = 0; i < n; ++i) per_row[i] = static_cast<int>(g.degree(i));
  m.reserve(per_row);
  for (Index i = 0; i < n; ++i) {
    for (const Index j : g.neighbors(i)) m.insert(i, j) = value(i, j);
  }
  m.makeCompressed();
  return m;
}

template <typename Scalar, typename Keep>
SparseMatrix<Scalar> filter_map(const SparseMatrix<Scalar>& src, Keep&& map_value) {
  std::vector<Eigen::Triplet<Scalar>> triplets;
  triplets.reserve(static_cast<std::size_t>(src.nonZeros()));
  for (Index i = 0; i < src.outerSize(); ++i) {
    for (typename SparseMatrix<Scalar>::InnerIterator it(src, i); it; ++it) {
      const Scalar v = map_value(it.value());
      if (v != Scalar(0)) triplets.emplace_back(it.row(), it.col(), v);
    }
  }
  SparseMatrix<Scalar> out(src.rows(), src.cols());
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

template <typename Scalar>
void require_support_on_edges(const Graph& g, const SparseMatrix<Scalar>& m, std::string_view what) {
  if (m.rows() != g.node_count() || m.cols() != g.node_count()) {
    throw ValidationError(std::string(what) + ": matrix is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                          ", graph has " + std::to_string(g.node_count()) + " nodes");
  }
  for (Index i = 0; i < m.outerSize(); ++i) {
    for (typename SparseMatrix<Scalar>::InnerIterator it(m, i); it; ++it) {
      if (it.value() != Scalar(0) && !g.has_edge(it.row(), it.col())) {
        throw ValidationError(std::string(what) + ": entry (" + std::to_string(it.row()) + "," +
                              std::to_string(it.col()) + ") is not an edge of the graph");
      }
    }
  }
}

}  // namespace detail

/// Antisymmetric edge function F[i,j] = -F[j,i], stored with pattern equal to
/// the graph's directed edges (explicit zeros kept).
template <typename Scalar>
class BasicVectorField {
 public:
  using scalar_type = Scalar;

  BasicVectorField(std::shared_ptr<const Graph> graph, const SparseMatrix<Scalar>& values) : graph_(std::move(graph)) {
    if (!graph_) throw ValidationError("vector field: null graph");
    detail::require_support_on_edges(*graph_, values, "vector field");
    values_ = detail::edge_pattern_matrix<Scalar>(*graph_, [&](Index i, Index j) { return values.coeff(i, j); });
    for (const auto& e : graph_->edges()) {
      const Scalar a = values_.coeff(e.u, e.v);
      const Scalar b = values_.coeff(e.v, e.u);
      if (!std::isfinite(static_cast<double>(a)) || !std::isfinite(static_cast<double>(b))) {
        throw ValidationError("vector field: non-finite value on edge");
      }
      if (a != -b) {
        throw ValidationError("vector field: not antisymmetric on edge (" + std::to_string(e.u) + "," +
                              std::to_string(e.v) + ")");
      }
    }
  }

  /// F[i,j] = value(i, j) for i < j, mirrored with a negation.
  template <typename Fn>
  static BasicVectorField from_edges(std::shared_ptr<const Graph> graph, Fn&& value) {
    BasicVectorField f;
    f.graph_ = std::move(graph);
    // value is called exactly once per edge, so stateful generators stay antisymmetric.
    const Index n = f.graph_->node_count();
    std::vector<Eigen::Triplet<Scalar>> t;
    t.reserve(2 * f.graph_->edges().size());
    for (const auto& e : f.graph_->edges()) {
      const Scalar v = Scalar(value(e.u, e.v));
      t.emplace_back(e.u, e.v, v);
      t.emplace_back(e.v, e.u, Scalar(-v));
    }
    f.values_ = SparseMatrix<Scalar>(n, n);
    f.values_.setFromTriplets(t.begin(), t.end());
    return f;
  }

  static BasicVectorField zero(std::shared_ptr<const Graph> graph) {
    return from_edges(std::move(graph), [](Index, Index) { return Scalar(0); });
  }

  const Graph& graph() const noexcept { return *graph_; }
  const std::shared_ptr<const Graph>& graph_ptr() const noexcept { return graph_; }
  const SparseMatrix<Scalar>& values() const noexcept { return values_; }
  Scalar operator()(Index i, Index j) const { return values_.coeff(i, j); }

 private:
  BasicVectorField() = default;

  std::shared_ptr<const Graph> graph_;
  SparseMatrix<Scalar> values_;
};

using VectorField = BasicVectorField<double>;

/// Row-scaled field. Generally not antisymmetric, so it is kept apart from
/// BasicVectorField and cannot be normalized a second time by accident.
template <typename Scalar>
struct BasicUnitRowField {
  SparseMatrix<Scalar> values;
  FieldNorm norm;
};

using UnitRowField = BasicUnitRowField<double>;

/// (grad x)[i,j] = x(j) - x(i).
template <typename Derived>
BasicVectorField<typename Derived::Scalar> gradient(std::shared_ptr<const Graph> g, const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  if (!g) throw ValidationError("gradient: null graph");
  if (x.size() != g->node_count()) {
    throw ValidationError("gradient: vector length " + std::to_string(x.size()) + " != node count " +
                          std::to_string(g->node_count()));
  }
  const Vector<Scalar> xv = x;
  return BasicVectorField<Scalar>::from_edges(std::move(g), [&](Index i, Index j) { return xv[j] - xv[i]; });
}

/// (div F)_i = sum over neighbors j of F[i,j].
template <typename Scalar>
Vector<Scalar> divergence(const SparseMatrix<Scalar>& f) {
  Vector<Scalar> out = Vector<Scalar>::Zero(f.rows());
  for (Index i = 0; i < f.outerSize(); ++i) {
    for (typename SparseMatrix<Scalar>::InnerIterator it(f, i); it; ++it) out[i] += it.value();
  }
  return out;
}

template <typename Scalar>
Vector<Scalar> divergence(const BasicVectorField<Scalar>& f) {
  return divergence(f.values());
}

/// <F, H>_i = sum over neighbors j of F[i,j] H[i,j].
template <typename Scalar>
Vector<Scalar> pointwise_inner(const SparseMatrix<Scalar>& f, const SparseMatrix<Scalar>& h) {
  if (f.rows() != h.rows() || f.cols() != h.cols()) throw ValidationError("pointwise_inner: shape mismatch");
  return f.cwiseProduct(h) * Vector<Scalar>::Ones(f.cols());
}

template <typename Scalar>
Vector<Scalar> pointwise_inner(const BasicVectorField<Scalar>& f, const BasicVectorField<Scalar>& h) {
  if (!f.graph().same_structure(h.graph())) throw ValidationError("pointwise_inner: fields live on different graphs");
  return pointwise_inner(f.values(), h.values());
}

template <typename Scalar>
BasicVectorField<Scalar> reflect(const BasicVectorField<Scalar>& f) {
  return BasicVectorField<Scalar>::from_edges(f.graph_ptr(), [&](Index i, Index j) { return -f(i, j); });
}

/// F+ = max(F, 0); stored entries are strictly positive.
template <typename Scalar>
SparseMatrix<Scalar> positive_part(const SparseMatrix<Scalar>& f) {
  return detail::filter_map(f, [](Scalar v) { return v > Scalar(0) ? v : Scalar(0); });
}

/// F- = max(-F, 0), so that F = F+ - F-; stored entries are strictly positive.
template <typename Scalar>
SparseMatrix<Scalar> negative_part(const SparseMatrix<Scalar>& f) {
  return detail::filter_map(f, [](Scalar v) { return v < Scalar(0) ? Scalar(-v) : Scalar(0); });
}

template <typename Scalar>
Vector<Scalar> row_norms(const SparseMatrix<Scalar>& f, int p) {
  Vector<Scalar> out = Vector<Scalar>::Zero(f.rows());
  for (Index i = 0; i < f.outerSize(); ++i) {
    for (typename SparseMatrix<Scalar>::InnerIterator it(f, i); it; ++it) {
      out[i] += p == 1 ? Scalar(std::abs(it.value())) : it.value() * it.value();
    }
  }
  if (p == 2) out = out.cwiseSqrt();
  return out;
}

/// Scale rows (or the whole field) per `norm`. Zero rows stay zero.
template <typename Scalar>
BasicUnitRowField<Scalar> normalize_rows(const SparseMatrix<Scalar>& f, const FieldNorm& norm) {
  if (!(norm.epsilon > 0)) throw ValidationError("field norm epsilon must be positive");
  const Scalar eps = static_cast<Scalar>(norm.epsilon);
  SparseMatrix<Scalar> out = f;
  if (norm.kind == RowNorm::global) {
    const Scalar total = f.norm();
    out /= (total + eps);
  } else {
    const Vector<Scalar> rn = row_norms(f, norm.kind == RowNorm::row_l1 ? 1 : 2);
    for (Index i = 0; i < out.outerSize(); ++i) {
      const Scalar denom = rn[i] + eps;
      for (typename SparseMatrix<Scalar>::InnerIterator it(out, i); it; ++it) it.valueRef() /= denom;
    }
  }
  return {std::move(out), norm};
}

template <typename Scalar>
BasicUnitRowField<Scalar> normalize_rows(const BasicVectorField<Scalar>& f, const FieldNorm& norm) {
  return normalize_rows(f.values(), norm);
}

/// D_F x(i) = sum over neighbors j of (x(j) - x(i)) F[i,j].
template <typename Scalar, typename Derived>
Vector<Scalar> directional_derivative(const Graph& g, const Eigen::MatrixBase<Derived>& x, const SparseMatrix<Scalar>& unit) {
  if (x.size() != g.node_count()) throw ValidationError("directional_derivative: vector length mismatch");
  detail::require_support_on_edges(g, unit, "directional_derivative");
  Vector<Scalar> out = Vector<Scalar>::Zero(g.node_count());
  for (Index i = 0; i < unit.outerSize(); ++i) {
    for (typename SparseMatrix<Scalar>::InnerIterator it(unit, i); it; ++it) {
      out[i] += (x[it.col()] - x[i]) * it.value();
    }
  }
  return out;
}

template <typename Scalar, typename Derived>
Vector<Scalar> directional_derivative(const Graph& g, const Eigen::MatrixBase<Derived>& x,
                                      const BasicUnitRowField<Scalar>& unit) {
  return directional_derivative(g, x, unit.values);
}

/// grad arcsin(phi / max|phi|), with the maximum taken per connected component.
template <typename Derived>
BasicVectorField<typename Derived::Scalar> arcsine_field(std::shared_ptr<const Graph> g, const Eigen::MatrixBase<Derived>& phi) {
  using Scalar = typename Derived::Scalar;
  if (phi.size() != g->node_count()) throw ValidationError("arcsine_field: vector length mismatch");
  const auto comps = connected_components(*g);
  std::vector<Scalar> peak(static_cast<std::size_t>(comps.component_count), Scalar(0));
  for (Index i = 0; i < phi.size(); ++i) {
    peak[comps.labels[i]] = std::max(peak[comps.labels[i]], Scalar(std::abs(phi[i])));
  }
  Vector<Scalar> scaled(phi.size());
  for (Index i = 0; i < phi.size(); ++i) {
    const Scalar p = peak[comps.labels[i]];
    const Scalar r = p == Scalar(0) ? Scalar(0) : std::clamp(Scalar(phi[i] / p), Scalar(-1), Scalar(1));
    scaled[i] = std::asin(r);
  }
  return gradient(std::move(g), scaled);
}

/// SHA-256 over the graph hash and the i<j edge values.
template <typename Scalar>
std::string field_hash(const BasicVectorField<Scalar>& f) {
  Sha256 h;
  h.update("dgn-field-v1");
  h.update(graph_hash(f.graph()));
  for (const auto& e : f.graph().edges()) h.update_double(static_cast<double>(f(e.u, e.v)));
  return h.hex_digest();
}

/// SHA-256 of an arbitrary sparse matrix (shape plus row-major triplets).
std::string matrix_hash(const SparseRealMatrix& m);

}  // namespace dgn
