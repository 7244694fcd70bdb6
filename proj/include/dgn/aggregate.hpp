#pragma once

#include "dgn/fields.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dgn {

enum class AggregatorKind { av, dx, av_center, dx_center, av_0pad, dx_0pad };

std::string_view to_string(AggregatorKind kind);
AggregatorKind parse_aggregator_kind(std::string_view name);
/// dx, dx_center and dx_0pad.
bool is_derivative_kind(AggregatorKind kind);

enum class FieldTransformKind { identity, soft_harden, harden, forward, backward, forward_copy, backward_copy, reflect };

struct FieldTransform {
  FieldTransformKind kind = FieldTransformKind::identity;
  double temperature = 1.0;  // soft_harden only
};

std::string_view to_string(FieldTransformKind kind);
FieldTransformKind parse_field_transform_kind(std::string_view name);

template <typename Scalar>
struct BasicAggregationMatrix {
  SparseMatrix<Scalar> matrix;
  AggregatorKind kind = AggregatorKind::av;
  std::string source_field;
  double epsilon = 1e-8;
};

using AggregationMatrix = BasicAggregationMatrix<double>;

namespace detail {

template <typename Scalar>
Scalar sign_of(Scalar v) {
  return v > Scalar(0) ? Scalar(1) : (v < Scalar(0) ? Scalar(-1) : Scalar(0));
}

// Keeps the largest-magnitude entry of each row (lowest column on ties) as +-1.
template <typename Scalar>
SparseMatrix<Scalar> harden(const SparseMatrix<Scalar>& f) {
  std::vector<Eigen::Triplet<Scalar>> triplets;
  for (Index i = 0; i < f.outerSize(); ++i) {
    Index best = -1;
    Scalar best_abs = Scalar(0), best_val = Scalar(0);
    for (typename SparseMatrix<Scalar>::InnerIterator it(f, i); it; ++it) {
      if (std::abs(it.value()) > best_abs) {
        best_abs = std::abs(it.value());
        best_val = it.value();
        best = it.col();
      }
    }
    if (best >= 0) triplets.emplace_back(i, best, sign_of(best_val));
  }
  SparseMatrix<Scalar> out(f.rows(), f.cols());
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

// sign(F) * softmax(T |F|) over each row's nonzero entries.
template <typename Scalar>
SparseMatrix<Scalar> soft_harden(const SparseMatrix<Scalar>& f, Scalar temperature) {
  SparseMatrix<Scalar> out = detail::filter_map(f, [](Scalar v) { return v; });
  for (Index i = 0; i < out.outerSize(); ++i) {
    Scalar peak = Scalar(0);
    for (typename SparseMatrix<Scalar>::InnerIterator it(out, i); it; ++it) peak = std::max(peak, Scalar(std::abs(it.value())));
    Scalar total = Scalar(0);
    for (typename SparseMatrix<Scalar>::InnerIterator it(out, i); it; ++it) {
      total += std::exp(temperature * (std::abs(it.value()) - peak));
    }
    for (typename SparseMatrix<Scalar>::InnerIterator it(out, i); it; ++it) {
      it.valueRef() = sign_of(it.value()) * std::exp(temperature * (std::abs(it.value()) - peak)) / total;
    }
  }
  return detail::filter_map(out, [](Scalar v) { return v; });
}

// Row i scaled by 1 / (||row||_1 + eps); absolute values when `absolute`.
template <typename Scalar>
SparseMatrix<Scalar> unit_l1(const SparseMatrix<Scalar>& f, Scalar eps, bool absolute) {
  SparseMatrix<Scalar> out = f;
  const Vector<Scalar> rn = row_norms(f, 1);
  for (Index i = 0; i < out.outerSize(); ++i) {
    for (typename SparseMatrix<Scalar>::InnerIterator it(out, i); it; ++it) {
      const Scalar v = absolute ? Scalar(std::abs(it.value())) : it.value();
      it.valueRef() = v / (rn[i] + eps);
    }
  }
  return out;
}

template <typename Scalar>
SparseMatrix<Scalar> minus_row_sum_diagonal(const SparseMatrix<Scalar>& m) {
  const Vector<Scalar> sums = divergence(m);
  SparseMatrix<Scalar> diag(m.rows(), m.cols());
  std::vector<Eigen::Triplet<Scalar>> t;
  for (Index i = 0; i < m.rows(); ++i) {
    if (sums[i] != Scalar(0)) t.emplace_back(i, i, sums[i]);
  }
  diag.setFromTriplets(t.begin(), t.end());
  return SparseMatrix<Scalar>(m - diag);
}

template <typename Scalar>
SparseMatrix<Scalar> rows_where(const SparseMatrix<Scalar>& m, const std::vector<char>& keep) {
  SparseMatrix<Scalar> out = m;
  out.prune([&](const Index& r, const Index&, const Scalar&) { return keep[static_cast<std::size_t>(r)] != 0; });
  return out;
}

}  // namespace detail

/// identity, soft_harden, harden, forward (F+), backward (F-, nonnegative),
/// forward_copy / backward_copy (hardened parts) and reflect (-F).
template <typename Scalar>
SparseMatrix<Scalar> transform_field(const SparseMatrix<Scalar>& f, const FieldTransform& t) {
  switch (t.kind) {
    case FieldTransformKind::identity: return f;
    case FieldTransformKind::soft_harden:
      if (!(t.temperature > 0)) throw ValidationError("soft_harden: temperature must be positive");
      return detail::soft_harden(f, static_cast<Scalar>(t.temperature));
    case FieldTransformKind::harden: return detail::harden(f);
    case FieldTransformKind::forward: return positive_part(f);
    case FieldTransformKind::backward: return negative_part(f);
    case FieldTransformKind::forward_copy: return detail::harden(positive_part(f));
    case FieldTransformKind::backward_copy: return detail::harden(negative_part(f));
    case FieldTransformKind::reflect: return SparseMatrix<Scalar>(-f);
  }
  return f;
}

/// Build B for `kind` from a field-shaped matrix supported on g's edges.
///
/// The center and 0pad kinds split F = F+ + F-s where F-s = min(F, 0) keeps its
/// sign, so the backward half of a derivative subtracts.
template <typename Scalar>
BasicAggregationMatrix<Scalar> build_aggregator(const Graph& g, const SparseMatrix<Scalar>& field, AggregatorKind kind,
                                                double epsilon = 1e-8, std::string source_id = {}) {
  if (!(epsilon > 0)) throw ValidationError("aggregator epsilon must be positive");
  detail::require_support_on_edges(g, field, "build_aggregator");
  const Scalar eps = static_cast<Scalar>(epsilon);
  SparseMatrix<Scalar> f = detail::filter_map(field, [](Scalar v) { return v; });
  SparseMatrix<Scalar> b;
  const auto split = [&](bool absolute) {
    const SparseMatrix<Scalar> plus = positive_part(f);
    const SparseMatrix<Scalar> minus = absolute ? negative_part(f) : SparseMatrix<Scalar>(-negative_part(f));
    return std::pair{detail::unit_l1(plus, eps, absolute), detail::unit_l1(minus, eps, absolute)};
  };
  switch (kind) {
    case AggregatorKind::av: b = detail::unit_l1(f, eps, true); break;
    case AggregatorKind::dx: b = detail::minus_row_sum_diagonal(detail::unit_l1(f, eps, false)); break;
    case AggregatorKind::av_center: {
      auto [p, m] = split(true);
      b = p + m;
      const Vector<Scalar> rn = row_norms(b, 1);
      for (Index i = 0; i < b.outerSize(); ++i) {
        for (typename SparseMatrix<Scalar>::InnerIterator it(b, i); it; ++it) it.valueRef() /= rn[i];
      }
      break;
    }
    case AggregatorKind::dx_center: {
      auto [p, m] = split(false);
      b = detail::minus_row_sum_diagonal(SparseMatrix<Scalar>(Scalar(0.5) * (p + m)));
      break;
    }
    case AggregatorKind::av_0pad: {
      auto [p, m] = split(true);
      b = Scalar(0.5) * (p + m);
      break;
    }
    case AggregatorKind::dx_0pad: {
      auto [p, m] = split(false);
      const Vector<Scalar> has_plus = row_norms(p, 1);
      const Vector<Scalar> has_minus = row_norms(m, 1);
      std::vector<char> forward_only(f.rows()), backward_only(f.rows()), both(f.rows());
      for (Index i = 0; i < f.rows(); ++i) {
        forward_only[i] = has_minus[i] == Scalar(0) && has_plus[i] != Scalar(0);
        backward_only[i] = has_plus[i] == Scalar(0) && has_minus[i] != Scalar(0);
        both[i] = has_plus[i] != Scalar(0) && has_minus[i] != Scalar(0);
      }
      const SparseMatrix<Scalar> centered =
          detail::minus_row_sum_diagonal(SparseMatrix<Scalar>(Scalar(0.5) * (p + m)));
      b = detail::rows_where(p, forward_only) + detail::rows_where(m, backward_only) +
          detail::rows_where(centered, both);
      break;
    }
  }
  b.makeCompressed();
  return {std::move(b), kind, std::move(source_id), epsilon};
}

template <typename Scalar>
BasicAggregationMatrix<Scalar> build_aggregator(const BasicVectorField<Scalar>& field, AggregatorKind kind,
                                                double epsilon = 1e-8) {
  return build_aggregator(field.graph(), field.values(), kind, epsilon, field_hash(field));
}

/// B X, column by column.
template <typename Scalar, typename Derived>
Matrix<Scalar> apply(const BasicAggregationMatrix<Scalar>& b, const Eigen::MatrixBase<Derived>& x) {
  if (x.rows() != b.matrix.cols()) {
    throw ValidationError("apply: feature rows " + std::to_string(x.rows()) + " != aggregator size " +
                          std::to_string(b.matrix.cols()));
  }
  return b.matrix * x;
}

// ---------------------------------------------------------------------------
// Radius-R kernels

enum class PermutationMode { full_perm, reverse_order };

std::string_view to_string(PermutationMode mode);
PermutationMode parse_permutation_mode(std::string_view name);

/// One integer per field: v_j steps along field j (negative = backward).
using WalkVector = std::vector<int>;

struct RadiusKernelSpec {
  std::vector<VectorField> fields;
  int radius = 1;
  std::map<WalkVector, double> coefficients;
  PermutationMode mode = PermutationMode::reverse_order;
  /// Error when an intermediate product stores more than this fraction of n*n entries.
  double max_density = 1.0;
};

/// B_fb^+(F) = F+ / ||F_i||_1 and B_fb^-(F) = F- / ||F_i||_1; zero rows stay zero.
SparseRealMatrix forward_backward_step(const SparseRealMatrix& field, int sign);

/// Sum over walk vectors V of a_V times the product of step matrices. In
/// full_perm mode each V contributes the mean over all n! factor orderings;
/// reverse_order uses B_n ... B_1 only.
SparseRealMatrix radius_r_kernel(const RadiusKernelSpec& spec);

/// Product of step matrices for one walk, factors in the given order of field indices.
SparseRealMatrix walk_product(std::span<const SparseRealMatrix> forward_steps,
                              std::span<const SparseRealMatrix> backward_steps, const WalkVector& v,
                              std::span<const int> order, double max_density = 1.0);

/// Integer walk vectors with ||V||_1 <= R, ordered by length then lexicographically.
std::vector<WalkVector> enumerate_walk_vectors(int n, int radius);

/// Ordered step words of length <= R over the 2n signed field steps. Each word
/// is a list of signed 1-based field ids.
std::vector<std::vector<int>> enumerate_step_words(int n, int radius);

/// Sum over r = 0..R of (2n)^r.
long long walk_word_count(int n, int radius);

}  // namespace dgn
