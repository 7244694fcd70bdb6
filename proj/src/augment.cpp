#include "dgn/augment.hpp"

#include "dgn/random.hpp"

#include <cmath>

namespace dgn {

namespace {

Eigen::VectorXd row_dot(const SparseRealMatrix& a, const SparseRealMatrix& b) { return pointwise_inner(a, b); }

SparseRealMatrix scale_rows(const SparseRealMatrix& m, const Eigen::VectorXd& s) {
  SparseRealMatrix out = m;
  for (Index i = 0; i < out.outerSize(); ++i) {
    for (SparseRealMatrix::InnerIterator it(out, i); it; ++it) it.valueRef() *= s[i];
  }
  return out;
}

SparseRealMatrix unit_l2(const SparseRealMatrix& m) {
  const Eigen::VectorXd rn = row_norms(m, 2);
  Eigen::VectorXd inv(rn.size());
  for (Index i = 0; i < rn.size(); ++i) inv[i] = rn[i] > 0 ? 1.0 / rn[i] : 0.0;
  return scale_rows(m, inv);
}

}  // namespace

std::vector<Index> FieldPlane::degenerate_rows() const {
  std::vector<Index> out;
  for (std::size_t i = 0; i < degenerate.size(); ++i) {
    if (degenerate[i]) out.push_back(static_cast<Index>(i));
  }
  return out;
}

FieldPlane build_plane(const VectorField& f1, const VectorField& f2, double colinear_tol) {
  if (!f1.graph().same_structure(f2.graph())) throw ValidationError("build_plane: fields live on different graphs");
  FieldPlane p;
  p.graph = f1.graph_ptr();
  const Index n = f1.graph().node_count();
  p.f1_hat = unit_l2(f1.values());
  p.f2_hat = unit_l2(f2.values());
  const Eigen::VectorXd n1 = row_norms(f1.values(), 2), n2 = row_norms(f2.values(), 2);
  const Eigen::VectorXd cosines = row_dot(p.f1_hat, p.f2_hat);
  const SparseRealMatrix residual = p.f2_hat - scale_rows(p.f1_hat, cosines);
  const Eigen::VectorXd sines = row_norms(residual, 2);
  p.alpha = Eigen::VectorXd::Zero(n);
  p.degenerate.assign(static_cast<std::size_t>(n), 0);
  Eigen::VectorXd inv(n);
  Index usable = 0;
  for (Index i = 0; i < n; ++i) {
    const bool bad = n1[i] == 0.0 || n2[i] == 0.0 || sines[i] < colinear_tol;
    p.degenerate[i] = bad;
    inv[i] = bad ? 0.0 : 1.0 / sines[i];
    if (!bad) {
      p.alpha[i] = std::atan2(sines[i], cosines[i]);
      ++usable;
    }
  }
  if (usable == 0) throw ValidationError("build_plane: fields are colinear on every row (need non-colinear fields)");
  p.f2_perp = scale_rows(residual, inv);
  p.f2_perp.prune(0.0);
  return p;
}

SparseRealMatrix rotate_rows(const FieldPlane& plane, const SparseRealMatrix& m, double theta) {
  const Eigen::VectorXd x = row_dot(m, plane.f1_hat);
  const Eigen::VectorXd y = row_dot(m, plane.f2_perp);
  const double c = std::cos(theta), s = std::sin(theta);
  const Index n = m.rows();
  Eigen::VectorXd along(n), across(n), keep(n);
  for (Index i = 0; i < n; ++i) {
    const bool bad = plane.degenerate[i];
    along[i] = bad ? 0.0 : x[i] * c - y[i] * s;
    across[i] = bad ? 0.0 : x[i] * s + y[i] * c;
    keep[i] = bad ? 1.0 : 0.0;
  }
  SparseRealMatrix out = scale_rows(plane.f1_hat, along) + scale_rows(plane.f2_perp, across) + scale_rows(m, keep);
  out.prune(0.0);
  return out;
}

RotatedPair rotate(const FieldPlane& plane, double theta) {
  const Index n = plane.alpha.size();
  Eigen::VectorXd c1(n), s1(n), c2(n), s2(n), keep(n);
  for (Index i = 0; i < n; ++i) {
    const bool bad = plane.degenerate[i];
    c1[i] = bad ? 0.0 : std::cos(theta);
    s1[i] = bad ? 0.0 : std::sin(theta);
    c2[i] = bad ? 0.0 : std::cos(theta + plane.alpha[i]);
    s2[i] = bad ? 0.0 : std::sin(theta + plane.alpha[i]);
    keep[i] = bad ? 1.0 : 0.0;
  }
  RotatedPair out;
  out.f1 = scale_rows(plane.f1_hat, c1) + scale_rows(plane.f2_perp, s1) + scale_rows(plane.f1_hat, keep);
  out.f2 = scale_rows(plane.f1_hat, c2) + scale_rows(plane.f2_perp, s2) + scale_rows(plane.f2_hat, keep);
  out.f1.prune(0.0);
  out.f2.prune(0.0);
  out.passed_through = plane.degenerate_rows();
  return out;
}

VectorField distort(const VectorField& f, std::uint64_t seed, double scale) {
  if (!(scale >= 0) || !std::isfinite(scale)) throw ValidationError("distort: scale must be finite and >= 0");
  const auto edges = f.graph().edges();
  double m = 0.0;
  for (const auto& e : edges) m += std::abs(f(e.u, e.v));
  if (!edges.empty()) m /= static_cast<double>(edges.size());
  SeededGenerator rng(seed);
  std::map<std::pair<Index, Index>, double> noise;
  for (const auto& e : edges) noise[{e.u, e.v}] = scale == 0.0 ? 0.0 : rng.uniform(-scale * m, scale * m);
  return VectorField::from_edges(f.graph_ptr(), [&](Index i, Index j) { return f(i, j) + noise.at({i, j}); });
}

}  // namespace dgn
