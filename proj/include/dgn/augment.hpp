#pragma once

#include "dgn/fields.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace dgn {

/// Two fields reduced to a per-row orthonormal frame.
///
/// Rows where either field vanishes or the two are locally colinear are
/// flagged in `degenerate`; rotation passes them through unchanged.
struct FieldPlane {
  std::shared_ptr<const Graph> graph;
  SparseRealMatrix f1_hat;
  SparseRealMatrix f2_hat;
  SparseRealMatrix f2_perp;
  Eigen::VectorXd alpha;
  std::vector<char> degenerate;

  std::vector<Index> degenerate_rows() const;
};

FieldPlane build_plane(const VectorField& f1, const VectorField& f2, double colinear_tol = 1e-10);

struct RotatedPair {
  SparseRealMatrix f1;
  SparseRealMatrix f2;
  std::vector<Index> passed_through;
};

/// F1 -> cos(theta) F1^ + sin(theta) F2perp and F2 -> cos(theta + alpha) F1^ + sin(theta + alpha) F2perp, row-wise.
RotatedPair rotate(const FieldPlane& plane, double theta);

/// Rotate every row of `m` by theta inside the plane's frame. Components of m
/// outside the frame are dropped; degenerate rows are copied.
SparseRealMatrix rotate_rows(const FieldPlane& plane, const SparseRealMatrix& m, double theta);

/// F + R o A with R antisymmetric, R[i,j] ~ U(-scale m, scale m) drawn per edge
/// i < j in sorted order and m the mean |F| over edges.
VectorField distort(const VectorField& f, std::uint64_t seed, double scale);

struct AugmentationRecord {
  std::string op;
  double parameter = 0.0;  // theta or scale
  std::uint64_t seed = 0;
  std::string generator;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
};

}  // namespace dgn
