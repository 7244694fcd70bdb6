#pragma once

#include "dgn/aggregate.hpp"

#include <map>
#include <memory>
#include <vector>

namespace dgn {

/// Weights of a lattice stencil keyed by per-axis offset. Application is a
/// correlation: y(u) = sum over offsets o of k(o) x(u + o).
struct GridStencil {
  int radius = 1;
  std::map<std::vector<int>, double> weights;
};

enum class GridFieldSource {
  arccos_linear,  // (N/pi) grad arccos(phi): +1 on every forward axis edge
  eigen_gradient  // grad phi of the axis cosine eigenvector itself
};

struct GridKernelOptions {
  GridFieldSource fields = GridFieldSource::arccos_linear;
  double epsilon = 1e-8;
  PermutationMode mode = PermutationMode::reverse_order;
};

/// Per-node solution of a B_av + b B_dx + c I along every axis.
struct AxisCoefficients {
  Index node = 0;
  std::vector<double> av;
  std::vector<double> dx;
  double identity = 0.0;
};

struct GridKernelRealization {
  std::vector<Index> dims;
  int radius = 1;
  std::vector<VectorField> axis_fields;
  std::vector<AxisCoefficients> radius1;
  /// Walk coefficients for the |V| >= 2 part (empty for radius 1).
  std::map<WalkVector, double> walk_coefficients;
  SparseRealMatrix matrix;
  std::vector<Index> interior_nodes;
  double max_interior_deviation = 0.0;
};

/// cos(pi (c + 1/2) / N) along `axis`, constant along the others. This is the
/// lowest nontrivial Laplacian eigenvector of the lattice varying on that axis.
Eigen::VectorXd lattice_axis_eigenvector(std::span<const Index> dims, std::size_t axis);
double lattice_axis_eigenvalue(std::span<const Index> dims, std::size_t axis);

VectorField lattice_axis_field(std::shared_ptr<const Graph> lattice, std::span<const Index> dims, std::size_t axis,
                               GridFieldSource source);

/// Stencil as an n x n matrix on the lattice; offsets leaving the grid are dropped.
SparseRealMatrix stencil_matrix(std::span<const Index> dims, const GridStencil& stencil);

/// Nodes whose every coordinate c satisfies margin <= c < N - margin.
std::vector<Index> lattice_interior(std::span<const Index> dims, int margin);

/// Realize `stencil` from directional aggregators. Radius 1 solves a 2x2 system
/// per axis at every interior node; radius R >= 2 adds walk products on top of
/// the radius-1 part and needs arccos_linear fields.
GridKernelRealization realize_grid_kernel(std::span<const Index> dims, const GridStencil& stencil,
                                          const GridKernelOptions& options = {});

/// Uniform(-1, 1) weights on every offset with ||o||_1 <= radius.
GridStencil random_stencil(std::size_t dimensions, int radius, std::uint64_t seed);

}  // namespace dgn
