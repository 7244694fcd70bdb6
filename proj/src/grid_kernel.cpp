#include "dgn/grid_kernel.hpp"

#include "dgn/random.hpp"

#include <cmath>
#include <numbers>

namespace dgn {

namespace {

void check_dims(std::span<const Index> dims) {
  if (dims.empty()) throw ValidationError("lattice needs at least one dimension");
  for (const Index d : dims) {
    if (d < 2) throw ValidationError("lattice side lengths must be >= 2 for axis fields");
  }
}

double stencil_weight(const GridStencil& s, const std::vector<int>& offset) {
  const auto it = s.weights.find(offset);
  return it == s.weights.end() ? 0.0 : it->second;
}

Index shifted(std::span<const Index> dims, std::vector<Index> coords, const std::vector<int>& offset) {
  for (std::size_t a = 0; a < dims.size(); ++a) {
    const Index c = coords[a] + offset[a];
    if (c < 0 || c >= dims[a]) return -1;
    coords[a] = c;
  }
  return lattice_index(dims, coords);
}

int l1(const std::vector<int>& v) {
  int s = 0;
  for (const int x : v) s += std::abs(x);
  return s;
}

}  // namespace

Eigen::VectorXd lattice_axis_eigenvector(std::span<const Index> dims, std::size_t axis) {
  check_dims(dims);
  if (axis >= dims.size()) throw ValidationError("axis out of range");
  Index n = 1;
  for (const Index d : dims) n *= d;
  Eigen::VectorXd phi(n);
  const double na = static_cast<double>(dims[axis]);
  for (Index node = 0; node < n; ++node) {
    const auto c = lattice_coordinates(dims, node);
    phi[node] = std::cos(std::numbers::pi * (static_cast<double>(c[axis]) + 0.5) / na);
  }
  return phi;
}

double lattice_axis_eigenvalue(std::span<const Index> dims, std::size_t axis) {
  check_dims(dims);
  return 2.0 - 2.0 * std::cos(std::numbers::pi / static_cast<double>(dims[axis]));
}

VectorField lattice_axis_field(std::shared_ptr<const Graph> lattice, std::span<const Index> dims, std::size_t axis,
                               GridFieldSource source) {
  const Eigen::VectorXd phi = lattice_axis_eigenvector(dims, axis);
  if (phi.size() != lattice->node_count()) throw ValidationError("lattice_axis_field: dims do not match the graph");
  if (source == GridFieldSource::eigen_gradient) return gradient(std::move(lattice), phi);
  const double scale = static_cast<double>(dims[axis]) / std::numbers::pi;
  const Eigen::VectorXd angle = phi.array().acos().matrix();
  return VectorField::from_edges(std::move(lattice),
                                 [&](Index i, Index j) { return scale * (angle[j] - angle[i]); });
}

SparseRealMatrix stencil_matrix(std::span<const Index> dims, const GridStencil& stencil) {
  check_dims(dims);
  Index n = 1;
  for (const Index d : dims) n *= d;
  std::vector<Eigen::Triplet<double>> t;
  for (Index node = 0; node < n; ++node) {
    const auto c = lattice_coordinates(dims, node);
    for (const auto& [offset, w] : stencil.weights) {
      if (offset.size() != dims.size()) throw ValidationError("stencil offset dimension mismatch");
      const Index j = shifted(dims, c, offset);
      if (j >= 0 && w != 0.0) t.emplace_back(node, j, w);
    }
  }
  SparseRealMatrix m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

std::vector<Index> lattice_interior(std::span<const Index> dims, int margin) {
  Index n = 1;
  for (const Index d : dims) n *= d;
  std::vector<Index> out;
  for (Index node = 0; node < n; ++node) {
    const auto c = lattice_coordinates(dims, node);
    bool inside = true;
    for (std::size_t a = 0; a < dims.size(); ++a) inside = inside && c[a] >= margin && c[a] < dims[a] - margin;
    if (inside) out.push_back(node);
  }
  return out;
}

GridKernelRealization realize_grid_kernel(std::span<const Index> dims, const GridStencil& stencil,
                                          const GridKernelOptions& options) {
  check_dims(dims);
  const int radius = stencil.radius;
  if (radius < 1) throw ValidationError("stencil radius must be >= 1");
  for (const auto& [offset, w] : stencil.weights) {
    if (offset.size() != dims.size()) throw ValidationError("stencil offset dimension mismatch");
    if (l1(offset) > radius) throw ValidationError("stencil offset outside the radius ball");
  }
  if (radius >= 2 && options.fields != GridFieldSource::arccos_linear) {
    throw ValidationError("radius >= 2 realization needs arccos_linear axis fields");
  }

  GridKernelRealization out;
  out.dims.assign(dims.begin(), dims.end());
  out.radius = radius;
  auto lattice = std::make_shared<const Graph>(gen_lattice(dims));
  const Index n = lattice->node_count();
  const std::size_t na = dims.size();
  std::vector<AggregationMatrix> av, dx;
  for (std::size_t a = 0; a < na; ++a) {
    out.axis_fields.push_back(lattice_axis_field(lattice, dims, a, options.fields));
    av.push_back(build_aggregator(out.axis_fields[a], AggregatorKind::av, options.epsilon));
    dx.push_back(build_aggregator(out.axis_fields[a], AggregatorKind::dx, options.epsilon));
  }

  std::vector<Eigen::Triplet<double>> t;
  const std::vector<int> zero(na, 0);
  for (const Index u : lattice_interior(dims, 1)) {
    const auto c = lattice_coordinates(dims, u);
    AxisCoefficients coef;
    coef.node = u;
    coef.identity = stencil_weight(stencil, zero);
    for (std::size_t a = 0; a < na; ++a) {
      std::vector<int> minus(na, 0), plus(na, 0);
      minus[a] = -1;
      plus[a] = 1;
      const Index jm = shifted(dims, c, minus), jp = shifted(dims, c, plus);
      const auto& pav = av[a].matrix;
      const auto& pdx = dx[a].matrix;
      const double p_m = pav.coeff(u, jm), p_p = pav.coeff(u, jp);
      const double d_m = pdx.coeff(u, jm), d_p = pdx.coeff(u, jp);
      const double k_m = stencil_weight(stencil, minus), k_p = stencil_weight(stencil, plus);
      const double det = p_m * d_p - p_p * d_m;
      if (!(std::abs(det) > 1e-14)) {
        throw NumericalError("grid kernel: singular 2x2 system at node " + std::to_string(u), {std::abs(det)});
      }
      const double a_coef = (k_m * d_p - k_p * d_m) / det;
      const double b_coef = (p_m * k_p - p_p * k_m) / det;
      coef.av.push_back(a_coef);
      coef.dx.push_back(b_coef);
      coef.identity -= b_coef * pdx.coeff(u, u);
      for (SparseRealMatrix::InnerIterator it(pav, u); it; ++it) t.emplace_back(u, it.col(), a_coef * it.value());
      for (SparseRealMatrix::InnerIterator it(pdx, u); it; ++it) t.emplace_back(u, it.col(), b_coef * it.value());
    }
    t.emplace_back(u, u, coef.identity);
    out.radius1.push_back(std::move(coef));
  }
  SparseRealMatrix assembled(n, n);
  assembled.setFromTriplets(t.begin(), t.end());

  if (radius >= 2) {
    out.interior_nodes = lattice_interior(dims, radius);
    if (out.interior_nodes.empty()) throw ValidationError("lattice too small for the stencil radius");
    const Index ref = out.interior_nodes.front();
    const auto ref_coords = lattice_coordinates(dims, ref);
    for (const auto& [offset, w] : stencil.weights) {
      if (l1(offset) < 2 || w == 0.0) continue;
      RadiusKernelSpec unit;
      unit.fields = out.axis_fields;
      unit.radius = radius;
      unit.mode = options.mode;
      unit.coefficients[offset] = 1.0;
      const SparseRealMatrix walk = radius_r_kernel(unit);
      const double reach = walk.coeff(ref, shifted(dims, ref_coords, offset));
      if (!(std::abs(reach) > 1e-300)) throw NumericalError("grid kernel: walk does not reach its target offset");
      const double a_v = w / reach;
      out.walk_coefficients[offset] = a_v;
      assembled += a_v * walk;
    }
  } else {
    out.interior_nodes = lattice_interior(dims, 1);
  }
  assembled.prune(0.0);
  out.matrix = std::move(assembled);

  const SparseRealMatrix diff = out.matrix - stencil_matrix(dims, stencil);
  double worst = 0.0;
  for (const Index u : out.interior_nodes) {
    for (SparseRealMatrix::InnerIterator it(diff, u); it; ++it) worst = std::max(worst, std::abs(it.value()));
  }
  out.max_interior_deviation = worst;
  return out;
}

GridStencil random_stencil(std::size_t dimensions, int radius, std::uint64_t seed) {
  SeededGenerator rng(seed);
  GridStencil s;
  s.radius = radius;
  for (const auto& v : enumerate_walk_vectors(static_cast<int>(dimensions), radius)) s.weights[v] = rng.uniform(-1.0, 1.0);
  return s;
}

}  // namespace dgn
