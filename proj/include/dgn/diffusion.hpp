#pragma once

#include "dgn/graph.hpp"

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace dgn {

struct HeatKernel {
  Eigen::MatrixXd matrix;
  bool discrete = false;
  Index steps = 0;   // discrete
  double time = 0.0; // continuous
};

/// (D^-1 A)^k. Throws on isolated nodes.
HeatKernel discrete_heat_kernel(const Graph& g, Index k);

enum class HeatMethod { series, eigen };

/// exp(-t L_norm), either as the Poisson-weighted series of random-walk powers
/// or through the L_sym eigendecomposition.
HeatKernel continuous_heat_kernel(const Graph& g, double t, HeatMethod method = HeatMethod::eigen);

struct DiffusionDistance {
  /// Row-difference form, each column z weighted by mean_degree / d_z.
  double value = 0.0;
  /// sum_i exp(-2 t lambda_i) (psi_i(x) - psi_i(y))^2, square-rooted.
  double spectral = 0.0;
  /// Unweighted row difference; equals `value` on regular graphs.
  double unweighted = 0.0;
  bool cross_component = false;
};

/// Spectral data of L_norm shared by every diffusion query on one graph.
///
/// psi_i = sqrt(mean degree) D^-1/2 u_i with u_i the unit eigenvectors of
/// L_sym. These are L_norm eigenvectors scaled so that the spectral sum equals
/// the degree-weighted row distance exactly.
class DiffusionModel {
 public:
  explicit DiffusionModel(const Graph& g);

  const Graph& graph() const noexcept { return graph_; }
  const Eigen::VectorXd& eigenvalues() const noexcept { return lambda_; }
  const Eigen::MatrixXd& psi() const noexcept { return psi_; }
  double mean_degree() const noexcept { return mean_degree_; }
  bool connected() const noexcept { return components_ == 1; }

  Eigen::MatrixXd kernel(double t) const;
  DiffusionDistance distance(double t, Index x, Index y) const;
  /// Squared spectral distance times exp(2 t lambda_1), omitting the constant
  /// i = 0 term. Comparisons at large t stay well conditioned this way.
  double scaled_squared_distance(double t, Index x, Index y) const;

 private:
  Graph graph_;
  Eigen::VectorXd degrees_;
  double mean_degree_ = 0.0;
  Index components_ = 0;
  std::vector<Index> labels_;
  Eigen::VectorXd lambda_;
  Eigen::MatrixXd u_;
  Eigen::MatrixXd psi_;
};

DiffusionDistance diffusion_distance(const Graph& g, double t, Index x, Index y);

/// Neighbor z of x maximizing phi(z) - phi(x); ties go to the lowest id.
Index gradient_step(const Graph& g, const Eigen::VectorXd& phi, Index x);

struct ReductionConstant {
  bool hypothesis_holds = false;
  std::string reason;
  /// -inf when the higher-mode sum vanishes (the inequality holds for every t).
  double value = std::numeric_limits<double>::quiet_NaN();
  double numerator = 0.0;
  double higher_mode_sum = 0.0;
};

/// Constant C above which d_t(x', y) < d_t(x, y), from phi_1 = psi_1.
ReductionConstant reduction_constant(const DiffusionModel& model, Index x, Index x_prime, Index y);

struct DiffusionSample {
  double t = 0.0;
  double d_xy = 0.0;
  double d_xpy = 0.0;
  double row_spectral_gap = 0.0;
  bool reduced = false;
};

struct PairReport {
  Index x = 0, y = 0, x_prime = 0;
  double c = 0.0;
  std::vector<DiffusionSample> samples;
  bool passed = true;
};

struct GradientStepReport {
  std::string graph_name;
  Index node_count = 0;
  bool eligible = true;   // connected with simple lambda_1
  std::string skip_reason;
  Index pairs_checked = 0;
  Index pairs_skipped = 0;  // phi_1(x) < phi_1(y) but the numerator is not positive
  Index failures = 0;
  double max_distance_disagreement = 0.0;
  std::vector<PairReport> pairs;
};

struct GradientStepOptions {
  int t_points = 8;
  double t_offset = 1e-6;
  double numerator_floor = 1e-12;
  double agreement_tol = 1e-8;
  bool keep_pairs = false;
};

/// Check every pair with phi_1(x) < phi_1(y) on a t grid of `t_points` values
/// from max(C, 0) + offset to 4 max(C, 1).
GradientStepReport certify_gradient_steps(const Graph& g, const GradientStepOptions& options = {}, std::string name = {});

}  // namespace dgn
