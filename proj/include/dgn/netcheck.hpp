#pragma once

#include "dgn/aggregate.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dgn {

// ---------------------------------------------------------------------------
// Degree scalers

struct DegreeDelta {
  double delta = 0.0;
  bool degenerate = false;  // delta == 0, scalers are undefined downstream
};

/// Mean of log(d + 1) over the training degrees.
DegreeDelta delta_from_degrees(std::span<const double> degrees);

/// (log(d + 1) / delta)^alpha; exactly 1 for alpha == 0.
double scaler(double degree, double alpha, double delta);

// ---------------------------------------------------------------------------
// Layers

enum class Activation { identity, tanh, relu };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view name);

/// Y = act(X W + b), features in rows.
struct DenseLayer {
  Eigen::MatrixXd weight;  // in x out
  Eigen::VectorXd bias;    // out, may be empty
  Activation activation = Activation::identity;
};

struct Mlp {
  std::vector<DenseLayer> layers;

  Index input_dim() const;
  Index output_dim() const;
  Eigen::MatrixXd operator()(const Eigen::MatrixXd& x) const;

  static Mlp seeded(std::span<const Index> widths, Activation hidden, Activation last, std::uint64_t seed);
};

enum class BaselineAggregator { mean, sum, max, min };

/// Either a neighborhood baseline or a directional matrix over field `field`.
struct AggregatorSpec {
  bool directional = false;
  BaselineAggregator baseline = BaselineAggregator::mean;
  AggregatorKind kind = AggregatorKind::av;
  Index field = 0;
  FieldTransform transform;

  static AggregatorSpec base(BaselineAggregator b);
  static AggregatorSpec dir(AggregatorKind kind, Index field);
  std::string name() const;
};

AggregatorSpec parse_aggregator_spec(std::string_view text);  // "mean", "dx1", "av_center2", ...

enum class Architecture { simple, complex, complex_with_edges };

std::string_view to_string(Architecture a);
Architecture parse_architecture(std::string_view name);

struct LayerSpec {
  Architecture architecture = Architecture::simple;
  std::vector<AggregatorSpec> aggregators;
  /// Exponents alpha; every aggregator output is repeated once per entry,
  /// scaled by S(d, alpha). Empty means a single unscaled copy.
  std::vector<double> scalers;
  double delta = 1.0;
  bool abs_dx = true;
  double epsilon = 1e-8;
  /// Linear message M(X_i, X_j, e_ji) = [X_i, X_j, e_ji] W + b (complex architectures).
  Eigen::MatrixXd message_weight;
  Eigen::VectorXd message_bias;
  Mlp update;

  Index scaler_copies() const { return scalers.empty() ? 1 : static_cast<Index>(scalers.size()); }
};

struct LayerOutput {
  Eigen::MatrixXd pre_update;  // concatenated input of U
  Eigen::MatrixXd output;
};

/// X_i <- U(concat over aggregators and scalers of the neighborhood aggregation).
/// X_i itself is not an input of U here.
LayerOutput forward_simple(const Graph& g, const Eigen::MatrixXd& x, const LayerSpec& spec,
                           std::span<const VectorField> fields = {});

/// X_i <- U([X_i, concat of aggregated messages M(X_i, X_j, e_ji)]). Directional
/// aggregators weight message j by B_ij and use M(X_i, X_i, 0) for the diagonal.
/// Edge features come from the graph when the architecture asks for them.
LayerOutput forward_complex(const Graph& g, const Eigen::MatrixXd& x, const LayerSpec& spec,
                            std::span<const VectorField> fields = {});

// ---------------------------------------------------------------------------
// 1-WL

struct WLColoring {
  std::vector<Index> colors;
  int rounds = 0;
  bool stable = false;
};

/// Color refinement from `initial` (all zero when empty) until the partition stops changing.
WLColoring wl1_refine(const Graph& g, std::span<const Index> initial = {});

/// Joint refinement of the disjoint union; true iff the stable color histograms differ.
bool wl1_distinguishable(const Graph& a, const Graph& b);

struct SeparationReport {
  bool wl_distinguishable = false;
  double gap = 0.0;
  bool separated = false;
  std::string verdict;
  Eigen::VectorXd readout_a;
  Eigen::VectorXd readout_b;
  double lambda1_a = 0.0;
  double lambda1_b = 0.0;
};

/// Two tanh layers with {mean, dx1, av1} and scalers alpha in {-1, 0, 1} on
/// constant input features, fields from each graph's own phi_1, sum-pooled.
SeparationReport dgn_separation_check(const Graph& a, const Graph& b, std::uint64_t seed);

/// Two fused 6-rings sharing edge (4, 9).
Graph decalin_graph();
/// Two 5-rings joined by the bridge (0, 5).
Graph bicyclopentyl_graph();

}  // namespace dgn
