#pragma once

#include "dgn/augment.hpp"
#include "dgn/netcheck.hpp"
#include "dgn/spectral.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

namespace dgn {

enum class FieldSource { eigen_gradient, eigen_arcsine_gradient, user_supplied };

std::string_view to_string(FieldSource s);
FieldSource parse_field_source(std::string_view name);

struct AugmentationConfig {
  std::string op;            // reflect | rotate | distort
  std::vector<Index> fields; // 0-based; rotate takes two
  double theta = 0.0;
  double scale = 0.0;
};

struct ForwardConfig {
  LayerSpec layer;
  bool use_node_features = false;  // otherwise a column of ones
};

struct PipelineConfig {
  LaplacianKind laplacian = LaplacianKind::combinatorial;
  /// Number of nontrivial eigenvectors phi_1..phi_k per component.
  Index k = 1;
  FieldSource field_source = FieldSource::eigen_gradient;
  std::vector<AggregatorSpec> aggregators;
  std::vector<AugmentationConfig> augmentations;
  double eps = 1e-8;
  double tol = 0.0;
  double multiplicity_tol = 1e-6;
  std::uint64_t seed = 0;
  /// Replace repeated-eigenvalue blocks by a seeded random basis of the eigenspace.
  bool sample_eigenspaces = false;
  bool record_timings = false;
  std::optional<ForwardConfig> forward;
  /// Fields for field_source = user_supplied; filled from "user_fields" paths on load.
  std::vector<VectorField> user_fields;
  std::vector<std::string> user_field_paths;
};

/// Parse a config; relative user field paths resolve against `base_dir`.
PipelineConfig config_from_json(const nlohmann::json& j, const std::shared_ptr<const Graph>& graph,
                                const std::filesystem::path& base_dir = {});
nlohmann::json config_to_json(const PipelineConfig& c);
std::string config_hash(const PipelineConfig& c);

struct RunManifest {
  std::string config_hash;
  std::string graph_hash;
  Index component_count = 0;
  std::vector<Index> component_sizes;
  std::vector<std::string> multiplicity_warnings;
  std::map<std::string, std::uint64_t> sub_seeds;
  std::vector<std::string> stages;
  std::map<std::string, double> timings_ms;
  std::map<std::string, std::string> artifacts;  // relative path -> sha256
};

nlohmann::json manifest_to_json(const RunManifest& m, bool with_timings);

struct PipelineResult {
  std::shared_ptr<const Graph> graph;
  std::vector<EigenBasis> component_bases;
  std::vector<VectorField> fields;
  std::vector<AggregationMatrix> aggregators;
  std::vector<std::string> aggregator_names;
  std::vector<std::pair<std::string, SparseRealMatrix>> augmented;
  std::vector<AugmentationRecord> augmentation_records;
  std::optional<Eigen::MatrixXd> forward_output;
  RunManifest manifest;
};

/// Eigenbases keyed by (graph hash, kind, k, tol). Concurrent readers, exclusive
/// writers. With a directory set, entries are also persisted as JSON files.
class EigenCache {
 public:
  explicit EigenCache(std::optional<std::filesystem::path> dir = std::nullopt) : dir_(std::move(dir)) {}

  /// Cache rooted at $DGN_CACHE_DIR when set.
  static EigenCache& global();

  std::vector<EigenBasis> get_or_compute(const Graph& g, const EigenOptions& opt);
  std::size_t size() const;
  std::size_t hits() const;

 private:
  std::optional<std::filesystem::path> dir_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, std::vector<EigenBasis>> entries_;
  std::size_t hits_ = 0;
};

/// eigen -> fields -> aggregators -> augmentations -> forward. Errors carry the stage name.
PipelineResult run(std::shared_ptr<const Graph> graph, const PipelineConfig& config, EigenCache* cache = nullptr);

/// Write every artifact under `dir` and manifest.json at its root.
void export_run(PipelineResult& result, const PipelineConfig& config, const std::filesystem::path& dir);

}  // namespace dgn
