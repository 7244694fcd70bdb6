#pragma once

#include "dgn/aggregate.hpp"
#include "dgn/augment.hpp"
#include "dgn/diffusion.hpp"
#include "dgn/netcheck.hpp"
#include "dgn/spectral.hpp"

#include <string>

#include <json.hpp>

namespace dgn {

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);  // array of rows
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j);
nlohmann::json vector_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const nlohmann::json& j);

nlohmann::json eigen_basis_to_json(const EigenBasis& b, const std::string& graph_hash);
EigenBasis eigen_basis_from_json(const nlohmann::json& j);

/// {"schema_version", "graph_hash", "field_hash", "n", "edges": [[i, j, F_ij], ...]} with i < j.
nlohmann::json field_to_json(const VectorField& f);
VectorField field_from_json(const nlohmann::json& j, std::shared_ptr<const Graph> graph);

/// `i,j,value` rows for i < j; the mirrored entries are implied.
std::string field_to_csv(const VectorField& f);
VectorField field_from_csv(std::string_view text, std::shared_ptr<const Graph> graph);

/// Header comment line with kind, epsilon and source field hash, then `row,col,value`.
std::string aggregator_to_csv(const AggregationMatrix& b);
nlohmann::json aggregator_to_json(const AggregationMatrix& b);
AggregationMatrix aggregator_from_json(const nlohmann::json& j);

nlohmann::json layer_spec_to_json(const LayerSpec& s);
LayerSpec layer_spec_from_json(const nlohmann::json& j);

nlohmann::json separation_report_to_json(const SeparationReport& r);
nlohmann::json gradient_step_report_to_json(const GradientStepReport& r);
nlohmann::json augmentation_record_to_json(const AugmentationRecord& r);

}  // namespace dgn
