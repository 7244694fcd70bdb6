#pragma once

#include "dgn/graph.hpp"

#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include <json.hpp>

namespace dgn {

/// A parsed graph plus the original id of every dense node id.
struct IngestResult {
  Graph graph;
  std::vector<std::string> original_ids;
  bool remapped = false;
};

/// Edge-list text: one `i<TAB>j` pair per line, `#` comments, optional `nodes=N`
/// header. With the header, ids must be integers in [0, N). Without it, ids are
/// remapped densely: numerically when every id is a non-negative integer,
/// otherwise in order of first appearance.
IngestResult read_edge_list(std::istream& in);
std::string write_edge_list(const Graph& g);

nlohmann::json graph_to_json(const Graph& g);
Graph graph_from_json(const nlohmann::json& j);

/// Chooses the format from the extension: `.json` is JSON, anything else is an edge list.
IngestResult load_graph(const std::filesystem::path& path);
void save_graph(const std::filesystem::path& path, const Graph& g);

}  // namespace dgn
