#pragma once

#include "dgn/graph.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace dgn {

struct SuiteOptions {
  /// Directory of graph files for the gradient-step (theorem3) sweep; the built-in corpus when empty.
  std::optional<std::filesystem::path> graphs;
  std::vector<Index> dims{9, 5};
  int radius = 2;
  unsigned jobs = 1;
  std::uint64_t seed = 0;
};

struct SuiteResult {
  std::string name;
  bool passed = false;
  double seconds = 0.0;
  nlohmann::json report;
};

const std::vector<std::string>& suite_names();

/// Runs one suite, or every suite for "all". Throws ValidationError on an unknown name.
std::vector<SuiteResult> run_suite(const std::string& name, const SuiteOptions& options = {});

struct NamedGraph {
  std::string name;
  Graph graph;
};

/// Paths, lattices, random trees and two-community graphs, all connected, n <= 60.
std::vector<NamedGraph> diffusion_corpus();

/// Every `.json` or `.txt`/`.edges` graph in `dir`, sorted by file name.
std::vector<NamedGraph> load_corpus(const std::filesystem::path& dir);

/// Seeded connected-or-not random graph used by the aggregation suites.
Graph random_graph(Index max_nodes, std::uint64_t seed);

}  // namespace dgn
