#include "dgn/graph_io.hpp"

#include "dgn/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace dgn {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

bool parse_int(std::string_view s, long long& out) {
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

IngestResult read_edge_list(std::istream& in) {
  std::optional<long long> declared;
  std::vector<std::pair<std::string, std::string>> raw;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    if (view.starts_with("nodes=")) {
      long long n = 0;
      if (declared || !raw.empty() || !parse_int(trim(view.substr(6)), n) || n < 0) {
        throw ValidationError("line " + std::to_string(line_no) + ": malformed or misplaced nodes= header");
      }
      declared = n;
      continue;
    }
    std::istringstream fields{std::string(view)};
    std::string a;
    std::string b;
    std::string extra;
    if (!(fields >> a >> b) || (fields >> extra)) {
      throw ValidationError("line " + std::to_string(line_no) + ": expected two node ids");
    }
    raw.emplace_back(std::move(a), std::move(b));
  }

  IngestResult result;
  std::vector<std::pair<Index, Index>> edges;
  if (declared) {
    for (const auto& [a, b] : raw) {
      long long ia = 0;
      long long ib = 0;
      if (!parse_int(a, ia) || !parse_int(b, ib)) {
        throw ValidationError("non-integer node id with a nodes= header: " + a + " " + b);
      }
      edges.emplace_back(ia, ib);
    }
    result.graph = build_graph(*declared, edges);
    for (long long i = 0; i < *declared; ++i) result.original_ids.push_back(std::to_string(i));
    return result;
  }

  std::vector<std::string> order;
  std::map<std::string, Index> seen;
  bool all_int = true;
  for (const auto& [a, b] : raw) {
    for (const auto* tok : {&a, &b}) {
      long long v = 0;
      if (!parse_int(*tok, v) || v < 0) all_int = false;
      if (seen.emplace(*tok, 0).second) order.push_back(*tok);
    }
  }
  if (all_int) {
    std::sort(order.begin(), order.end(), [](const std::string& x, const std::string& y) {
      long long a = 0;
      long long b = 0;
      parse_int(x, a);
      parse_int(y, b);
      return a < b || (a == b && x < y);
    });
  }
  for (Index i = 0; i < static_cast<Index>(order.size()); ++i) seen[order[i]] = i;
  for (const auto& [a, b] : raw) edges.emplace_back(seen[a], seen[b]);
  result.graph = build_graph(static_cast<Index>(order.size()), edges);
  result.original_ids = order;
  for (Index i = 0; i < static_cast<Index>(order.size()); ++i) {
    if (order[i] != std::to_string(i)) result.remapped = true;
  }
  return result;
}

std::string write_edge_list(const Graph& g) {
  std::ostringstream out;
  out << "nodes=" << g.node_count() << '\n';
  for (const auto& e : g.edges()) out << e.u << '\t' << e.v << '\n';
  return out.str();
}

nlohmann::json graph_to_json(const Graph& g) {
  nlohmann::json j;
  j["n"] = g.node_count();
  auto edges = nlohmann::json::array();
  for (const auto& e : g.edges()) edges.push_back({e.u, e.v});
  j["edges"] = std::move(edges);
  if (const auto& nf = g.node_features()) {
    auto rows = nlohmann::json::array();
    for (Index i = 0; i < nf->rows(); ++i) {
      auto row = nlohmann::json::array();
      for (Index c = 0; c < nf->cols(); ++c) row.push_back((*nf)(i, c));
      rows.push_back(std::move(row));
    }
    j["node_features"] = std::move(rows);
  }
  if (!g.edge_features().empty()) {
    auto ef = nlohmann::json::object();
    for (const auto& [key, value] : g.edge_features()) {
      ef[std::to_string(key.first) + "," + std::to_string(key.second)] = std::vector<double>(value.begin(), value.end());
    }
    j["edge_features"] = std::move(ef);
  }
  return j;
}

Graph graph_from_json(const nlohmann::json& j) {
  try {
    const Index n = j.at("n").get<Index>();
    std::vector<std::pair<Index, Index>> edges;
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2) throw ValidationError("graph JSON: each edge must be a pair");
      edges.emplace_back(e[0].get<Index>(), e[1].get<Index>());
    }
    Graph g = build_graph(n, edges);
    if (j.contains("node_features")) {
      const auto& rows = j.at("node_features");
      if (static_cast<Index>(rows.size()) != n) throw ValidationError("graph JSON: node_features row count != n");
      const Index cols = n == 0 ? 0 : static_cast<Index>(rows[0].size());
      Eigen::MatrixXd f(n, cols);
      for (Index i = 0; i < n; ++i) {
        if (static_cast<Index>(rows[i].size()) != cols) throw ValidationError("graph JSON: ragged node_features");
        for (Index c = 0; c < cols; ++c) f(i, c) = rows[i][c].get<double>();
      }
      g = g.with_node_features(std::move(f));
    }
    if (j.contains("edge_features")) {
      EdgeFeatureMap ef;
      for (const auto& [key, value] : j.at("edge_features").items()) {
        const auto comma = key.find(',');
        long long a = 0;
        long long b = 0;
        if (comma == std::string::npos || !parse_int(trim(std::string_view(key).substr(0, comma)), a) ||
            !parse_int(trim(std::string_view(key).substr(comma + 1)), b)) {
          throw ValidationError("graph JSON: bad edge feature key '" + key + "'");
        }
        const auto vec = value.get<std::vector<double>>();
        ef.emplace(std::make_pair(static_cast<Index>(a), static_cast<Index>(b)),
                   Eigen::Map<const Eigen::VectorXd>(vec.data(), static_cast<Index>(vec.size())));
      }
      g = g.with_edge_features(std::move(ef));
    }
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("graph JSON: ") + e.what());
  }
}

IngestResult load_graph(const std::filesystem::path& path) {
  if (path.extension() == ".json") {
    IngestResult r;
    r.graph = graph_from_json(read_json_file(path));
    for (Index i = 0; i < r.graph.node_count(); ++i) r.original_ids.push_back(std::to_string(i));
    return r;
  }
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open graph file " + path.string());
  return read_edge_list(in);
}

void save_graph(const std::filesystem::path& path, const Graph& g) {
  if (path.extension() == ".json") {
    write_json_file(path, graph_to_json(g));
  } else {
    write_file_atomic(path, write_edge_list(g));
  }
}

}  // namespace dgn
