#include "dgn/serialize.hpp"

#include "dgn/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace dgn {

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  const auto dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  std::filesystem::create_directories(dir);
  const auto tmp = dir / ("." + path.filename().string() + ".tmp" + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::filesystem::remove(tmp);
      throw ValidationError("write to " + tmp.string() + " failed");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw ValidationError("cannot move output into place at " + path.string() + ": " + ec.message());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path.string() + ": malformed JSON: " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
  write_file_atomic(path, j.dump(2) + "\n");
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

void require_schema(const nlohmann::json& j, const char* what) {
  if (!j.is_object()) throw ValidationError(std::string(what) + ": expected a JSON object");
  if (j.contains("schema_version") && j.at("schema_version").get<int>() != kSchemaVersion) {
    throw ValidationError(std::string(what) + ": unsupported schema_version " + j.at("schema_version").dump());
  }
}

template <typename Fn>
auto guarded(const char* what, Fn&& fn) {
  try {
    return fn();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string(what) + ": " + e.what());
  }
}

double finite_number(const nlohmann::json& v) {
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ValidationError("non-finite number in input");
  return d;
}

}  // namespace

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  auto rows = nlohmann::json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  return guarded("matrix", [&] {
    if (!j.is_array()) throw ValidationError("matrix: expected an array of rows");
    const Index rows = static_cast<Index>(j.size());
    const Index cols = rows == 0 ? 0 : static_cast<Index>(j.at(0).size());
    Eigen::MatrixXd m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
      if (static_cast<Index>(j.at(i).size()) != cols) throw ValidationError("matrix: ragged rows");
      for (Index c = 0; c < cols; ++c) m(i, c) = finite_number(j.at(i).at(c));
    }
    return m;
  });
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  auto a = nlohmann::json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  return guarded("vector", [&] {
    if (!j.is_array()) throw ValidationError("vector: expected an array");
    Eigen::VectorXd v(static_cast<Index>(j.size()));
    for (Index i = 0; i < v.size(); ++i) v[i] = finite_number(j.at(i));
    return v;
  });
}

nlohmann::json eigen_basis_to_json(const EigenBasis& b, const std::string& graph_hash) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["graph_hash"] = graph_hash;
  j["laplacian"] = std::string(to_string(b.kind));
  j["eigenvalues"] = vector_to_json(b.eigenvalues);
  auto vecs = nlohmann::json::array();
  for (Index c = 0; c < b.eigenvectors.cols(); ++c) vecs.push_back(vector_to_json(b.eigenvectors.col(c)));
  j["eigenvectors"] = std::move(vecs);
  j["component_of"] = b.component_of;
  j["multiplicity_groups"] = b.groups;
  return j;
}

EigenBasis eigen_basis_from_json(const nlohmann::json& j) {
  return guarded("eigen basis", [&] {
    require_schema(j, "eigen basis");
    EigenBasis b;
    b.kind = parse_laplacian_kind(j.at("laplacian").get<std::string>());
    b.eigenvalues = vector_from_json(j.at("eigenvalues"));
    const auto& vecs = j.at("eigenvectors");
    if (static_cast<Index>(vecs.size()) != b.eigenvalues.size()) throw ValidationError("eigen basis: count mismatch");
    const Index n = vecs.empty() ? 0 : static_cast<Index>(vecs.at(0).size());
    b.eigenvectors.resize(n, b.eigenvalues.size());
    for (Index c = 0; c < b.eigenvalues.size(); ++c) {
      const Eigen::VectorXd v = vector_from_json(vecs.at(c));
      if (v.size() != n) throw ValidationError("eigen basis: ragged eigenvectors");
      b.eigenvectors.col(c) = v;
    }
    b.component_of = j.at("component_of").get<std::vector<Index>>();
    b.groups = j.at("multiplicity_groups").get<std::vector<std::vector<Index>>>();
    return b;
  });
}

nlohmann::json field_to_json(const VectorField& f) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["graph_hash"] = graph_hash(f.graph());
  j["field_hash"] = field_hash(f);
  j["n"] = f.graph().node_count();
  auto edges = nlohmann::json::array();
  for (const auto& e : f.graph().edges()) edges.push_back({e.u, e.v, f(e.u, e.v)});
  j["edges"] = std::move(edges);
  return j;
}

VectorField field_from_json(const nlohmann::json& j, std::shared_ptr<const Graph> graph) {
  return guarded("field", [&] {
    require_schema(j, "field");
    if (j.contains("graph_hash") && j.at("graph_hash").get<std::string>() != graph_hash(*graph)) {
      throw ValidationError("field: graph hash does not match the supplied graph");
    }
    std::map<std::pair<Index, Index>, double> values;
    for (const auto& row : j.at("edges")) {
      Index u = row.at(0).get<Index>(), v = row.at(1).get<Index>();
      double val = finite_number(row.at(2));
      if (u > v) {
        std::swap(u, v);
        val = -val;
      }
      if (!graph->has_edge(u, v)) {
        throw ValidationError("field: (" + std::to_string(u) + "," + std::to_string(v) + ") is not an edge");
      }
      values[{u, v}] = val;
    }
    return VectorField::from_edges(graph, [&](Index u, Index v) {
      const auto it = values.find({u, v});
      return it == values.end() ? 0.0 : it->second;
    });
  });
}

std::string field_to_csv(const VectorField& f) {
  std::string out = "i,j,value\n";
  for (const auto& e : f.graph().edges()) {
    out += std::to_string(e.u) + "," + std::to_string(e.v) + "," + format_double(f(e.u, e.v)) + "\n";
  }
  return out;
}

VectorField field_from_csv(std::string_view text, std::shared_ptr<const Graph> graph) {
  std::map<std::pair<Index, Index>, double> values;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#' || line.rfind("i,j", 0) == 0) continue;
    std::istringstream ls(line);
    std::string a, b, c;
    if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',') || !std::getline(ls, c)) {
      throw ValidationError("field csv line " + std::to_string(lineno) + ": expected i,j,value");
    }
    try {
      Index u = std::stoll(a), v = std::stoll(b);
      double val = std::stod(c);
      if (u > v) {
        std::swap(u, v);
        val = -val;
      }
      if (!graph->has_edge(u, v)) throw ValidationError("field csv line " + std::to_string(lineno) + ": not an edge");
      values[{u, v}] = val;
    } catch (const std::logic_error& e) {
      if (dynamic_cast<const ValidationError*>(&e)) throw;
      throw ValidationError("field csv line " + std::to_string(lineno) + ": bad number");
    }
  }
  return VectorField::from_edges(graph, [&](Index u, Index v) {
    const auto it = values.find({u, v});
    return it == values.end() ? 0.0 : it->second;
  });
}

std::string aggregator_to_csv(const AggregationMatrix& b) {
  std::string out = "# kind=" + std::string(to_string(b.kind)) + " epsilon=" + format_double(b.epsilon) +
                    " source=" + (b.source_field.empty() ? "-" : b.source_field) + "\nrow,col,value\n";
  for (Index i = 0; i < b.matrix.outerSize(); ++i) {
    for (SparseRealMatrix::InnerIterator it(b.matrix, i); it; ++it) {
      out += std::to_string(it.row()) + "," + std::to_string(it.col()) + "," + format_double(it.value()) + "\n";
    }
  }
  return out;
}

nlohmann::json aggregator_to_json(const AggregationMatrix& b) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = std::string(to_string(b.kind));
  j["epsilon"] = b.epsilon;
  j["source_field"] = b.source_field;
  j["n"] = b.matrix.rows();
  auto entries = nlohmann::json::array();
  for (Index i = 0; i < b.matrix.outerSize(); ++i) {
    for (SparseRealMatrix::InnerIterator it(b.matrix, i); it; ++it) entries.push_back({it.row(), it.col(), it.value()});
  }
  j["entries"] = std::move(entries);
  return j;
}

AggregationMatrix aggregator_from_json(const nlohmann::json& j) {
  return guarded("aggregator", [&] {
    require_schema(j, "aggregator");
    AggregationMatrix b;
    b.kind = parse_aggregator_kind(j.at("kind").get<std::string>());
    b.epsilon = j.at("epsilon").get<double>();
    b.source_field = j.value("source_field", "");
    const Index n = j.at("n").get<Index>();
    std::vector<Eigen::Triplet<double>> t;
    for (const auto& e : j.at("entries")) {
      const Index r = e.at(0).get<Index>(), c = e.at(1).get<Index>();
      if (r < 0 || c < 0 || r >= n || c >= n) throw ValidationError("aggregator: entry out of range");
      t.emplace_back(r, c, finite_number(e.at(2)));
    }
    b.matrix.resize(n, n);
    b.matrix.setFromTriplets(t.begin(), t.end());
    return b;
  });
}

namespace {

nlohmann::json mlp_to_json(const Mlp& m) {
  auto layers = nlohmann::json::array();
  for (const auto& l : m.layers) {
    layers.push_back({{"weight", matrix_to_json(l.weight)},
                      {"bias", vector_to_json(l.bias)},
                      {"activation", std::string(to_string(l.activation))}});
  }
  return layers;
}

Mlp mlp_from_json(const nlohmann::json& j) {
  if (j.is_object()) {
    // {"seeded": {"widths": [...], "hidden": "tanh", "last": "identity", "seed": 0}}
    const auto& s = j.at("seeded");
    return Mlp::seeded(s.at("widths").get<std::vector<Index>>(), parse_activation(s.value("hidden", "tanh")),
                       parse_activation(s.value("last", "identity")), s.value("seed", std::uint64_t{0}));
  }
  Mlp m;
  for (const auto& l : j) {
    DenseLayer layer;
    layer.weight = matrix_from_json(l.at("weight"));
    if (l.contains("bias")) layer.bias = vector_from_json(l.at("bias"));
    layer.activation = parse_activation(l.value("activation", "identity"));
    if (layer.bias.size() != 0 && layer.bias.size() != layer.weight.cols()) {
      throw ValidationError("layer spec: bias length does not match weight columns");
    }
    if (!m.layers.empty() && m.layers.back().weight.cols() != layer.weight.rows()) {
      throw ValidationError("layer spec: consecutive MLP layers have inconsistent widths");
    }
    m.layers.push_back(std::move(layer));
  }
  return m;
}

}  // namespace

nlohmann::json layer_spec_to_json(const LayerSpec& s) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["architecture"] = std::string(to_string(s.architecture));
  auto aggs = nlohmann::json::array();
  for (const auto& a : s.aggregators) aggs.push_back(a.name());
  j["aggregators"] = std::move(aggs);
  j["scalers"] = s.scalers;
  j["delta"] = s.delta;
  j["abs_dx"] = s.abs_dx;
  j["epsilon"] = s.epsilon;
  if (s.architecture != Architecture::simple) {
    j["message"] = {{"weight", matrix_to_json(s.message_weight)}, {"bias", vector_to_json(s.message_bias)}};
  }
  j["update"] = mlp_to_json(s.update);
  return j;
}

LayerSpec layer_spec_from_json(const nlohmann::json& j) {
  return guarded("layer spec", [&] {
    require_schema(j, "layer spec");
    LayerSpec s;
    s.architecture = parse_architecture(j.value("architecture", "simple"));
    for (const auto& a : j.at("aggregators")) s.aggregators.push_back(parse_aggregator_spec(a.get<std::string>()));
    if (j.contains("scalers")) s.scalers = j.at("scalers").get<std::vector<double>>();
    s.delta = j.value("delta", 1.0);
    if (!(s.delta > 0)) throw ValidationError("layer spec: delta must be positive");
    s.abs_dx = j.value("abs_dx", true);
    s.epsilon = j.value("epsilon", 1e-8);
    if (j.contains("message")) {
      s.message_weight = matrix_from_json(j.at("message").at("weight"));
      if (j.at("message").contains("bias")) s.message_bias = vector_from_json(j.at("message").at("bias"));
    }
    if (j.contains("update")) s.update = mlp_from_json(j.at("update"));
    return s;
  });
}

nlohmann::json separation_report_to_json(const SeparationReport& r) {
  return {{"wl_result", r.wl_distinguishable ? "distinguishable" : "indistinguishable"},
          {"gap", r.gap},
          {"verdict", r.verdict},
          {"separated", r.separated},
          {"lambda1", {r.lambda1_a, r.lambda1_b}},
          {"readout", {vector_to_json(r.readout_a), vector_to_json(r.readout_b)}}};
}

nlohmann::json gradient_step_report_to_json(const GradientStepReport& r) {
  nlohmann::json j;
  j["graph"] = r.graph_name;
  j["n"] = r.node_count;
  j["eligible"] = r.eligible;
  if (!r.eligible) j["skip_reason"] = r.skip_reason;
  j["pairs_checked"] = r.pairs_checked;
  j["pairs_skipped"] = r.pairs_skipped;
  j["failures"] = r.failures;
  j["max_distance_disagreement"] = r.max_distance_disagreement;
  auto pairs = nlohmann::json::array();
  for (const auto& p : r.pairs) {
    auto samples = nlohmann::json::array();
    for (const auto& s : p.samples) {
      samples.push_back({{"t", s.t}, {"d_xy", s.d_xy}, {"d_xpy", s.d_xpy}, {"reduced", s.reduced}});
    }
    nlohmann::json pj = {{"x", p.x}, {"y", p.y}, {"x_prime", p.x_prime}, {"passed", p.passed}, {"samples", samples}};
    pj["C"] = std::isfinite(p.c) ? nlohmann::json(p.c) : nlohmann::json("-inf");
    pairs.push_back(std::move(pj));
  }
  j["pairs"] = std::move(pairs);
  return j;
}

nlohmann::json augmentation_record_to_json(const AugmentationRecord& r) {
  nlohmann::json j = {{"op", r.op}, {"seed", r.seed}, {"generator", r.generator}, {"inputs", r.inputs},
                      {"outputs", r.outputs}};
  j[r.op == "distort" ? "scale" : "theta"] = r.parameter;
  return j;
}

}  // namespace dgn
