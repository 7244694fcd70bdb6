#include "dgn/pipeline.hpp"

#include "dgn/graph_io.hpp"
#include "dgn/hash.hpp"
#include "dgn/io.hpp"
#include "dgn/random.hpp"
#include "dgn/serialize.hpp"

#include <chrono>
#include <cstdlib>
#include <mutex>

namespace dgn {

std::string_view to_string(FieldSource s) {
  switch (s) {
    case FieldSource::eigen_gradient: return "eigen_gradient";
    case FieldSource::eigen_arcsine_gradient: return "eigen_arcsine_gradient";
    case FieldSource::user_supplied: return "user_supplied";
  }
  return "eigen_gradient";
}

FieldSource parse_field_source(std::string_view name) {
  if (name == "eigen_gradient") return FieldSource::eigen_gradient;
  if (name == "eigen_arcsine_gradient") return FieldSource::eigen_arcsine_gradient;
  if (name == "user_supplied") return FieldSource::user_supplied;
  throw ValidationError("unknown field source '" + std::string(name) + "'");
}

namespace {

Index field_count(const PipelineConfig& c) {
  return c.field_source == FieldSource::user_supplied ? static_cast<Index>(c.user_fields.size()) : c.k;
}

void validate_config(const PipelineConfig& c) {
  if (c.field_source != FieldSource::user_supplied && c.k < 1) {
    throw ValidationError("config: k must be >= 1 for eigen-based fields");
  }
  if (c.field_source == FieldSource::user_supplied && c.user_fields.empty()) {
    throw ValidationError("config: field_source user_supplied needs at least one user field");
  }
  if (!(c.eps > 0)) throw ValidationError("config: eps must be positive");
  if (c.tol < 0) throw ValidationError("config: tol must be >= 0");
  const Index nf = field_count(c);
  const auto check_index = [&](Index f, const std::string& who) {
    if (f < 0 || f >= nf) {
      throw ValidationError("config: " + who + " refers to field " + std::to_string(f + 1) + " but only " +
                            std::to_string(nf) + " fields exist");
    }
  };
  for (const auto& a : c.aggregators) {
    if (!a.directional) throw ValidationError("config: pipeline aggregators must be directional (got " + a.name() + ")");
    check_index(a.field, a.name());
  }
  for (const auto& aug : c.augmentations) {
    if (aug.op == "rotate") {
      if (aug.fields.size() != 2) throw ValidationError("config: rotate needs two fields");
    } else if (aug.op == "reflect" || aug.op == "distort") {
      if (aug.fields.size() != 1) throw ValidationError("config: " + aug.op + " needs one field");
      if (aug.op == "distort" && !(aug.scale >= 0)) throw ValidationError("config: distort scale must be >= 0");
    } else {
      throw ValidationError("config: unknown augmentation '" + aug.op + "'");
    }
    for (const Index f : aug.fields) check_index(f, aug.op);
  }
  if (c.forward) {
    for (const auto& a : c.forward->layer.aggregators) {
      if (a.directional) check_index(a.field, "forward aggregator " + a.name());
    }
  }
}

template <typename Fn>
auto in_stage(const std::string& name, Fn&& fn) {
  try {
    return fn();
  } catch (const NumericalError& e) {
    throw NumericalError("stage " + name + ": " + e.what(), e.residuals());
  } catch (const ValidationError& e) {
    throw ValidationError("stage " + name + ": " + e.what());
  }
}

std::string sanitize(std::string s) {
  for (char& ch : s) {
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_' && ch != '-') ch = '_';
  }
  return s;
}

}  // namespace

PipelineConfig config_from_json(const nlohmann::json& j, const std::shared_ptr<const Graph>& graph,
                                const std::filesystem::path& base_dir) {
  PipelineConfig c;
  try {
    if (!j.is_object()) throw ValidationError("config: expected a JSON object");
    if (j.value("schema_version", kSchemaVersion) != kSchemaVersion) {
      throw ValidationError("config: unsupported schema_version " + j.at("schema_version").dump());
    }
    static const std::vector<std::string> known{"schema_version", "laplacian", "k", "field_source", "aggregators",
                                                "augmentations", "eps", "tol", "multiplicity_tol", "seed",
                                                "sample_eigenspaces", "record_timings", "forward", "user_fields"};
    for (const auto& [key, value] : j.items()) {
      if (std::find(known.begin(), known.end(), key) == known.end()) {
        throw ValidationError("config: unknown key '" + key + "'");
      }
    }
    c.laplacian = parse_laplacian_kind(j.value("laplacian", "combinatorial"));
    c.k = j.value("k", Index(1));
    c.field_source = parse_field_source(j.value("field_source", "eigen_gradient"));
    for (const auto& a : j.value("aggregators", nlohmann::json::array())) {
      c.aggregators.push_back(parse_aggregator_spec(a.get<std::string>()));
    }
    for (const auto& a : j.value("augmentations", nlohmann::json::array())) {
      AugmentationConfig aug;
      aug.op = a.at("op").get<std::string>();
      for (const auto& f : a.at("fields")) aug.fields.push_back(f.get<Index>() - 1);
      aug.theta = a.value("theta", 0.0);
      aug.scale = a.value("scale", 0.0);
      c.augmentations.push_back(std::move(aug));
    }
    c.eps = j.value("eps", 1e-8);
    c.tol = j.value("tol", 0.0);
    c.multiplicity_tol = j.value("multiplicity_tol", 1e-6);
    c.seed = j.value("seed", std::uint64_t{0});
    c.sample_eigenspaces = j.value("sample_eigenspaces", false);
    c.record_timings = j.value("record_timings", false);
    if (j.contains("forward")) {
      ForwardConfig f;
      f.layer = layer_spec_from_json(j.at("forward").at("layer"));
      const std::string features = j.at("forward").value("features", "ones");
      if (features != "ones" && features != "node_features") {
        throw ValidationError("config: forward.features must be 'ones' or 'node_features'");
      }
      f.use_node_features = features == "node_features";
      c.forward = std::move(f);
    }
    for (const auto& p : j.value("user_fields", nlohmann::json::array())) {
      const std::filesystem::path path = base_dir / p.get<std::string>();
      c.user_field_paths.push_back(p.get<std::string>());
      if (path.extension() == ".csv") {
        c.user_fields.push_back(field_from_csv(read_file(path), graph));
      } else {
        c.user_fields.push_back(field_from_json(read_json_file(path), graph));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  validate_config(c);
  return c;
}

nlohmann::json config_to_json(const PipelineConfig& c) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["laplacian"] = std::string(to_string(c.laplacian));
  j["k"] = c.k;
  j["field_source"] = std::string(to_string(c.field_source));
  auto aggs = nlohmann::json::array();
  for (const auto& a : c.aggregators) aggs.push_back(a.name());
  j["aggregators"] = std::move(aggs);
  auto augs = nlohmann::json::array();
  for (const auto& a : c.augmentations) {
    nlohmann::json aj = {{"op", a.op}};
    auto fields = nlohmann::json::array();
    for (const Index f : a.fields) fields.push_back(f + 1);
    aj["fields"] = std::move(fields);
    if (a.op == "rotate") aj["theta"] = a.theta;
    if (a.op == "distort") aj["scale"] = a.scale;
    augs.push_back(std::move(aj));
  }
  j["augmentations"] = std::move(augs);
  j["eps"] = c.eps;
  j["tol"] = c.tol;
  j["multiplicity_tol"] = c.multiplicity_tol;
  j["seed"] = c.seed;
  j["sample_eigenspaces"] = c.sample_eigenspaces;
  j["record_timings"] = c.record_timings;
  if (c.forward) {
    j["forward"] = {{"layer", layer_spec_to_json(c.forward->layer)},
                    {"features", c.forward->use_node_features ? "node_features" : "ones"}};
  }
  if (!c.user_field_paths.empty()) j["user_fields"] = c.user_field_paths;
  return j;
}

std::string config_hash(const PipelineConfig& c) {
  nlohmann::json j = config_to_json(c);
  j.erase("user_fields");
  auto hashes = nlohmann::json::array();
  for (const auto& f : c.user_fields) hashes.push_back(field_hash(f));
  j["user_field_hashes"] = std::move(hashes);
  return sha256_hex(j.dump());
}

nlohmann::json manifest_to_json(const RunManifest& m, bool with_timings) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["config_hash"] = m.config_hash;
  j["graph_hash"] = m.graph_hash;
  j["components"] = {{"count", m.component_count}, {"sizes", m.component_sizes}};
  j["multiplicity_warnings"] = m.multiplicity_warnings;
  j["sub_seeds"] = m.sub_seeds;
  j["seed_split"] = "mix64(seed ^ fnv1a64(stage))";
  j["generator"] = std::string(SeededGenerator::kAlgorithm);
  j["stages"] = m.stages;
  j["artifacts"] = m.artifacts;
  if (with_timings) j["timings_ms"] = m.timings_ms;
  return j;
}

EigenCache& EigenCache::global() {
  static EigenCache cache = [] {
    const char* dir = std::getenv("DGN_CACHE_DIR");
    return dir && *dir ? EigenCache(std::filesystem::path(dir)) : EigenCache();
  }();
  return cache;
}

std::vector<EigenBasis> EigenCache::get_or_compute(const Graph& g, const EigenOptions& opt) {
  const std::string key = graph_hash(g) + "|" + std::string(to_string(opt.kind)) + "|" + std::to_string(opt.k) + "|" +
                          format_double(opt.tol) + "|" + format_double(opt.multiplicity_tol) + "|" +
                          std::to_string(static_cast<int>(opt.solver)) + "|" + std::to_string(opt.dense_threshold);
  {
    std::shared_lock lock(mutex_);
    if (const auto it = entries_.find(key); it != entries_.end()) {
      lock.unlock();
      std::unique_lock w(mutex_);
      ++hits_;
      return entries_.at(key);
    }
  }
  std::optional<std::filesystem::path> file;
  if (dir_) file = *dir_ / (sha256_hex(key) + ".json");
  std::vector<EigenBasis> bases;
  bool loaded = false;
  if (file && std::filesystem::exists(*file)) {
    try {
      const auto j = read_json_file(*file);
      if (j.at("key").get<std::string>() == key) {
        for (const auto& b : j.at("bases")) bases.push_back(eigen_basis_from_json(b));
        loaded = true;
      }
    } catch (const std::exception&) {
      bases.clear();  // unreadable cache entry: recompute and overwrite
    }
  }
  if (!loaded) {
    bases = component_eigen_bases(g, opt);
    if (file) {
      nlohmann::json j;
      j["key"] = key;
      const std::string gh = graph_hash(g);
      for (const auto& b : bases) j["bases"].push_back(eigen_basis_to_json(b, gh));
      write_json_file(*file, j);
    }
  }
  std::unique_lock lock(mutex_);
  if (loaded) ++hits_;
  entries_.emplace(key, bases);
  return bases;
}

std::size_t EigenCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

std::size_t EigenCache::hits() const {
  std::shared_lock lock(mutex_);
  return hits_;
}

PipelineResult run(std::shared_ptr<const Graph> graph, const PipelineConfig& config, EigenCache* cache) {
  if (!graph) throw ValidationError("pipeline: null graph");
  validate_config(config);
  if (!cache) cache = &EigenCache::global();
  PipelineResult r;
  r.graph = graph;
  const Graph& g = *graph;
  auto& m = r.manifest;
  m.config_hash = config_hash(config);
  m.graph_hash = graph_hash(g);
  const auto comps = connected_components(g);
  m.component_count = comps.component_count;
  for (Index c = 0; c < comps.component_count; ++c) m.component_sizes.push_back(static_cast<Index>(comps.members(c).size()));
  m.sub_seeds["eigenspace"] = derive_seed(config.seed, "eigenspace");
  m.sub_seeds["augment"] = derive_seed(config.seed, "augment");
  m.sub_seeds["forward"] = derive_seed(config.seed, "forward");

  using clock = std::chrono::steady_clock;
  auto timed = [&](const std::string& name, auto&& fn) {
    const auto t0 = clock::now();
    in_stage(name, fn);
    m.stages.push_back(name);
    m.timings_ms[name] = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
  };

  if (config.field_source == FieldSource::user_supplied) {
    timed("fields", [&] {
      for (const auto& f : config.user_fields) {
        if (!f.graph().same_structure(g)) throw ValidationError("user field lives on another graph");
        r.fields.push_back(VectorField(graph, f.values()));
      }
      return 0;
    });
  } else {
    timed("eigen", [&] {
      EigenOptions opt;
      opt.kind = config.laplacian;
      // One extra pair so a multiplicity touching phi_k is visible.
      opt.k = config.k + 2;
      opt.tol = config.tol;
      opt.multiplicity_tol = config.multiplicity_tol;
      r.component_bases = cache->get_or_compute(g, opt);
      for (std::size_t c = 0; c < r.component_bases.size(); ++c) {
        auto& b = r.component_bases[c];
        for (const auto& grp : b.groups) {
          if (grp.size() < 2 || grp.front() > config.k) continue;
          std::string idx;
          for (const Index i : grp) idx += (idx.empty() ? "" : ",") + std::to_string(i);
          m.multiplicity_warnings.push_back("component " + std::to_string(c) + ": eigenvalue " +
                                            format_double(b.eigenvalues[grp.front()]) + " has multiplicity " +
                                            std::to_string(grp.size()) + " (indices " + idx + ")");
          if (config.sample_eigenspaces) {
            const Eigen::MatrixXd sampled = sample_eigenspace_basis(
                b, grp, derive_seed(m.sub_seeds["eigenspace"], "component" + std::to_string(c) + "/" + idx));
            for (std::size_t q = 0; q < grp.size(); ++q) b.eigenvectors.col(grp[q]) = sampled.col(static_cast<Index>(q));
          }
        }
        const Index keep = std::min<Index>(config.k + 1, b.size());
        b.eigenvalues.conservativeResize(keep);
        b.eigenvectors.conservativeResize(Eigen::NoChange, keep);
        b.component_of.resize(static_cast<std::size_t>(keep));
        b.groups = multiplicity_groups(b.eigenvalues, config.multiplicity_tol);
      }
      return 0;
    });
    timed("fields", [&] {
      for (Index i = 1; i <= config.k; ++i) {
        const Eigen::VectorXd phi = assemble_component_vector(r.component_bases, i);
        if (config.field_source == FieldSource::eigen_arcsine_gradient && phi.cwiseAbs().maxCoeff() > 0) {
          r.fields.push_back(arcsine_field(graph, phi));
        } else {
          r.fields.push_back(gradient(graph, phi));
        }
      }
      return 0;
    });
  }

  timed("aggregators", [&] {
    for (const auto& a : config.aggregators) {
      const VectorField& f = r.fields[static_cast<std::size_t>(a.field)];
      const SparseRealMatrix tf = transform_field(f.values(), a.transform);
      r.aggregators.push_back(build_aggregator(g, tf, a.kind, config.eps, field_hash(f)));
      r.aggregator_names.push_back(a.name());
    }
    return 0;
  });

  if (!config.augmentations.empty()) {
    timed("augment", [&] {
      for (std::size_t idx = 0; idx < config.augmentations.size(); ++idx) {
        const auto& aug = config.augmentations[idx];
        AugmentationRecord rec;
        rec.op = aug.op;
        rec.generator = std::string(SeededGenerator::kAlgorithm);
        const std::string tag = std::to_string(idx + 1) + "_" + aug.op;
        for (const Index f : aug.fields) rec.inputs.push_back(field_hash(r.fields[static_cast<std::size_t>(f)]));
        if (aug.op == "reflect") {
          const VectorField out = reflect(r.fields[static_cast<std::size_t>(aug.fields[0])]);
          rec.outputs.push_back(field_hash(out));
          r.augmented.emplace_back(tag, out.values());
        } else if (aug.op == "distort") {
          rec.parameter = aug.scale;
          rec.seed = derive_seed(m.sub_seeds["augment"], std::to_string(idx));
          const VectorField out = distort(r.fields[static_cast<std::size_t>(aug.fields[0])], rec.seed, aug.scale);
          rec.outputs.push_back(field_hash(out));
          r.augmented.emplace_back(tag, out.values());
        } else {
          rec.parameter = aug.theta;
          const FieldPlane plane = build_plane(r.fields[static_cast<std::size_t>(aug.fields[0])],
                                               r.fields[static_cast<std::size_t>(aug.fields[1])]);
          const RotatedPair out = rotate(plane, aug.theta);
          rec.outputs.push_back(matrix_hash(out.f1));
          rec.outputs.push_back(matrix_hash(out.f2));
          r.augmented.emplace_back(tag + "_a", out.f1);
          r.augmented.emplace_back(tag + "_b", out.f2);
        }
        r.augmentation_records.push_back(std::move(rec));
      }
      return 0;
    });
  }

  if (config.forward) {
    timed("forward", [&] {
      Eigen::MatrixXd x;
      if (config.forward->use_node_features) {
        if (!g.node_features()) throw ValidationError("forward: graph has no node features");
        x = *g.node_features();
      } else {
        x = Eigen::MatrixXd::Ones(g.node_count(), 1);
      }
      const auto& layer = config.forward->layer;
      r.forward_output = layer.architecture == Architecture::simple ? forward_simple(g, x, layer, r.fields).output
                                                                    : forward_complex(g, x, layer, r.fields).output;
      return 0;
    });
  }
  return r;
}

void export_run(PipelineResult& result, const PipelineConfig& config, const std::filesystem::path& dir) {
  auto& m = result.manifest;
  m.artifacts.clear();
  const auto put = [&](const std::string& rel, const std::string& content) {
    write_file_atomic(dir / rel, content);
    m.artifacts[rel] = sha256_hex(content);
  };
  const auto put_json = [&](const std::string& rel, const nlohmann::json& j) { put(rel, j.dump(2) + "\n"); };
  const auto triplets = [](const SparseRealMatrix& s) {
    std::string out = "row,col,value\n";
    for (Index i = 0; i < s.outerSize(); ++i) {
      for (SparseRealMatrix::InnerIterator it(s, i); it; ++it) {
        out += std::to_string(it.row()) + "," + std::to_string(it.col()) + "," + format_double(it.value()) + "\n";
      }
    }
    return out;
  };

  put_json("config.json", config_to_json(config));
  put_json("graph.json", graph_to_json(*result.graph));
  const std::string gh = graph_hash(*result.graph);
  for (std::size_t c = 0; c < result.component_bases.size(); ++c) {
    put_json("eigen/component_" + std::to_string(c) + ".json", eigen_basis_to_json(result.component_bases[c], gh));
  }
  for (std::size_t i = 0; i < result.fields.size(); ++i) {
    const std::string stem = "fields/field_" + std::to_string(i + 1);
    put_json(stem + ".json", field_to_json(result.fields[i]));
    put(stem + ".csv", field_to_csv(result.fields[i]));
  }
  for (std::size_t a = 0; a < result.aggregators.size(); ++a) {
    const std::string stem = "aggregators/" + std::to_string(a + 1) + "_" + sanitize(result.aggregator_names[a]);
    put(stem + ".csv", aggregator_to_csv(result.aggregators[a]));
    put_json(stem + ".json", aggregator_to_json(result.aggregators[a]));
  }
  for (const auto& [name, mat] : result.augmented) put("augmented/" + sanitize(name) + ".csv", triplets(mat));
  if (!result.augmentation_records.empty()) {
    auto recs = nlohmann::json::array();
    for (const auto& r : result.augmentation_records) recs.push_back(augmentation_record_to_json(r));
    put_json("augmented/manifest.json", recs);
  }
  if (result.forward_output) put_json("forward.json", {{"output", matrix_to_json(*result.forward_output)}});
  write_json_file(dir / "manifest.json", manifest_to_json(m, config.record_timings));
}

}  // namespace dgn
