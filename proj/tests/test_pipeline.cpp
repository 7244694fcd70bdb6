#include "dgn/pipeline.hpp"
#include "dgn/hash.hpp"
#include "dgn/random.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace dgn;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("dgn_test_pipeline_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

PipelineConfig lattice_config() {
  PipelineConfig c;
  c.k = 2;
  c.seed = 17;
  c.aggregators = {parse_aggregator_spec("dx1"), parse_aggregator_spec("av1"), parse_aggregator_spec("dx_center2"),
                   parse_aggregator_spec("av_0pad2")};
  c.augmentations = {{"rotate", {0, 1}, 0.4, 0.0}, {"distort", {0}, 0.0, 0.2}, {"reflect", {1}, 0.0, 0.0}};
  ForwardConfig f;
  f.layer.aggregators = {parse_aggregator_spec("mean"), parse_aggregator_spec("dx1")};
  f.layer.scalers = {-1, 0, 1};
  f.layer.update = Mlp::seeded(std::vector<Index>{6, 3}, Activation::tanh, Activation::tanh, 5);
  c.forward = f;
  return c;
}

}  // namespace

TEST_CASE("P3 with k = 1 and a dx aggregator") {
  auto g = std::make_shared<const Graph>(gen_path(3));
  PipelineConfig c;
  c.aggregators = {parse_aggregator_spec("dx1")};
  EigenCache cache;
  const PipelineResult r = run(g, c, &cache);
  REQUIRE(r.aggregators.size() == 1);
  // phi_1 = (1, 0, -1) / sqrt 2 after sign canon, so every row points toward node 0.
  const Eigen::Matrix3d expected{{1, -1, 0}, {0.5, 0, -0.5}, {0, 1, -1}};
  CHECK((Eigen::MatrixXd(r.aggregators[0].matrix) - expected).cwiseAbs().maxCoeff() < 1e-7);
  CHECK(r.manifest.multiplicity_warnings.empty());
  CHECK(r.manifest.stages == std::vector<std::string>{"eigen", "fields", "aggregators"});
  CHECK_FALSE(r.forward_output);
}

TEST_CASE("two triangles flag the repeated eigenvalue") {
  auto g = std::make_shared<const Graph>(disjoint_union(gen_cycle(3), gen_cycle(3)));
  PipelineConfig c;
  c.aggregators = {parse_aggregator_spec("av1")};
  EigenCache cache;
  const PipelineResult r = run(g, c, &cache);
  CHECK(r.manifest.component_count == 2);
  CHECK(r.manifest.multiplicity_warnings.size() == 2);
  CHECK(r.component_bases.size() == 2);
  CHECK(r.component_bases[0].eigenvalues[1] == doctest::Approx(3.0));
  // phi_1 is assembled from both components.
  const SparseRealMatrix& f = r.fields[0].values();
  CHECK(f.block(0, 0, 3, 3).norm() > 0);
  CHECK(f.block(3, 3, 3, 3).norm() > 0);
}

TEST_CASE("user supplied fields skip the eigen stage") {
  auto g = std::make_shared<const Graph>(gen_path(4));
  PipelineConfig c;
  c.field_source = FieldSource::user_supplied;
  c.user_fields = {gradient(g, Eigen::Vector4d(0, 1, 3, 2))};
  c.aggregators = {parse_aggregator_spec("av1")};
  EigenCache cache;
  const PipelineResult r = run(g, c, &cache);
  CHECK(r.manifest.stages == std::vector<std::string>{"fields", "aggregators"});
  CHECK(cache.size() == 0);
  CHECK(r.component_bases.empty());

  auto other = std::make_shared<const Graph>(gen_cycle(4));
  c.user_fields = {gradient(other, Eigen::Vector4d(0, 1, 3, 2))};
  try {
    run(g, c, &cache);
    FAIL("expected a stage error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).rfind("stage fields:", 0) == 0);
  }
}

TEST_CASE("config validation") {
  auto g = std::make_shared<const Graph>(gen_path(5));
  EigenCache cache;
  PipelineConfig c;
  c.k = 0;
  CHECK_THROWS_AS(run(g, c, &cache), ValidationError);
  c = {};
  c.aggregators = {parse_aggregator_spec("dx3")};
  CHECK_THROWS_AS(run(g, c, &cache), ValidationError);
  c = {};
  c.eps = 0;
  CHECK_THROWS_AS(run(g, c, &cache), ValidationError);
  c = {};
  c.k = 2;
  c.augmentations = {{"rotate", {0}, 0.1, 0.0}};
  CHECK_THROWS_AS(run(g, c, &cache), ValidationError);
  c.augmentations = {{"distort", {0}, 0.0, -1.0}};
  CHECK_THROWS_AS(run(g, c, &cache), ValidationError);
  c.augmentations = {{"shear", {0}, 0.0, 0.0}};
  CHECK_THROWS_AS(run(g, c, &cache), ValidationError);
  c = {};
  c.field_source = FieldSource::user_supplied;
  CHECK_THROWS_AS(run(g, c, &cache), ValidationError);

  CHECK_THROWS_AS(config_from_json(json{{"kay", 1}}, g), ValidationError);
  CHECK_THROWS_AS(config_from_json(json{{"schema_version", 99}}, g), ValidationError);
  CHECK_THROWS_AS(config_from_json(json{{"k", "two"}}, g), ValidationError);
  CHECK_THROWS_AS(config_from_json(json{{"aggregators", {"dx1", "blur"}}}, g), ValidationError);
  CHECK_THROWS_AS(config_from_json(json{{"user_fields", {"missing.csv"}}, {"field_source", "user_supplied"}}, g),
                  ValidationError);
}

TEST_CASE("config json round trip") {
  auto g = std::make_shared<const Graph>(gen_lattice({4, 3}));
  const PipelineConfig c = lattice_config();
  const json j = config_to_json(c);
  const PipelineConfig back = config_from_json(j, g);
  CHECK(config_to_json(back) == j);
  CHECK(config_hash(back) == config_hash(c));
  PipelineConfig other = c;
  other.seed = 18;
  CHECK(config_hash(other) != config_hash(c));
  CHECK(back.augmentations[0].fields == std::vector<Index>{0, 1});
}

TEST_CASE("eigenbasis cache") {
  auto g = std::make_shared<const Graph>(gen_lattice({5, 4}));
  PipelineConfig c;
  c.aggregators = {parse_aggregator_spec("av1")};
  EigenCache cache;
  const PipelineResult a = run(g, c, &cache);
  CHECK(cache.size() == 1);
  CHECK(cache.hits() == 0);
  const PipelineResult b = run(g, c, &cache);
  CHECK(cache.hits() == 1);
  CHECK(Eigen::MatrixXd(a.aggregators[0].matrix - b.aggregators[0].matrix).cwiseAbs().maxCoeff() == 0.0);
  c.k = 2;
  run(g, c, &cache);
  CHECK(cache.size() == 2);

  const fs::path dir = scratch("cache");
  {
    EigenCache disk(dir);
    disk.get_or_compute(*g, EigenOptions{});
  }
  EigenCache reopened(dir);
  const auto bases = reopened.get_or_compute(*g, EigenOptions{});
  CHECK(reopened.hits() == 1);
  CHECK(bases.size() == 1);
  fs::remove_all(dir);
}

TEST_CASE("forward stage does not touch fields or aggregators") {
  auto g = std::make_shared<const Graph>(gen_lattice({6, 4}));
  PipelineConfig with = lattice_config();
  PipelineConfig without = with;
  without.forward.reset();
  EigenCache cache;
  const PipelineResult a = run(g, with, &cache), b = run(g, without, &cache);
  REQUIRE(a.forward_output);
  CHECK(a.forward_output->rows() == 24);
  CHECK_FALSE(b.forward_output);
  for (std::size_t i = 0; i < a.aggregators.size(); ++i) {
    CHECK(Eigen::MatrixXd(a.aggregators[i].matrix - b.aggregators[i].matrix).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK(a.augmented.size() == 4);
}

TEST_CASE("exports are bit identical across runs") {
  auto g = std::make_shared<const Graph>(gen_lattice({6, 4}));
  const PipelineConfig c = lattice_config();
  const fs::path d1 = scratch("run1"), d2 = scratch("run2");
  {
    EigenCache cache;
    PipelineResult r = run(g, c, &cache);
    export_run(r, c, d1);
  }
  {
    EigenCache cache;
    PipelineResult r = run(g, c, &cache);
    export_run(r, c, d2);
  }
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(d1)) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), d1);
    REQUIRE(fs::exists(d2 / rel));
    CHECK(slurp(e.path()) == slurp(d2 / rel));
    ++files;
  }
  CHECK(files > 10);
  const json manifest = json::parse(slurp(d1 / "manifest.json"));
  CHECK(manifest.contains("artifacts"));
  CHECK(manifest.contains("sub_seeds"));
  CHECK_FALSE(manifest.contains("timings_ms"));
  for (const auto& [rel, sha] : manifest["artifacts"].items()) CHECK(sha256_hex(slurp(d1 / rel)) == sha);
  fs::remove_all(d1);
  fs::remove_all(d2);
}
