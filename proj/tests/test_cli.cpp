#include "cli.hpp"

#include "dgn/graph_io.hpp"
#include "dgn/io.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  int code = 0;
  std::string out, err;
};

Outcome dgn_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = dgn::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("dgn_test_cli_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& f) const { return (path / f).string(); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("gen writes graphs") {
  TempDir d("gen");
  REQUIRE(dgn_cli({"gen", "--lattice", "9x5", "-o", d / "g.json"}).code == 0);
  const dgn::Graph g = dgn::load_graph(d / "g.json").graph;
  CHECK(g.node_count() == 45);
  CHECK(g.edge_count() == 8 * 5 + 9 * 4);
  CHECK(dgn_cli({"gen", "--fixture", "decalin", "-o", d / "dec.json"}).code == 0);
  CHECK(dgn_cli({"gen", "--community", "8,6", "--seed", "3", "-o", d / "c.json"}).code == 0);
  CHECK(dgn_cli({"gen", "--corpus", d / "corpus"}).code == 0);
  CHECK(std::distance(fs::directory_iterator(d.path / "corpus"), fs::directory_iterator{}) >= 30);
  CHECK(dgn_cli({"gen", "--lattice", "9by5", "-o", d / "bad.json"}).code == 1);
  CHECK(dgn_cli({"gen", "--path", "4", "--cycle", "4", "-o", d / "bad.json"}).code == 1);
}

TEST_CASE("eig, field and aggregate") {
  TempDir d("eig");
  REQUIRE(dgn_cli({"gen", "--path", "3", "-o", d / "p3.json"}).code == 0);
  REQUIRE(dgn_cli({"eig", d / "p3.json", "-k", "2", "--kind", "combinatorial", "-o", d / "basis.json"}).code == 0);
  const json basis = dgn::read_json_file(d / "basis.json");
  const auto& vals = basis.at("eigenvalues");
  CHECK(vals.at(0).get<double>() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(vals.at(1).get<double>() == doctest::Approx(1.0));

  std::ofstream(d / "phi.json") << "[0, 1, 2]";
  std::ofstream(d / "x.json") << "[[0], [1], [4]]";
  REQUIRE(dgn_cli({"field", d / "p3.json", "--source", "potential", "--potential", d / "phi.json", "-o", d / "f.json"})
              .code == 0);
  REQUIRE(dgn_cli({"aggregate", d / "p3.json", d / "f.json", "--kind", "dx", "--features", d / "x.json",
                   "--applied", d / "y.json", "-o", d / "b.csv"})
              .code == 0);
  const json y = dgn::read_json_file(d / "y.json");
  CHECK(y.at(0).at(0).get<double>() == doctest::Approx(1.0));
  CHECK(y.at(1).at(0).get<double>() == doctest::Approx(2.0));
  CHECK(y.at(2).at(0).get<double>() == doctest::Approx(3.0));
  CHECK(fs::file_size(d.path / "b.csv") > 0);

  CHECK(dgn_cli({"field", d / "p3.json", "-k", "1", "-o", d / "fiedler.csv"}).code == 0);
  CHECK(dgn_cli({"aggregate", d / "p3.json", d / "fiedler.csv", "--kind", "av", "--transform", "harden", "-o",
                 d / "h.json"})
            .code == 0);
  CHECK(dgn_cli({"aggregate", d / "p3.json", d / "f.json", "--kind", "blur", "-o", d / "z.json"}).code == 1);
}

TEST_CASE("exit codes") {
  TempDir d("codes");
  const Outcome unknown = dgn_cli({"frobnicate"});
  CHECK(unknown.code == 1);
  CHECK_FALSE(unknown.err.empty());
  CHECK(dgn_cli({}).code == 1);
  CHECK(dgn_cli({"eig", d / "missing.json", "-o", d / "b.json"}).code == 1);
  CHECK_FALSE(fs::exists(d.path / "b.json"));
  REQUIRE(dgn_cli({"gen", "--cycle", "60", "-o", d / "c.json"}).code == 0);
  CHECK(dgn_cli({"eig", d / "c.json", "-k", "0", "-o", d / "b.json"}).code == 1);
  const Outcome stuck =
      dgn_cli({"eig", d / "c.json", "-k", "2", "--solver", "iterative", "--tol", "1e-300", "-o", d / "b.json"});
  CHECK(stuck.code == 2);
  CHECK(stuck.err.find("no convergence") != std::string::npos);
  CHECK_FALSE(fs::exists(d.path / "b.json"));
  CHECK(dgn_cli({"verify", "--suite", "nonsense"}).code == 1);
}

TEST_CASE("diffusion, augment and wl-check") {
  TempDir d("misc");
  REQUIRE(dgn_cli({"gen", "--lattice", "4x5", "-o", d / "g.json"}).code == 0);
  REQUIRE(dgn_cli({"diffusion", d / "g.json", "-t", "1.5", "--x", "0", "--y", "19", "-o", d / "d.json"}).code == 0);
  const json dist = dgn::read_json_file(d / "d.json");
  CHECK(dist.contains("x_prime"));
  CHECK(dist.at("samples").at(0).at("d_xpy").get<double>() < dist.at("distance").get<double>());
  CHECK(dgn_cli({"diffusion", d / "g.json", "--certify", "-o", d / "cert.json"}).code == 0);

  REQUIRE(dgn_cli({"field", d / "g.json", "-k", "1", "-o", d / "f1.json"}).code == 0);
  REQUIRE(dgn_cli({"field", d / "g.json", "-k", "2", "-o", d / "f2.json"}).code == 0);
  CHECK(dgn_cli({"augment", d / "g.json", "--op", "rotate", "--field", d / "f1.json", "--field", d / "f2.json",
                 "--theta", "0.3", "-o", d / "r1.csv", "--out2", d / "r2.csv", "--record", d / "rec.json"})
            .code == 0);
  CHECK(dgn::read_json_file(d / "rec.json").at("op") == "rotate");
  CHECK(dgn_cli({"augment", d / "g.json", "--op", "distort", "--field", d / "f1.json", "--scale", "0.1", "--seed",
                 "4", "-o", d / "dist.json"})
            .code == 0);

  const Outcome wl = dgn_cli({"wl-check", "--report", d / "wl.json"});
  CHECK(wl.code == 0);
  const json rep = dgn::read_json_file(d / "wl.json");
  CHECK(rep.at("wl_result") == "indistinguishable");
  CHECK(rep.at("gap").get<double>() > 1e-6);
}

TEST_CASE("verify suites") {
  TempDir d("verify");
  const Outcome r = dgn_cli({"verify", "--suite", "path-spectra", "--report", d / "r.json"});
  CHECK(r.code == 0);
  CHECK(r.out.find("pass") != std::string::npos);
  CHECK(dgn::read_json_file(d / "r.json").dump().find("\"passed\":true") != std::string::npos);
  CHECK(dgn_cli({"verify", "--suite", "grid-kernel", "--dims", "9x5", "--radius", "2"}).code == 0);
  CHECK(dgn_cli({"verify", "--suite", "wl"}).code == 0);
}

TEST_CASE("pipeline run is deterministic") {
  TempDir d("pipeline");
  REQUIRE(dgn_cli({"gen", "--lattice", "6x4", "-o", d / "g.json"}).code == 0);
  std::ofstream(d / "config.json") << R"({"schema_version": 1, "k": 2, "seed": 9,
    "aggregators": ["dx1", "av2", "dx_center1"],
    "augmentations": [{"op": "distort", "fields": [1], "scale": 0.3}, {"op": "rotate", "fields": [1, 2], "theta": 0.5}]})";
  REQUIRE(dgn_cli({"pipeline", "run", d / "g.json", "--config", d / "config.json", "-o", d / "a"}).code == 0);
  REQUIRE(dgn_cli({"export", d / "g.json", "--config", d / "config.json", "-o", d / "b"}).code == 0);
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(d.path / "a")) {
    if (!e.is_regular_file()) continue;
    CHECK(slurp(e.path()) == slurp(d.path / "b" / fs::relative(e.path(), d.path / "a")));
    ++files;
  }
  CHECK(files > 5);
  CHECK(dgn_cli({"pipeline", "run", d / "g.json", "--config", d / "config.json", "--seed", "10", "-o", d / "c"}).code ==
        0);
  CHECK(slurp(d.path / "a" / "augmented" / "1_distort.csv") != slurp(d.path / "c" / "augmented" / "1_distort.csv"));
  std::ofstream(d / "bad.json") << R"({"k": 2, "aggregators": ["dx7"]})";
  CHECK(dgn_cli({"pipeline", "run", d / "g.json", "--config", d / "bad.json", "-o", d / "e"}).code == 1);
}
