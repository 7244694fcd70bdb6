#include "cli.hpp"

#include "dgn/aggregate.hpp"
#include "dgn/augment.hpp"
#include "dgn/diffusion.hpp"
#include "dgn/graph_io.hpp"
#include "dgn/io.hpp"
#include "dgn/netcheck.hpp"
#include "dgn/pipeline.hpp"
#include "dgn/random.hpp"
#include "dgn/serialize.hpp"
#include "dgn/spectral.hpp"
#include "dgn/verify.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <sstream>

namespace dgn::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<Index> parse_dims(const std::string& text) {
  std::vector<Index> dims;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t stop = std::min(text.find_first_of("x,", start), text.size());
    Index v = 0;
    const auto [p, ec] = std::from_chars(text.data() + start, text.data() + stop, v);
    if (ec != std::errc() || p != text.data() + stop || v < 1) throw ValidationError("bad dimension list '" + text + "'");
    dims.push_back(v);
    start = stop + 1;
  }
  return dims;
}

std::shared_ptr<const Graph> read_graph(const std::string& path) {
  return std::make_shared<const Graph>(load_graph(path).graph);
}

VectorField read_field(const std::string& path, const std::shared_ptr<const Graph>& g) {
  if (fs::path(path).extension() == ".csv") return field_from_csv(read_file(path), g);
  return field_from_json(read_json_file(path), g);
}

void write_field(const std::string& path, const VectorField& f) {
  if (fs::path(path).extension() == ".csv") {
    write_file_atomic(path, field_to_csv(f));
  } else {
    write_json_file(path, field_to_json(f));
  }
}

Eigen::MatrixXd read_features(const std::string& path) {
  const json j = read_json_file(path);
  return matrix_from_json(j.is_object() ? j.at("features") : j);
}

EigenOptions eigen_options(const std::string& kind, Index k, double tol, const std::string& solver) {
  EigenOptions opt;
  opt.kind = parse_laplacian_kind(kind);
  opt.k = k;
  opt.tol = tol;
  if (solver == "dense") {
    opt.solver = EigenSolverKind::dense;
  } else if (solver == "iterative") {
    opt.solver = EigenSolverKind::iterative;
  } else if (solver != "auto") {
    throw ValidationError("unknown solver '" + solver + "'");
  }
  return opt;
}

struct Context {
  std::ostream& out;
  std::ostream& err;
};

// ---------------------------------------------------------------------------

void add_gen(CLI::App& app, Context& ctx, std::function<void()>& action) {
  auto* cmd = app.add_subcommand("gen", "Generate a graph");
  auto path = std::make_shared<Index>(0), cycle = std::make_shared<Index>(0), tree = std::make_shared<Index>(0);
  auto lattice = std::make_shared<std::string>(), community = std::make_shared<std::string>();
  auto corpus = std::make_shared<std::string>(), out = std::make_shared<std::string>();
  auto seed = std::make_shared<std::uint64_t>(0);
  auto p_in = std::make_shared<double>(0.3), p_out = std::make_shared<double>(0.05);
  auto fixture = std::make_shared<std::string>();
  auto* g_path = cmd->add_option("--path", *path, "Path graph on N nodes");
  auto* g_cycle = cmd->add_option("--cycle", *cycle, "Cycle on N nodes");
  auto* g_lattice = cmd->add_option("--lattice", *lattice, "Lattice, e.g. 9x5");
  auto* g_tree = cmd->add_option("--tree", *tree, "Random tree on N nodes");
  auto* g_comm = cmd->add_option("--community", *community, "Two communities, e.g. 20,15");
  auto* g_fix = cmd->add_option("--fixture", *fixture, "decalin or bicyclopentyl");
  auto* g_corpus = cmd->add_option("--corpus", *corpus, "Write the built-in diffusion corpus into this directory");
  cmd->add_option("--p-in", *p_in, "Chord probability inside a community");
  cmd->add_option("--p-out", *p_out, "Cross-community edge probability");
  cmd->add_option("--seed", *seed, "Seed");
  cmd->add_option("-o,--out", *out, "Output graph (.json or edge list)");
  for (auto* a : {g_path, g_cycle, g_lattice, g_tree, g_comm, g_fix, g_corpus}) {
    for (auto* b : {g_path, g_cycle, g_lattice, g_tree, g_comm, g_fix, g_corpus}) {
      if (a != b) a->excludes(b);
    }
  }
  cmd->callback([=, &ctx, &action] {
    action = [=, &ctx] {
      if (!corpus->empty()) {
        fs::create_directories(*corpus);
        const auto graphs = diffusion_corpus();
        for (const auto& ng : graphs) save_graph(fs::path(*corpus) / (ng.name + ".json"), ng.graph);
        ctx.out << "wrote " << graphs.size() << " graphs to " << *corpus << "\n";
        return;
      }
      if (out->empty()) throw ValidationError("gen: -o/--out is required");
      Graph g;
      if (*path > 0) {
        g = gen_path(*path);
      } else if (*cycle > 0) {
        g = gen_cycle(*cycle);
      } else if (!lattice->empty()) {
        g = gen_lattice(parse_dims(*lattice));
      } else if (*tree > 0) {
        g = gen_random_tree(*tree, *seed);
      } else if (!community->empty()) {
        const auto sizes = parse_dims(*community);
        if (sizes.size() != 2) throw ValidationError("gen: --community needs two sizes");
        g = gen_two_community(sizes[0], sizes[1], *p_in, *p_out, *seed);
      } else if (*fixture == "decalin") {
        g = decalin_graph();
      } else if (*fixture == "bicyclopentyl") {
        g = bicyclopentyl_graph();
      } else {
        throw ValidationError("gen: choose one of --path, --cycle, --lattice, --tree, --community, --fixture, --corpus");
      }
      save_graph(*out, g);
    };
  });
}

void add_eig(CLI::App& app, Context&, std::function<void()>& action) {
  auto* cmd = app.add_subcommand("eig", "Lowest Laplacian eigenpairs");
  auto graph = std::make_shared<std::string>(), out = std::make_shared<std::string>();
  auto kind = std::make_shared<std::string>("combinatorial"), solver = std::make_shared<std::string>("auto");
  auto k = std::make_shared<Index>(2);
  auto tol = std::make_shared<double>(0.0);
  cmd->add_option("graph", *graph, "Graph file")->required();
  cmd->add_option("-k", *k, "Number of eigenpairs, the trivial one included");
  cmd->add_option("--kind", *kind, "combinatorial, degree_normalized or symmetric_normalized");
  cmd->add_option("--tol", *tol, "Residual tolerance (0 = automatic)");
  cmd->add_option("--solver", *solver, "auto, dense or iterative");
  cmd->add_option("-o,--out", *out, "Output EigenBasis JSON")->required();
  cmd->callback([=, &action] {
    action = [=] {
      const auto g = read_graph(*graph);
      const EigenBasis b = eigen_lowest(*g, eigen_options(*kind, *k, *tol, *solver));
      write_json_file(*out, eigen_basis_to_json(b, graph_hash(*g)));
    };
  });
}

void add_field(CLI::App& app, Context&, std::function<void()>& action) {
  auto* cmd = app.add_subcommand("field", "Build a vector field");
  auto graph = std::make_shared<std::string>(), out = std::make_shared<std::string>();
  auto source = std::make_shared<std::string>("eigen_gradient"), kind = std::make_shared<std::string>("combinatorial");
  auto potential = std::make_shared<std::string>();
  auto index = std::make_shared<Index>(1);
  auto tol = std::make_shared<double>(0.0);
  cmd->add_option("graph", *graph, "Graph file")->required();
  cmd->add_option("--source", *source, "eigen_gradient, eigen_arcsine_gradient or potential");
  cmd->add_option("-k,--index", *index, "Eigenvector index (1 = Fiedler)");
  cmd->add_option("--kind", *kind, "Laplacian kind");
  cmd->add_option("--tol", *tol, "Eigen residual tolerance");
  cmd->add_option("--potential", *potential, "JSON array of node values (source potential)");
  cmd->add_option("-o,--out", *out, "Output field (.json or .csv)")->required();
  cmd->callback([=, &action] {
    action = [=] {
      const auto g = read_graph(*graph);
      if (*source == "potential") {
        if (potential->empty()) throw ValidationError("field: --potential is required for source potential");
        const Eigen::VectorXd x = vector_from_json(read_json_file(*potential));
        if (x.size() != g->node_count()) throw ValidationError("field: potential length does not match the graph");
        write_field(*out, gradient(g, x));
        return;
      }
      const FieldSource fs_kind = parse_field_source(*source);
      if (fs_kind == FieldSource::user_supplied) throw ValidationError("field: use --source potential for user input");
      if (*index < 1) throw ValidationError("field: index must be >= 1");
      const auto bases = component_eigen_bases(*g, eigen_options(*kind, *index + 1, *tol, "auto"));
      const Eigen::VectorXd phi = assemble_component_vector(bases, *index);
      write_field(*out, fs_kind == FieldSource::eigen_arcsine_gradient ? arcsine_field(g, phi) : gradient(g, phi));
    };
  });
}

void add_aggregate(CLI::App& app, Context&, std::function<void()>& action) {
  auto* cmd = app.add_subcommand("aggregate", "Build an aggregation matrix");
  auto graph = std::make_shared<std::string>(), field = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>(), kind = std::make_shared<std::string>("dx");
  auto transform = std::make_shared<std::string>("identity"), features = std::make_shared<std::string>();
  auto applied = std::make_shared<std::string>();
  auto eps = std::make_shared<double>(1e-8), temperature = std::make_shared<double>(1.0);
  cmd->add_option("graph", *graph, "Graph file")->required();
  cmd->add_option("field", *field, "Field file (.json or .csv)")->required();
  cmd->add_option("--kind", *kind, "av, dx, av_center, dx_center, av_0pad, dx_0pad");
  cmd->add_option("--transform", *transform, "identity, harden, soft_harden, forward, backward, forward_copy, backward_copy, reflect");
  cmd->add_option("--temperature", *temperature, "soft_harden temperature");
  cmd->add_option("--eps", *eps, "Normalization epsilon");
  cmd->add_option("--features", *features, "JSON node features to aggregate");
  cmd->add_option("--applied", *applied, "Where to write B X (JSON)");
  cmd->add_option("-o,--out", *out, "Output aggregator (.csv or .json)");
  cmd->callback([=, &action] {
    action = [=] {
      if (out->empty() && applied->empty()) throw ValidationError("aggregate: give -o/--out and/or --applied");
      if (!applied->empty() && features->empty()) throw ValidationError("aggregate: --applied needs --features");
      const auto g = read_graph(*graph);
      const VectorField f = read_field(*field, g);
      FieldTransform t;
      t.kind = parse_field_transform_kind(*transform);
      t.temperature = *temperature;
      const AggregationMatrix b =
          build_aggregator(*g, transform_field(f.values(), t), parse_aggregator_kind(*kind), *eps, field_hash(f));
      if (!out->empty()) {
        if (fs::path(*out).extension() == ".json") {
          write_json_file(*out, aggregator_to_json(b));
        } else {
          write_file_atomic(*out, aggregator_to_csv(b));
        }
      }
      if (!applied->empty()) write_json_file(*applied, matrix_to_json(apply(b, read_features(*features))));
    };
  });
}

void add_forward(CLI::App& app, Context&, std::function<void()>& action) {
  auto* cmd = app.add_subcommand("forward", "One DGN layer forward pass");
  auto graph = std::make_shared<std::string>(), layer = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>(), features = std::make_shared<std::string>();
  auto fields = std::make_shared<std::vector<std::string>>();
  cmd->add_option("graph", *graph, "Graph file")->required();
  cmd->add_option("--layer", *layer, "Layer spec JSON")->required();
  cmd->add_option("--field", *fields, "Field files, in order (field 1 first)");
  cmd->add_option("--features", *features, "JSON node features (default: graph features, else ones)");
  cmd->add_option("-o,--out", *out, "Output JSON")->required();
  cmd->callback([=, &action] {
    action = [=] {
      const auto g = read_graph(*graph);
      const LayerSpec spec = layer_spec_from_json(read_json_file(*layer));
      std::vector<VectorField> fs;
      for (const auto& f : *fields) fs.push_back(read_field(f, g));
      Eigen::MatrixXd x;
      if (!features->empty()) {
        x = read_features(*features);
      } else if (g->node_features()) {
        x = *g->node_features();
      } else {
        x = Eigen::MatrixXd::Ones(g->node_count(), 1);
      }
      const LayerOutput y = spec.architecture == Architecture::simple ? forward_simple(*g, x, spec, fs)
                                                                      : forward_complex(*g, x, spec, fs);
      write_json_file(*out, {{"pre_update", matrix_to_json(y.pre_update)}, {"output", matrix_to_json(y.output)}});
    };
  });
}

void add_augment(CLI::App& app, Context&, std::function<void()>& action) {
  auto* cmd = app.add_subcommand("augment", "Reflect, rotate or distort fields");
  auto graph = std::make_shared<std::string>(), op = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>(), out2 = std::make_shared<std::string>();
  auto record = std::make_shared<std::string>();
  auto fields = std::make_shared<std::vector<std::string>>();
  auto theta = std::make_shared<double>(0.0), scale = std::make_shared<double>(0.0);
  auto seed = std::make_shared<std::uint64_t>(0);
  cmd->add_option("graph", *graph, "Graph file")->required();
  cmd->add_option("--op", *op, "reflect, rotate or distort")->required();
  cmd->add_option("--field", *fields, "Input field(s)")->required();
  cmd->add_option("--theta", *theta, "Rotation angle (radians)");
  cmd->add_option("--scale", *scale, "Distortion scale");
  cmd->add_option("--seed", *seed, "Seed");
  cmd->add_option("-o,--out", *out, "Output field (rotate: first of the pair)")->required();
  cmd->add_option("--out2", *out2, "Second rotated field (CSV triplets)");
  cmd->add_option("--record", *record, "Augmentation record JSON");
  cmd->callback([=, &action] {
    action = [=] {
      const auto g = read_graph(*graph);
      std::vector<VectorField> in;
      for (const auto& f : *fields) in.push_back(read_field(f, g));
      AugmentationRecord rec;
      rec.op = *op;
      rec.generator = std::string(SeededGenerator::kAlgorithm);
      for (const auto& f : in) rec.inputs.push_back(field_hash(f));
      const auto triplets = [](const SparseRealMatrix& m) {
        std::string s = "row,col,value\n";
        for (Index i = 0; i < m.outerSize(); ++i) {
          for (SparseRealMatrix::InnerIterator it(m, i); it; ++it) {
            s += std::to_string(it.row()) + "," + std::to_string(it.col()) + "," + format_double(it.value()) + "\n";
          }
        }
        return s;
      };
      if (*op == "reflect" || *op == "distort") {
        if (in.size() != 1) throw ValidationError("augment: " + *op + " takes one field");
        rec.parameter = *scale;
        rec.seed = *seed;
        const VectorField f = *op == "reflect" ? reflect(in[0]) : distort(in[0], *seed, *scale);
        rec.outputs.push_back(field_hash(f));
        write_field(*out, f);
      } else if (*op == "rotate") {
        if (in.size() != 2) throw ValidationError("augment: rotate takes two fields");
        rec.parameter = *theta;
        const RotatedPair r = rotate(build_plane(in[0], in[1]), *theta);
        rec.outputs = {matrix_hash(r.f1), matrix_hash(r.f2)};
        write_file_atomic(*out, triplets(r.f1));
        if (!out2->empty()) write_file_atomic(*out2, triplets(r.f2));
      } else {
        throw ValidationError("augment: unknown op '" + *op + "'");
      }
      if (!record->empty()) write_json_file(*record, augmentation_record_to_json(rec));
    };
  });
}

void add_diffusion(CLI::App& app, Context& ctx, std::function<void()>& action) {
  auto* cmd = app.add_subcommand("diffusion", "Heat kernels, diffusion distance, gradient-step certification");
  auto graph = std::make_shared<std::string>(), out = std::make_shared<std::string>();
  auto method = std::make_shared<std::string>("eigen");
  auto t = std::make_shared<double>(1.0);
  auto x = std::make_shared<Index>(-1), y = std::make_shared<Index>(-1), steps = std::make_shared<Index>(-1);
  auto certify = std::make_shared<bool>(false);
  cmd->add_option("graph", *graph, "Graph file")->required();
  cmd->add_option("-t,--time", *t, "Diffusion time");
  cmd->add_option("--x", *x, "First node");
  cmd->add_option("--y", *y, "Second node");
  cmd->add_option("--steps", *steps, "Discrete kernel (D^-1 A)^k instead of the continuous one");
  cmd->add_option("--method", *method, "series or eigen");
  cmd->add_flag("--certify", *certify, "Check the gradient-step distance reduction on every pair");
  cmd->add_option("-o,--out", *out, "Output JSON (kernel CSV when neither --x/--y nor --certify)")->required();
  cmd->callback([=, &ctx, &action] {
    action = [=, &ctx] {
      const auto g = read_graph(*graph);
      if (*certify) {
        const GradientStepReport rep = certify_gradient_steps(*g, {}, fs::path(*graph).stem().string());
        write_json_file(*out, gradient_step_report_to_json(rep));
        ctx.out << (rep.failures == 0 ? "pass" : "FAIL") << ": " << rep.pairs_checked << " pairs checked, "
                << rep.failures << " failures\n";
        if (rep.failures != 0) throw NumericalError("distance reduction failed on " + std::to_string(rep.failures) + " pairs");
        return;
      }
      if (*x >= 0 || *y >= 0) {
        const DiffusionModel model(*g);
        const DiffusionDistance d = model.distance(*t, *x, *y);
        json j = {{"t", *t},
                  {"x", *x},
                  {"y", *y},
                  {"distance", d.value},
                  {"spectral", d.spectral},
                  {"unweighted", d.unweighted},
                  {"cross_component", d.cross_component}};
        if (model.connected() && g->node_count() > 1 && g->degree(*x) > 0) {
          const Index xp = gradient_step(*g, model.psi().col(1), *x);
          const ReductionConstant c = reduction_constant(model, *x, xp, *y);
          j["x_prime"] = xp;
          j["hypothesis_holds"] = c.hypothesis_holds;
          if (!c.hypothesis_holds) j["reason"] = c.reason;
          // -inf (holds for every t) has no JSON number.
          j["C"] = std::isfinite(c.value) ? json(c.value) : json(nullptr);
          j["samples"] = json::array({{{"t", *t}, {"d_xy", d.value}, {"d_xpy", model.distance(*t, xp, *y).value}}});
        }
        write_json_file(*out, j);
        return;
      }
      HeatKernel k;
      if (*steps >= 0) {
        k = discrete_heat_kernel(*g, *steps);
      } else if (*method == "series" || *method == "eigen") {
        k = continuous_heat_kernel(*g, *t, *method == "series" ? HeatMethod::series : HeatMethod::eigen);
      } else {
        throw ValidationError("diffusion: unknown method '" + *method + "'");
      }
      std::string csv = "row,col,value\n";
      for (Index i = 0; i < k.matrix.rows(); ++i) {
        for (Index j = 0; j < k.matrix.cols(); ++j) {
          csv += std::to_string(i) + "," + std::to_string(j) + "," + format_double(k.matrix(i, j)) + "\n";
        }
      }
      write_file_atomic(*out, csv);
    };
  });
}

void add_wl(CLI::App& app, Context& ctx, std::function<void()>& action) {
  auto* cmd = app.add_subcommand("wl-check", "1-WL test and DGN separation on a graph pair");
  auto graphs = std::make_shared<std::vector<std::string>>();
  auto report = std::make_shared<std::string>();
  auto seed = std::make_shared<std::uint64_t>(0);
  cmd->add_option("graphs", *graphs, "Two graph files (default: the decalin / bicyclopentyl fixture)")->expected(0, 2);
  cmd->add_option("--seed", *seed, "Seed of the random layer weights");
  cmd->add_option("--report", *report, "Report JSON");
  cmd->callback([=, &ctx, &action] {
    action = [=, &ctx] {
      Graph a, b;
      if (graphs->empty()) {
        a = decalin_graph();
        b = bicyclopentyl_graph();
      } else if (graphs->size() == 2) {
        a = load_graph((*graphs)[0]).graph;
        b = load_graph((*graphs)[1]).graph;
      } else {
        throw ValidationError("wl-check: give two graphs or none");
      }
      const SeparationReport r = dgn_separation_check(a, b, *seed);
      if (!report->empty()) write_json_file(*report, separation_report_to_json(r));
      ctx.out << "1-WL: " << (r.wl_distinguishable ? "distinguishable" : "indistinguishable") << "\n"
              << "DGN gap: " << format_double(r.gap) << "\n"
              << "verdict: " << r.verdict << "\n";
    };
  });
}

void add_verify(CLI::App& app, Context& ctx, std::function<void()>& action) {
  auto* cmd = app.add_subcommand("verify", "Run verification suites");
  auto suite = std::make_shared<std::string>("all"), graphs = std::make_shared<std::string>();
  auto dims = std::make_shared<std::string>("9x5"), report = std::make_shared<std::string>();
  auto radius = std::make_shared<int>(2);
  auto jobs = std::make_shared<unsigned>(1);
  auto seed = std::make_shared<std::uint64_t>(0);
  std::string names;
  for (const auto& n : suite_names()) names += (names.empty() ? "" : ", ") + n;
  cmd->add_option("--suite", *suite, names);
  cmd->add_option("--graphs", *graphs, "Corpus directory for the theorem3 suite");
  cmd->add_option("--dims", *dims, "Lattice for grid-kernel, e.g. 9x5");
  cmd->add_option("--radius", *radius, "Stencil radius for grid-kernel");
  cmd->add_option("--jobs", *jobs, "Worker cap for the corpus sweep");
  cmd->add_option("--seed", *seed, "Seed");
  cmd->add_option("--report", *report, "Report JSON");
  cmd->callback([=, &ctx, &action] {
    action = [=, &ctx] {
      SuiteOptions o;
      if (!graphs->empty()) o.graphs = *graphs;
      o.dims = parse_dims(*dims);
      o.radius = *radius;
      o.jobs = std::max(1u, *jobs);
      o.seed = *seed;
      const auto results = run_suite(*suite, o);
      json rep = {{"schema_version", kSchemaVersion}, {"suites", json::object()}};
      bool all = true;
      for (const auto& r : results) {
        ctx.out << (r.passed ? "pass" : "FAIL") << "  " << r.name << "\n";
        for (const auto& c : r.report.at("checks")) {
          ctx.out << "      " << (c.at("passed").get<bool>() ? "pass" : "FAIL") << "  " << c.at("name").get<std::string>()
                  << "\n";
        }
        rep["suites"][r.name] = r.report;
        all = all && r.passed;
      }
      rep["passed"] = all;
      if (!report->empty()) write_json_file(*report, rep);
      if (!all) throw NumericalError("verification failed");
    };
  });
}

void add_pipeline_like(CLI::App* cmd, Context& ctx, std::function<void()>& action) {
  auto graph = std::make_shared<std::string>(), config = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  auto seed = std::make_shared<std::uint64_t>(0);
  auto k = std::make_shared<Index>(0);
  auto eps = std::make_shared<double>(0.0), tol = std::make_shared<double>(-1.0);
  auto kind = std::make_shared<std::string>();
  auto* seed_opt = cmd->add_option("--seed", *seed, "Override the config seed");
  auto* k_opt = cmd->add_option("-k", *k, "Override the number of eigenvector fields");
  auto* eps_opt = cmd->add_option("--eps", *eps, "Override epsilon");
  auto* tol_opt = cmd->add_option("--tol", *tol, "Override the eigen tolerance");
  auto* kind_opt = cmd->add_option("--kind", *kind, "Override the Laplacian kind");
  cmd->add_option("graph", *graph, "Graph file")->required();
  cmd->add_option("--config", *config, "Pipeline config JSON")->required();
  cmd->add_option("-o,--out", *out, "Run directory")->required();
  cmd->callback([=, &ctx, &action] {
    action = [=, &ctx] {
      const auto g = read_graph(*graph);
      json j = read_json_file(*config);
      if (seed_opt->count()) j["seed"] = *seed;
      if (k_opt->count()) j["k"] = *k;
      if (eps_opt->count()) j["eps"] = *eps;
      if (tol_opt->count()) j["tol"] = *tol;
      if (kind_opt->count()) j["laplacian"] = *kind;
      const PipelineConfig c = config_from_json(j, g, fs::path(*config).parent_path());
      PipelineResult r = run(g, c);
      export_run(r, c, *out);
      for (const auto& w : r.manifest.multiplicity_warnings) ctx.err << "warning: " << w << "\n";
      ctx.out << "exported " << r.manifest.artifacts.size() << " artifacts to " << *out << "\n";
    };
  });
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Directional graph network toolkit", "dgn"};
  app.require_subcommand(1);
  Context ctx{out, err};
  std::function<void()> action;
  add_gen(app, ctx, action);
  add_eig(app, ctx, action);
  add_field(app, ctx, action);
  add_aggregate(app, ctx, action);
  add_forward(app, ctx, action);
  add_augment(app, ctx, action);
  add_diffusion(app, ctx, action);
  add_wl(app, ctx, action);
  add_verify(app, ctx, action);
  add_pipeline_like(app.add_subcommand("export", "Run the pipeline and export every artifact"), ctx, action);
  auto* pipeline = app.add_subcommand("pipeline", "Pipeline commands");
  pipeline->require_subcommand(1);
  add_pipeline_like(pipeline->add_subcommand("run", "Run the pipeline and export every artifact"), ctx, action);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }
  try {
    if (action) action();
    return 0;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed JSON: " << e.what() << "\n";
    return 1;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace dgn::cli
