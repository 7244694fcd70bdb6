#include "dgn/verify.hpp"

#include "dgn/aggregate.hpp"
#include "dgn/augment.hpp"
#include "dgn/diffusion.hpp"
#include "dgn/graph_io.hpp"
#include "dgn/grid_kernel.hpp"
#include "dgn/netcheck.hpp"
#include "dgn/random.hpp"
#include "dgn/serialize.hpp"
#include "dgn/spectral.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <numbers>
#include <numeric>
#include <thread>

namespace dgn {

namespace {

using nlohmann::json;

struct Checks {
  json items = json::array();
  bool ok = true;

  void add(const std::string& name, bool passed, json detail = json::object()) {
    detail["name"] = name;
    detail["passed"] = passed;
    items.push_back(std::move(detail));
    ok = ok && passed;
  }
};

double max_abs(const Eigen::MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

Eigen::VectorXd uniform_vector(SeededGenerator& rng, Index n) {
  Eigen::VectorXd v(n);
  for (Index i = 0; i < n; ++i) v[i] = rng.uniform(-1.0, 1.0);
  return v;
}

VectorField random_field(std::shared_ptr<const Graph> g, SeededGenerator& rng) {
  // About one edge in eight carries a zero so sparse rows get exercised.
  return VectorField::from_edges(std::move(g), [&](Index, Index) {
    return rng.below(8) == 0 ? 0.0 : rng.uniform(-2.0, 2.0);
  });
}

json path_spectra(const SuiteOptions&) {
  Checks c;
  double worst_val = 0.0, worst_vec = 0.0;
  for (Index n = 3; n <= 12; ++n) {
    const Graph g = gen_path(n);
    EigenOptions opt;
    opt.k = n;
    const EigenBasis b = eigen_lowest(g, opt);
    for (Index k = 0; k < n; ++k) {
      const double expected = 2.0 - 2.0 * std::cos(std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
      worst_val = std::max(worst_val, std::abs(b.eigenvalues[k] - expected));
      Eigen::VectorXd v(n);
      for (Index i = 0; i < n; ++i) {
        v[i] = std::cos(std::numbers::pi * static_cast<double>(k) * (static_cast<double>(i) + 0.5) / static_cast<double>(n));
      }
      v.normalize();
      canonicalize_sign(v);
      worst_vec = std::max(worst_vec, (b.eigenvectors.col(k) - v).cwiseAbs().maxCoeff());
    }
  }
  c.add("eigenvalues", worst_val < 1e-8, {{"max_error", worst_val}, {"tol", 1e-8}});
  c.add("eigenvectors", worst_vec < 1e-8, {{"max_error", worst_vec}, {"tol", 1e-8}});
  return {{"checks", c.items}, {"passed", c.ok}};
}

json lattice_spectra(const SuiteOptions&) {
  const std::vector<std::vector<Index>> shapes{{2, 2}, {2, 3},    {3, 3},    {3, 4},    {4, 5},    {5, 6},
                                               {6, 10}, {7, 8},    {2, 30},   {2, 2, 2}, {2, 3, 4}, {3, 4, 5},
                                               {2, 2, 3, 5}, {60}};
  Checks c;
  json per = json::array();
  double worst = 0.0;
  for (const auto& dims : shapes) {
    const Graph g = gen_lattice(dims);
    const Index n = g.node_count();
    // Per-axis path eigenvalues, summed over every index combination.
    std::vector<double> sums{0.0};
    for (const Index d : dims) {
      std::vector<double> next;
      for (const double s : sums) {
        for (Index k = 0; k < d; ++k) {
          next.push_back(s + 2.0 - 2.0 * std::cos(std::numbers::pi * static_cast<double>(k) / static_cast<double>(d)));
        }
      }
      sums = std::move(next);
    }
    std::sort(sums.begin(), sums.end());
    const auto dense = dense_symmetric_eigen(laplacian(g, LaplacianKind::combinatorial));
    EigenOptions opt;
    opt.k = n;
    const EigenBasis b = eigen_lowest(g, opt);
    double err = 0.0;
    for (Index i = 0; i < n; ++i) {
      err = std::max(err, std::abs(sums[static_cast<std::size_t>(i)] - dense.values[i]));
      err = std::max(err, std::abs(sums[static_cast<std::size_t>(i)] - b.eigenvalues[i]));
    }
    worst = std::max(worst, err);
    std::string label;
    for (const Index d : dims) label += (label.empty() ? "" : "x") + std::to_string(d);
    per.push_back({{"dims", label}, {"nodes", n}, {"max_error", err}});
  }
  c.add("per_axis_sums", worst < 1e-8, {{"max_error", worst}, {"tol", 1e-8}, {"lattices", per}});
  return {{"checks", c.items}, {"passed", c.ok}};
}

json directional(const SuiteOptions& o) {
  Checks c;
  double worst_av = 0.0, worst_dx = 0.0;
  for (int s = 0; s < 100; ++s) {
    const std::uint64_t seed = derive_seed(o.seed, "directional/" + std::to_string(s));
    auto g = std::make_shared<const Graph>(random_graph(100, seed));
    SeededGenerator rng(derive_seed(seed, "field"));
    const VectorField f = random_field(g, rng);
    const Eigen::VectorXd x = uniform_vector(rng, g->node_count());
    const double eps = 1e-8;
    const Eigen::VectorXd av = apply(build_aggregator(f, AggregatorKind::av, eps), x);
    const Eigen::VectorXd dx = apply(build_aggregator(f, AggregatorKind::dx, eps), x);
    for (Index i = 0; i < g->node_count(); ++i) {
      double l1 = 0.0;
      for (const Index j : g->neighbors(i)) l1 += std::abs(f(i, j));
      double mean = 0.0, deriv = 0.0;
      for (const Index j : g->neighbors(i)) {
        mean += std::abs(f(i, j)) * x[j] / (l1 + eps);
        deriv += f(i, j) / (l1 + eps) * (x[j] - x[i]);
      }
      worst_av = std::max(worst_av, std::abs(av[i] - mean));
      worst_dx = std::max(worst_dx, std::abs(dx[i] - deriv));
    }
  }
  c.add("directional_average", worst_av < 1e-12, {{"max_error", worst_av}, {"tol", 1e-12}, {"graphs", 100}});
  c.add("directional_derivative", worst_dx < 1e-12, {{"max_error", worst_dx}, {"tol", 1e-12}, {"graphs", 100}});
  return {{"checks", c.items}, {"passed", c.ok}};
}

json recovery(const SuiteOptions& o) {
  Checks c;
  double worst_av = 0.0, worst_dx = 0.0;
  // The epsilon guard shrinks every row by eps / (d C); a tiny eps keeps that
  // far below the tolerance.
  const double eps = 1e-14;
  for (int s = 0; s < 100; ++s) {
    const std::uint64_t seed = derive_seed(o.seed, "directional/" + std::to_string(s));
    auto g = std::make_shared<const Graph>(random_graph(100, seed));
    SeededGenerator rng(derive_seed(seed, "recovery"));
    const double mag = rng.uniform(0.5, 2.0);
    const VectorField f = VectorField::from_edges(g, [&](Index, Index) { return rng.below(2) ? mag : -mag; });
    const Eigen::VectorXd x = uniform_vector(rng, g->node_count());
    const SparseRealMatrix a = adjacency(*g);
    const SparseRealMatrix ca = mag * a;
    const Eigen::VectorXd av = apply(build_aggregator(f, AggregatorKind::av, eps), x);
    const Eigen::VectorXd dx = apply(build_aggregator(*g, ca, AggregatorKind::dx, eps), x);
    const Eigen::VectorXd deg = degree_vector(*g);
    const Eigen::VectorXd ax = a * x;
    for (Index i = 0; i < g->node_count(); ++i) {
      const double mean = deg[i] > 0 ? ax[i] / deg[i] : 0.0;
      const double lap = deg[i] > 0 ? -(deg[i] * x[i] - ax[i]) / deg[i] : 0.0;
      worst_av = std::max(worst_av, std::abs(av[i] - mean));
      worst_dx = std::max(worst_dx, std::abs(dx[i] - lap));
    }
  }
  c.add("mean_recovery", worst_av < 1e-10, {{"max_error", worst_av}, {"tol", 1e-10}, {"epsilon", eps}});
  c.add("laplacian_recovery", worst_dx < 1e-10, {{"max_error", worst_dx}, {"tol", 1e-10}, {"epsilon", eps}});
  return {{"checks", c.items}, {"passed", c.ok}};
}

// y(u) = sum_o k(o) x(u + o) for interior u, by direct coordinate arithmetic.
double convolution_deviation(std::span<const Index> dims, const GridStencil& st, const GridKernelRealization& r,
                             const Eigen::VectorXd& x) {
  const Eigen::VectorXd y = r.matrix * x;
  double worst = 0.0;
  for (const Index u : r.interior_nodes) {
    const auto cu = lattice_coordinates(dims, u);
    double acc = 0.0;
    for (const auto& [off, w] : st.weights) {
      std::vector<Index> cv(cu);
      bool inside = true;
      for (std::size_t a = 0; a < dims.size(); ++a) {
        cv[a] += off[a];
        inside = inside && cv[a] >= 0 && cv[a] < dims[a];
      }
      if (inside) acc += w * x[lattice_index(dims, cv)];
    }
    worst = std::max(worst, std::abs(acc - y[u]));
  }
  return worst;
}

json grid_kernel(const SuiteOptions& o) {
  Checks c;
  const auto& dims = o.dims;
  if (o.radius < 1) throw ValidationError("grid-kernel: radius must be >= 1");
  Index n = 1;
  for (const Index d : dims) n *= d;
  SeededGenerator rng(derive_seed(o.seed, "grid-kernel/x"));
  const Eigen::VectorXd x = uniform_vector(rng, n);
  double worst1 = 0.0, worst_r = 0.0, worst_modes = 0.0;
  for (int s = 0; s < 20; ++s) {
    const GridStencil st = random_stencil(dims.size(), 1, derive_seed(o.seed, "grid-kernel/r1/" + std::to_string(s)));
    const auto r = realize_grid_kernel(dims, st);
    worst1 = std::max({worst1, r.max_interior_deviation, convolution_deviation(dims, st, r, x)});
  }
  c.add("radius1_stencils", worst1 < 1e-8, {{"count", 20}, {"max_deviation", worst1}, {"tol", 1e-8}});
  if (o.radius >= 2) {
    for (int s = 0; s < 5; ++s) {
      const GridStencil st =
          random_stencil(dims.size(), o.radius, derive_seed(o.seed, "grid-kernel/rR/" + std::to_string(s)));
      GridKernelOptions rev, full;
      full.mode = PermutationMode::full_perm;
      const auto a = realize_grid_kernel(dims, st, rev);
      const auto b = realize_grid_kernel(dims, st, full);
      worst_r = std::max({worst_r, a.max_interior_deviation, b.max_interior_deviation,
                          convolution_deviation(dims, st, a, x), convolution_deviation(dims, st, b, x)});
      const SparseRealMatrix diff = a.matrix - b.matrix;
      for (const Index u : a.interior_nodes) {
        for (SparseRealMatrix::InnerIterator it(diff, u); it; ++it) worst_modes = std::max(worst_modes, std::abs(it.value()));
      }
    }
    c.add("radius" + std::to_string(o.radius) + "_stencils", worst_r < 1e-8,
          {{"count", 5}, {"max_deviation", worst_r}, {"tol", 1e-8}});
    c.add("full_perm_vs_reverse_order", worst_modes < 1e-10, {{"max_difference", worst_modes}, {"tol", 1e-10}});
  }
  std::string label;
  for (const Index d : dims) label += (label.empty() ? "" : "x") + std::to_string(d);
  return {{"dims", label}, {"radius", o.radius}, {"checks", c.items}, {"passed", c.ok}};
}

json gradient_steps(const SuiteOptions& o) {
  const std::vector<NamedGraph> corpus = o.graphs ? load_corpus(*o.graphs) : diffusion_corpus();
  std::vector<GradientStepReport> reports(corpus.size());
  std::vector<std::string> errors(corpus.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < corpus.size(); i = next++) {
      try {
        reports[i] = certify_gradient_steps(corpus[i].graph, {}, corpus[i].name);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(o.jobs, static_cast<unsigned>(corpus.size())));
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  Checks c;
  json graphs = json::array();
  Index eligible = 0, failures = 0, checked = 0;
  double disagreement = 0.0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (!errors[i].empty()) {
      graphs.push_back({{"graph", corpus[i].name}, {"error", errors[i]}});
      ++failures;
      continue;
    }
    graphs.push_back(gradient_step_report_to_json(reports[i]));
    if (reports[i].eligible) ++eligible;
    failures += reports[i].failures;
    checked += reports[i].pairs_checked;
    disagreement = std::max(disagreement, reports[i].max_distance_disagreement);
  }
  c.add("distance_reduction", failures == 0, {{"pairs_checked", checked}, {"failures", failures}});
  c.add("spectral_agreement", disagreement < 1e-8, {{"max_disagreement", disagreement}, {"tol", 1e-8}});
  return {{"eligible_graphs", eligible}, {"graph_count", corpus.size()}, {"checks", c.items}, {"graphs", graphs},
          {"passed", c.ok}};
}

json wl(const SuiteOptions& o) {
  Checks c;
  const Graph a = decalin_graph(), b = bicyclopentyl_graph();
  const bool distinguishable = wl1_distinguishable(a, b);
  c.add("wl_indistinguishable", !distinguishable);
  double min_gap = std::numeric_limits<double>::infinity();
  json runs = json::array();
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto rep = dgn_separation_check(a, b, o.seed + s);
    min_gap = std::min(min_gap, rep.gap);
    runs.push_back(separation_report_to_json(rep));
  }
  c.add("dgn_separates", min_gap > 1e-6, {{"min_gap", min_gap}, {"tol", 1e-6}, {"runs", runs}});
  double max_iso = 0.0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    for (const Graph* g : {&a, &b}) {
      std::vector<Index> perm(static_cast<std::size_t>(g->node_count()));
      std::iota(perm.begin(), perm.end(), Index(0));
      SeededGenerator rng(derive_seed(o.seed + s, "wl/perm"));
      for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
      max_iso = std::max(max_iso, dgn_separation_check(*g, permute_nodes(*g, perm), o.seed + s).gap);
    }
  }
  c.add("isomorphic_relabeling", max_iso < 1e-8, {{"max_gap", max_iso}, {"tol", 1e-8}});
  return {{"checks", c.items}, {"passed", c.ok}};
}

json augment_suite(const SuiteOptions& o) {
  Checks c;
  double involution = 0.0, av_inv = 0.0, dx_flip = 0.0, rot0 = 0.0, round_trip = 0.0, distort0 = 0.0;
  for (int s = 0; s < 50; ++s) {
    const std::uint64_t seed = derive_seed(o.seed, "augment/" + std::to_string(s));
    // Redraw until some row spans a plane; degree-1 rows are always colinear.
    std::shared_ptr<const Graph> g;
    std::optional<VectorField> f1, f2;
    SeededGenerator rng(derive_seed(seed, "fields"));
    for (int attempt = 0;; ++attempt) {
      g = std::make_shared<const Graph>(random_graph(60, derive_seed(seed, "graph/" + std::to_string(attempt))));
      f1 = random_field(g, rng);
      f2 = random_field(g, rng);
      const auto& a = f1->values();
      const auto& b = f2->values();
      bool spans = false;
      for (Index i = 0; i < g->node_count() && !spans; ++i) {
        const double dot = a.row(i).dot(b.row(i)), na = a.row(i).norm(), nb = b.row(i).norm();
        spans = na > 0 && nb > 0 && std::abs(dot) < 0.999 * na * nb;
      }
      if (spans) break;
    }
    const VectorField r = reflect(*f1);
    involution = std::max(involution, max_abs(Eigen::MatrixXd(reflect(r).values() - f1->values())));
    const auto av = build_aggregator(*f1, AggregatorKind::av), avr = build_aggregator(r, AggregatorKind::av);
    const auto dx = build_aggregator(*f1, AggregatorKind::dx), dxr = build_aggregator(r, AggregatorKind::dx);
    av_inv = std::max(av_inv, max_abs(Eigen::MatrixXd(avr.matrix - av.matrix)));
    dx_flip = std::max(dx_flip, max_abs(Eigen::MatrixXd(dxr.matrix + dx.matrix)));
    const FieldPlane plane = build_plane(*f1, *f2);
    const RotatedPair zero = rotate(plane, 0.0);
    const SparseRealMatrix f2_hat = plane.f2_hat;
    rot0 = std::max({rot0, max_abs(Eigen::MatrixXd(zero.f1 - plane.f1_hat)), max_abs(Eigen::MatrixXd(zero.f2 - f2_hat))});
    const double theta = rng.uniform(-std::numbers::pi, std::numbers::pi);
    const RotatedPair turned = rotate(plane, theta);
    round_trip = std::max({round_trip,
                           max_abs(Eigen::MatrixXd(rotate_rows(plane, turned.f1, -theta) - plane.f1_hat)),
                           max_abs(Eigen::MatrixXd(rotate_rows(plane, turned.f2, -theta) - f2_hat))});
    distort0 = std::max(distort0, max_abs(Eigen::MatrixXd(distort(*f1, seed, 0.0).values() - f1->values())));
  }
  c.add("reflect_involution", involution == 0.0, {{"max_error", involution}});
  c.add("reflect_av_invariant", av_inv == 0.0, {{"max_error", av_inv}});
  c.add("reflect_dx_negated", dx_flip == 0.0, {{"max_error", dx_flip}});
  c.add("rotate_zero_identity", rot0 < 1e-12, {{"max_error", rot0}, {"tol", 1e-12}});
  c.add("rotate_round_trip", round_trip < 1e-10, {{"max_error", round_trip}, {"tol", 1e-10}});
  c.add("distort_zero_identity", distort0 == 0.0, {{"max_error", distort0}});
  return {{"field_pairs", 50}, {"checks", c.items}, {"passed", c.ok}};
}

json scalers(const SuiteOptions& o) {
  Checks c;
  bool unit = true;
  double product = 0.0, delta_err = 0.0;
  for (int s = 0; s < 20; ++s) {
    SeededGenerator rng(derive_seed(o.seed, "scalers/" + std::to_string(s)));
    const std::size_t len = 1 + rng.below(50);
    std::vector<double> deg(len);
    for (auto& d : deg) d = static_cast<double>(1 + rng.below(12));
    const DegreeDelta dd = delta_from_degrees(deg);
    double direct = 0.0;
    for (const double d : deg) direct += std::log(d + 1.0);
    direct /= static_cast<double>(len);
    delta_err = std::max(delta_err, std::abs(dd.delta - direct));
    for (const double d : deg) {
      unit = unit && scaler(d, 0.0, dd.delta) == 1.0;
      product = std::max(product, std::abs(scaler(d, -1.0, dd.delta) * scaler(d, 1.0, dd.delta) - 1.0));
    }
  }
  c.add("alpha_zero_is_one", unit);
  c.add("inverse_pair", product < 1e-12, {{"max_error", product}, {"tol", 1e-12}});
  c.add("delta_direct", delta_err < 1e-12, {{"max_error", delta_err}, {"tol", 1e-12}});
  return {{"degree_lists", 20}, {"checks", c.items}, {"passed", c.ok}};
}

using SuiteFn = json (*)(const SuiteOptions&);

const std::vector<std::pair<std::string, SuiteFn>>& registry() {
  static const std::vector<std::pair<std::string, SuiteFn>> r{
      {"path-spectra", path_spectra}, {"lattice-spectra", lattice_spectra}, {"directional", directional},
      {"recovery", recovery},         {"grid-kernel", grid_kernel},         {"theorem3", gradient_steps},
      {"wl", wl},                     {"augment", augment_suite},           {"scalers", scalers}};
  return r;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, fn] : registry()) out.push_back(name);
    out.push_back("all");
    return out;
  }();
  return names;
}

std::vector<SuiteResult> run_suite(const std::string& name, const SuiteOptions& options) {
  std::vector<SuiteResult> out;
  for (const auto& [suite, fn] : registry()) {
    if (name != "all" && name != suite) continue;
    const auto t0 = std::chrono::steady_clock::now();
    SuiteResult r;
    r.name = suite;
    r.report = fn(options);
    r.passed = r.report.at("passed").get<bool>();
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.push_back(std::move(r));
  }
  if (out.empty()) throw ValidationError("unknown suite '" + name + "'");
  return out;
}

std::vector<NamedGraph> diffusion_corpus() {
  std::vector<NamedGraph> out;
  for (Index n = 3; n <= 12; ++n) out.push_back({"path_" + std::to_string(n), gen_path(n)});
  const std::vector<std::vector<Index>> shapes{{2, 3}, {3, 4}, {4, 5}, {5, 6}, {3, 7}, {4, 9}, {6, 8}, {2, 3, 4}, {5, 11}};
  for (const auto& dims : shapes) {
    std::string label;
    for (const Index d : dims) label += (label.empty() ? "" : "x") + std::to_string(d);
    out.push_back({"lattice_" + label, gen_lattice(dims)});
  }
  for (int s = 0; s < 10; ++s) {
    const Index n = 8 + 5 * s;
    out.push_back({"tree_" + std::to_string(n) + "_s" + std::to_string(s), gen_random_tree(n, 1000 + static_cast<std::uint64_t>(s))});
  }
  for (int s = 0; s < 6; ++s) {
    const Index n1 = 6 + 4 * s, n2 = 5 + 3 * s;
    out.push_back({"community_" + std::to_string(n1) + "_" + std::to_string(n2) + "_s" + std::to_string(s),
                   gen_two_community(n1, n2, 0.3, 0.05, 2000 + static_cast<std::uint64_t>(s))});
  }
  return out;
}

std::vector<NamedGraph> load_corpus(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ValidationError("corpus: not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    const auto ext = e.path().extension();
    if (e.is_regular_file() && (ext == ".json" || ext == ".txt" || ext == ".edges")) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<NamedGraph> out;
  for (const auto& f : files) out.push_back({f.stem().string(), load_graph(f).graph});
  if (out.empty()) throw ValidationError("corpus: no graph files in " + dir.string());
  return out;
}

Graph random_graph(Index max_nodes, std::uint64_t seed) {
  SeededGenerator rng(seed);
  const Index n = 2 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(std::max<Index>(max_nodes - 1, 1))));
  const double p = rng.uniform(1.0, 4.0) / static_cast<double>(n);
  std::vector<std::pair<Index, Index>> edges;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      if (rng.uniform() < p) edges.emplace_back(i, j);
    }
  }
  return build_graph(n, edges);
}

}  // namespace dgn
