#include "dgn/netcheck.hpp"

#include "dgn/random.hpp"
#include "dgn/spectral.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

namespace dgn {

DegreeDelta delta_from_degrees(std::span<const double> degrees) {
  if (degrees.empty()) throw ValidationError("delta_from_degrees: empty degree list");
  double total = 0.0;
  for (const double d : degrees) {
    if (!(d >= 0)) throw ValidationError("delta_from_degrees: negative degree");
    total += std::log(d + 1.0);
  }
  DegreeDelta out;
  out.delta = total / static_cast<double>(degrees.size());
  out.degenerate = out.delta == 0.0;
  return out;
}

double scaler(double degree, double alpha, double delta) {
  if (!(delta > 0)) throw ValidationError("scaler: delta must be positive");
  if (!(degree >= 0)) throw ValidationError("scaler: negative degree");
  if (alpha == 0.0) return 1.0;
  const double ratio = std::log(degree + 1.0) / delta;
  // Isolated nodes receive no messages; keep their scaled output finite.
  if (ratio == 0.0) return 0.0;
  return std::pow(ratio, alpha);
}

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::tanh: return "tanh";
    case Activation::relu: return "relu";
  }
  return "identity";
}

Activation parse_activation(std::string_view name) {
  if (name == "identity") return Activation::identity;
  if (name == "tanh") return Activation::tanh;
  if (name == "relu") return Activation::relu;
  throw ValidationError("unknown activation '" + std::string(name) + "'");
}

Index Mlp::input_dim() const { return layers.empty() ? -1 : layers.front().weight.rows(); }
Index Mlp::output_dim() const { return layers.empty() ? -1 : layers.back().weight.cols(); }

Eigen::MatrixXd Mlp::operator()(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd h = x;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    if (h.cols() != layer.weight.rows()) {
      throw ValidationError("mlp layer " + std::to_string(l) + ": input width " + std::to_string(h.cols()) +
                            " != weight rows " + std::to_string(layer.weight.rows()));
    }
    Eigen::MatrixXd z = h * layer.weight;
    if (layer.bias.size() > 0) {
      if (layer.bias.size() != z.cols()) throw ValidationError("mlp layer " + std::to_string(l) + ": bias size mismatch");
      z.rowwise() += layer.bias.transpose();
    }
    switch (layer.activation) {
      case Activation::identity: break;
      case Activation::tanh: z = z.array().tanh().matrix(); break;
      case Activation::relu: z = z.cwiseMax(0.0); break;
    }
    h = std::move(z);
  }
  return h;
}

Mlp Mlp::seeded(std::span<const Index> widths, Activation hidden, Activation last, std::uint64_t seed) {
  if (widths.size() < 2) throw ValidationError("mlp needs at least input and output widths");
  SeededGenerator rng(seed);
  Mlp m;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    DenseLayer layer;
    layer.weight.resize(widths[l], widths[l + 1]);
    const double s = 1.0 / std::sqrt(static_cast<double>(widths[l]));
    for (Index i = 0; i < layer.weight.rows(); ++i) {
      for (Index j = 0; j < layer.weight.cols(); ++j) layer.weight(i, j) = s * rng.normal();
    }
    layer.bias.resize(widths[l + 1]);
    for (Index j = 0; j < layer.bias.size(); ++j) layer.bias[j] = 0.1 * rng.normal();
    layer.activation = l + 2 == widths.size() ? last : hidden;
    m.layers.push_back(std::move(layer));
  }
  return m;
}

AggregatorSpec AggregatorSpec::base(BaselineAggregator b) {
  AggregatorSpec s;
  s.baseline = b;
  return s;
}

AggregatorSpec AggregatorSpec::dir(AggregatorKind kind, Index field) {
  AggregatorSpec s;
  s.directional = true;
  s.kind = kind;
  s.field = field;
  return s;
}

std::string AggregatorSpec::name() const {
  if (!directional) {
    switch (baseline) {
      case BaselineAggregator::mean: return "mean";
      case BaselineAggregator::sum: return "sum";
      case BaselineAggregator::max: return "max";
      case BaselineAggregator::min: return "min";
    }
  }
  std::string out = std::string(to_string(kind)) + std::to_string(field + 1);
  if (transform.kind != FieldTransformKind::identity) out += ":" + std::string(to_string(transform.kind));
  return out;
}

AggregatorSpec parse_aggregator_spec(std::string_view text) {
  if (text == "mean") return AggregatorSpec::base(BaselineAggregator::mean);
  if (text == "sum") return AggregatorSpec::base(BaselineAggregator::sum);
  if (text == "max") return AggregatorSpec::base(BaselineAggregator::max);
  if (text == "min") return AggregatorSpec::base(BaselineAggregator::min);
  std::string_view head = text, tail;
  if (const auto colon = text.find(':'); colon != std::string_view::npos) {
    head = text.substr(0, colon);
    tail = text.substr(colon + 1);
  }
  std::size_t digits = head.size();
  while (digits > 0 && std::isdigit(static_cast<unsigned char>(head[digits - 1]))) --digits;
  if (digits == head.size() || digits == 0) {
    throw ValidationError("aggregator '" + std::string(text) + "' needs a 1-based field index, e.g. dx1");
  }
  const Index index = std::stoll(std::string(head.substr(digits)));
  if (index < 1) throw ValidationError("aggregator field index is 1-based");
  AggregatorSpec s = AggregatorSpec::dir(parse_aggregator_kind(head.substr(0, digits)), index - 1);
  if (!tail.empty()) s.transform.kind = parse_field_transform_kind(tail);
  return s;
}

std::string_view to_string(Architecture a) {
  switch (a) {
    case Architecture::simple: return "simple";
    case Architecture::complex: return "complex";
    case Architecture::complex_with_edges: return "complex_with_edges";
  }
  return "simple";
}

Architecture parse_architecture(std::string_view name) {
  if (name == "simple") return Architecture::simple;
  if (name == "complex") return Architecture::complex;
  if (name == "complex_with_edges") return Architecture::complex_with_edges;
  throw ValidationError("unknown architecture '" + std::string(name) + "'");
}

namespace {

SparseRealMatrix directional_matrix(const Graph& g, const AggregatorSpec& a, const LayerSpec& spec,
                                    std::span<const VectorField> fields) {
  if (a.field < 0 || a.field >= static_cast<Index>(fields.size())) {
    throw ValidationError("aggregator " + a.name() + " refers to field " + std::to_string(a.field + 1) + " but " +
                          std::to_string(fields.size()) + " fields were given");
  }
  if (!fields[a.field].graph().same_structure(g)) throw ValidationError("aggregator field lives on another graph");
  const SparseRealMatrix f = transform_field(fields[a.field].values(), a.transform);
  return build_aggregator(g, f, a.kind, spec.epsilon).matrix;
}

// Rows j of `values` reduced over the neighbors of each node.
Eigen::MatrixXd baseline(const Graph& g, BaselineAggregator b, const Eigen::MatrixXd& values) {
  const Index n = g.node_count();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, values.cols());
  for (Index i = 0; i < n; ++i) {
    const auto nb = g.neighbors(i);
    if (nb.empty()) continue;
    Eigen::RowVectorXd acc = values.row(nb.front());
    for (std::size_t k = 1; k < nb.size(); ++k) {
      switch (b) {
        case BaselineAggregator::mean:
        case BaselineAggregator::sum: acc += values.row(nb[k]); break;
        case BaselineAggregator::max: acc = acc.cwiseMax(values.row(nb[k])); break;
        case BaselineAggregator::min: acc = acc.cwiseMin(values.row(nb[k])); break;
      }
    }
    if (b == BaselineAggregator::mean) acc /= static_cast<double>(nb.size());
    out.row(i) = acc;
  }
  return out;
}

Eigen::MatrixXd scale_and_concat(const Graph& g, const LayerSpec& spec, const std::vector<Eigen::MatrixXd>& blocks,
                                 Index leading_cols, const Eigen::MatrixXd* leading) {
  const Index n = g.node_count();
  Index width = leading_cols;
  for (const auto& b : blocks) width += b.cols() * spec.scaler_copies();
  Eigen::MatrixXd out(n, width);
  if (leading) out.leftCols(leading_cols) = *leading;
  Index col = leading_cols;
  for (const auto& b : blocks) {
    if (spec.scalers.empty()) {
      out.middleCols(col, b.cols()) = b;
      col += b.cols();
      continue;
    }
    for (const double alpha : spec.scalers) {
      Eigen::VectorXd s(n);
      for (Index i = 0; i < n; ++i) s[i] = scaler(static_cast<double>(g.degree(i)), alpha, spec.delta);
      out.middleCols(col, b.cols()) = s.asDiagonal() * b;
      col += b.cols();
    }
  }
  return out;
}

LayerOutput finish(const LayerSpec& spec, Eigen::MatrixXd pre) {
  LayerOutput out;
  if (!spec.update.layers.empty() && spec.update.input_dim() != pre.cols()) {
    throw ValidationError("update MLP expects width " + std::to_string(spec.update.input_dim()) + ", layer produces " +
                          std::to_string(pre.cols()));
  }
  out.output = spec.update.layers.empty() ? pre : spec.update(pre);
  out.pre_update = std::move(pre);
  return out;
}

}  // namespace

LayerOutput forward_simple(const Graph& g, const Eigen::MatrixXd& x, const LayerSpec& spec,
                           std::span<const VectorField> fields) {
  if (x.rows() != g.node_count()) throw ValidationError("forward: feature rows != node count");
  if (spec.aggregators.empty()) throw ValidationError("forward: no aggregators configured");
  std::vector<Eigen::MatrixXd> blocks;
  for (const auto& a : spec.aggregators) {
    if (!a.directional) {
      blocks.push_back(baseline(g, a.baseline, x));
      continue;
    }
    Eigen::MatrixXd y = directional_matrix(g, a, spec, fields) * x;
    if (spec.abs_dx && is_derivative_kind(a.kind)) y = y.cwiseAbs();
    blocks.push_back(std::move(y));
  }
  return finish(spec, scale_and_concat(g, spec, blocks, 0, nullptr));
}

LayerOutput forward_complex(const Graph& g, const Eigen::MatrixXd& x, const LayerSpec& spec,
                            std::span<const VectorField> fields) {
  const Index n = g.node_count();
  const Index d = x.cols();
  if (x.rows() != n) throw ValidationError("forward: feature rows != node count");
  if (spec.aggregators.empty()) throw ValidationError("forward: no aggregators configured");
  if (spec.architecture == Architecture::simple) throw ValidationError("forward_complex: architecture is simple");
  const Eigen::MatrixXd& w = spec.message_weight;
  const Index de = w.rows() - 2 * d;
  if (de < 0 || (spec.architecture == Architecture::complex && de != 0)) {
    throw ValidationError("message weight has " + std::to_string(w.rows()) + " rows, expected " +
                          std::to_string(2 * d) + (spec.architecture == Architecture::complex ? "" : " + edge width"));
  }
  const Index dm = w.cols();
  if (spec.message_bias.size() != 0 && spec.message_bias.size() != dm) throw ValidationError("message bias size mismatch");
  Eigen::RowVectorXd bias = Eigen::RowVectorXd::Zero(dm);
  if (spec.message_bias.size() == dm) bias = spec.message_bias.transpose();

  const Eigen::MatrixXd from_i = x * w.topRows(d);
  const Eigen::MatrixXd from_j = x * w.middleRows(d, d);
  const auto message = [&](Index i, Index j) -> Eigen::RowVectorXd {
    Eigen::RowVectorXd m = from_i.row(i) + from_j.row(j) + bias;
    if (de > 0) {
      const Eigen::VectorXd* e = g.edge_feature(i, j);
      if (!e || e->size() != de) {
        throw ValidationError("edge (" + std::to_string(std::min(i, j)) + "," + std::to_string(std::max(i, j)) +
                              ") is missing a feature vector of width " + std::to_string(de));
      }
      m += e->transpose() * w.bottomRows(de);
    }
    return m;
  };
  // Message j -> i for every directed edge, in CSR order.
  std::vector<Eigen::RowVectorXd> messages;
  std::vector<Index> offsets{0};
  for (Index i = 0; i < n; ++i) {
    for (const Index j : g.neighbors(i)) messages.push_back(message(i, j));
    offsets.push_back(static_cast<Index>(messages.size()));
  }

  std::vector<Eigen::MatrixXd> blocks;
  for (const auto& a : spec.aggregators) {
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(n, dm);
    if (!a.directional) {
      for (Index i = 0; i < n; ++i) {
        const Index lo = offsets[i], hi = offsets[i + 1];
        if (lo == hi) continue;
        Eigen::RowVectorXd acc = messages[lo];
        for (Index k = lo + 1; k < hi; ++k) {
          switch (a.baseline) {
            case BaselineAggregator::mean:
            case BaselineAggregator::sum: acc += messages[k]; break;
            case BaselineAggregator::max: acc = acc.cwiseMax(messages[k]); break;
            case BaselineAggregator::min: acc = acc.cwiseMin(messages[k]); break;
          }
        }
        if (a.baseline == BaselineAggregator::mean) acc /= static_cast<double>(hi - lo);
        y.row(i) = acc;
      }
    } else {
      const SparseRealMatrix b = directional_matrix(g, a, spec, fields);
      for (Index i = 0; i < n; ++i) {
        const auto nb = g.neighbors(i);
        for (SparseRealMatrix::InnerIterator it(b, i); it; ++it) {
          const Index j = it.col();
          if (j == i) {
            y.row(i) += it.value() * (from_i.row(i) + from_j.row(i) + bias);
          } else {
            const auto pos = std::lower_bound(nb.begin(), nb.end(), j) - nb.begin();
            y.row(i) += it.value() * messages[offsets[i] + pos];
          }
        }
      }
      if (spec.abs_dx && is_derivative_kind(a.kind)) y = y.cwiseAbs();
    }
    blocks.push_back(std::move(y));
  }
  return finish(spec, scale_and_concat(g, spec, blocks, d, &x));
}

WLColoring wl1_refine(const Graph& g, std::span<const Index> initial) {
  const Index n = g.node_count();
  if (!initial.empty() && static_cast<Index>(initial.size()) != n) throw ValidationError("wl: initial colors length mismatch");
  WLColoring out;
  // Canonical relabeling of the initial colors.
  {
    std::vector<Index> init(initial.begin(), initial.end());
    if (init.empty()) init.assign(static_cast<std::size_t>(n), 0);
    std::vector<Index> distinct = init;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    out.colors.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
      out.colors[i] = std::lower_bound(distinct.begin(), distinct.end(), init[i]) - distinct.begin();
    }
  }
  auto count_classes = [](const std::vector<Index>& c) {
    return c.empty() ? Index(0) : *std::max_element(c.begin(), c.end()) + 1;
  };
  Index classes = count_classes(out.colors);
  using Signature = std::pair<Index, std::vector<Index>>;
  while (out.rounds < std::max<Index>(n, 1)) {
    std::vector<Signature> sigs(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
      sigs[i].first = out.colors[i];
      for (const Index j : g.neighbors(i)) sigs[i].second.push_back(out.colors[j]);
      std::sort(sigs[i].second.begin(), sigs[i].second.end());
    }
    std::vector<Signature> distinct = sigs;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    std::vector<Index> next(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) next[i] = std::lower_bound(distinct.begin(), distinct.end(), sigs[i]) - distinct.begin();
    ++out.rounds;
    const Index next_classes = count_classes(next);
    out.colors = std::move(next);
    if (next_classes == classes) {
      out.stable = true;
      break;
    }
    classes = next_classes;
  }
  return out;
}

bool wl1_distinguishable(const Graph& a, const Graph& b) {
  if (a.node_count() != b.node_count() || a.edge_count() != b.edge_count()) return true;
  const WLColoring c = wl1_refine(disjoint_union(a, b));
  std::map<Index, Index> ha, hb;
  for (Index i = 0; i < a.node_count(); ++i) ++ha[c.colors[i]];
  for (Index i = 0; i < b.node_count(); ++i) ++hb[c.colors[a.node_count() + i]];
  return ha != hb;
}

namespace {

struct FiedlerField {
  VectorField field;
  double lambda1;
};

FiedlerField fiedler_field(const Graph& g) {
  EigenOptions opt;
  opt.kind = LaplacianKind::combinatorial;
  opt.k = 2;
  const auto bases = component_eigen_bases(g, opt);
  const Eigen::VectorXd phi = assemble_component_vector(bases, 1);
  double lambda1 = 0.0;
  if (!bases.empty() && bases.front().size() > 1) lambda1 = bases.front().eigenvalues[1];
  return {gradient(std::make_shared<const Graph>(g), phi), lambda1};
}

Eigen::VectorXd dgn_readout(const Graph& g, const VectorField& field, double delta, std::uint64_t seed) {
  const Index hidden = 8;
  LayerSpec spec;
  spec.aggregators = {AggregatorSpec::base(BaselineAggregator::mean), AggregatorSpec::dir(AggregatorKind::dx, 0),
                      AggregatorSpec::dir(AggregatorKind::av, 0)};
  spec.scalers = {-1.0, 0.0, 1.0};
  spec.delta = delta;
  spec.abs_dx = true;
  const std::vector<VectorField> fields{field};
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(g.node_count(), 1);
  for (int layer = 0; layer < 2; ++layer) {
    const Index in = 3 * 3 * x.cols();
    const std::vector<Index> widths{in, hidden};
    spec.update = Mlp::seeded(widths, Activation::tanh, Activation::tanh, derive_seed(seed, "layer" + std::to_string(layer)));
    x = forward_simple(g, x, spec, fields).output;
  }
  return x.colwise().sum().transpose();
}

}  // namespace

SeparationReport dgn_separation_check(const Graph& a, const Graph& b, std::uint64_t seed) {
  if (a.node_count() != b.node_count()) throw ValidationError("separation check needs graphs of equal size");
  SeparationReport r;
  r.wl_distinguishable = wl1_distinguishable(a, b);
  const FiedlerField fa = fiedler_field(a), fb = fiedler_field(b);
  r.lambda1_a = fa.lambda1;
  r.lambda1_b = fb.lambda1;
  std::vector<double> degrees;
  for (const Graph* g : {&a, &b}) {
    for (Index i = 0; i < g->node_count(); ++i) degrees.push_back(static_cast<double>(g->degree(i)));
  }
  const DegreeDelta delta = delta_from_degrees(degrees);
  if (delta.degenerate) throw ValidationError("separation check: graphs have no edges");
  r.readout_a = dgn_readout(a, fa.field, delta.delta, seed);
  r.readout_b = dgn_readout(b, fb.field, delta.delta, seed);
  r.gap = (r.readout_a - r.readout_b).cwiseAbs().maxCoeff();
  if (r.wl_distinguishable) {
    r.verdict = "1-WL already separates";
  } else {
    r.separated = r.gap > 1e-6;
    r.verdict = r.separated ? "separated by DGN, indistinguishable by 1-WL" : "not separated";
  }
  return r;
}

Graph decalin_graph() {
  return build_graph(10, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 9}, {9, 0}, {4, 5}, {5, 6}, {6, 7}, {7, 8}, {8, 9}});
}

Graph bicyclopentyl_graph() {
  return build_graph(10, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}, {5, 6}, {6, 7}, {7, 8}, {8, 9}, {9, 5}, {0, 5}});
}

}  // namespace dgn
