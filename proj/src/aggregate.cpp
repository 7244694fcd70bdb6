#include "dgn/aggregate.hpp"

#include <numeric>

namespace dgn {

std::string_view to_string(RowNorm kind) {
  switch (kind) {
    case RowNorm::row_l1: return "row_l1";
    case RowNorm::row_l2: return "row_l2";
    case RowNorm::global: return "global";
  }
  return "row_l1";
}

RowNorm parse_row_norm(std::string_view name) {
  if (name == "row_l1") return RowNorm::row_l1;
  if (name == "row_l2") return RowNorm::row_l2;
  if (name == "global") return RowNorm::global;
  throw ValidationError("unknown field norm '" + std::string(name) + "'");
}

std::string matrix_hash(const SparseRealMatrix& m) {
  Sha256 h;
  h.update("dgn-matrix-v1");
  h.update_int(m.rows());
  h.update_int(m.cols());
  for (Index i = 0; i < m.outerSize(); ++i) {
    for (SparseRealMatrix::InnerIterator it(m, i); it; ++it) {
      h.update_int(it.row());
      h.update_int(it.col());
      h.update_double(it.value());
    }
  }
  return h.hex_digest();
}

std::string_view to_string(AggregatorKind kind) {
  switch (kind) {
    case AggregatorKind::av: return "av";
    case AggregatorKind::dx: return "dx";
    case AggregatorKind::av_center: return "av_center";
    case AggregatorKind::dx_center: return "dx_center";
    case AggregatorKind::av_0pad: return "av_0pad";
    case AggregatorKind::dx_0pad: return "dx_0pad";
  }
  return "av";
}

AggregatorKind parse_aggregator_kind(std::string_view name) {
  for (auto k : {AggregatorKind::av, AggregatorKind::dx, AggregatorKind::av_center, AggregatorKind::dx_center,
                 AggregatorKind::av_0pad, AggregatorKind::dx_0pad}) {
    if (to_string(k) == name) return k;
  }
  throw ValidationError("unknown aggregator kind '" + std::string(name) + "'");
}

bool is_derivative_kind(AggregatorKind kind) {
  return kind == AggregatorKind::dx || kind == AggregatorKind::dx_center || kind == AggregatorKind::dx_0pad;
}

std::string_view to_string(FieldTransformKind kind) {
  switch (kind) {
    case FieldTransformKind::identity: return "identity";
    case FieldTransformKind::soft_harden: return "soft_harden";
    case FieldTransformKind::harden: return "harden";
    case FieldTransformKind::forward: return "forward";
    case FieldTransformKind::backward: return "backward";
    case FieldTransformKind::forward_copy: return "forward_copy";
    case FieldTransformKind::backward_copy: return "backward_copy";
    case FieldTransformKind::reflect: return "reflect";
  }
  return "identity";
}

FieldTransformKind parse_field_transform_kind(std::string_view name) {
  for (auto k : {FieldTransformKind::identity, FieldTransformKind::soft_harden, FieldTransformKind::harden,
                 FieldTransformKind::forward, FieldTransformKind::backward, FieldTransformKind::forward_copy,
                 FieldTransformKind::backward_copy, FieldTransformKind::reflect}) {
    if (to_string(k) == name) return k;
  }
  throw ValidationError("unknown field transform '" + std::string(name) + "'");
}

std::string_view to_string(PermutationMode mode) {
  return mode == PermutationMode::full_perm ? "full_perm" : "reverse_order";
}

PermutationMode parse_permutation_mode(std::string_view name) {
  if (name == "full_perm") return PermutationMode::full_perm;
  if (name == "reverse_order") return PermutationMode::reverse_order;
  throw ValidationError("unknown permutation mode '" + std::string(name) + "'");
}

SparseRealMatrix forward_backward_step(const SparseRealMatrix& field, int sign) {
  const Eigen::VectorXd rn = row_norms(field, 1);
  SparseRealMatrix part = sign > 0 ? positive_part(field) : negative_part(field);
  for (Index i = 0; i < part.outerSize(); ++i) {
    for (SparseRealMatrix::InnerIterator it(part, i); it; ++it) it.valueRef() /= rn[i];
  }
  return part;
}

namespace {

void check_density(const SparseRealMatrix& m, double max_density) {
  const double cells = static_cast<double>(m.rows()) * static_cast<double>(m.cols());
  if (cells > 0 && static_cast<double>(m.nonZeros()) > max_density * cells) {
    throw NumericalError("radius kernel: product density " + std::to_string(m.nonZeros() / cells) +
                         " exceeds the cap " + std::to_string(max_density));
  }
}

SparseRealMatrix identity(Index n) {
  SparseRealMatrix id(n, n);
  id.setIdentity();
  return id;
}

}  // namespace

SparseRealMatrix walk_product(std::span<const SparseRealMatrix> forward_steps,
                              std::span<const SparseRealMatrix> backward_steps, const WalkVector& v,
                              std::span<const int> order, double max_density) {
  if (forward_steps.empty()) throw ValidationError("walk_product: no fields");
  const Index n = forward_steps.front().rows();
  SparseRealMatrix acc = identity(n);
  for (const int j : order) {
    const int steps = v[static_cast<std::size_t>(j)];
    const SparseRealMatrix& step = steps > 0 ? forward_steps[j] : backward_steps[j];
    for (int s = 0; s < std::abs(steps); ++s) {
      acc = (acc * step).pruned();
      check_density(acc, max_density);
    }
  }
  return acc;
}

SparseRealMatrix radius_r_kernel(const RadiusKernelSpec& spec) {
  if (spec.fields.empty()) throw ValidationError("radius kernel: no fields");
  if (spec.radius < 1) throw ValidationError("radius kernel: radius must be >= 1");
  const int nf = static_cast<int>(spec.fields.size());
  if (spec.mode == PermutationMode::full_perm && nf > 8) {
    throw ValidationError("radius kernel: full_perm supports at most 8 fields");
  }
  const Graph& g = spec.fields.front().graph();
  for (const auto& f : spec.fields) {
    if (!f.graph().same_structure(g)) throw ValidationError("radius kernel: fields live on different graphs");
  }
  for (const auto& [v, a] : spec.coefficients) {
    if (static_cast<int>(v.size()) != nf) {
      throw ValidationError("radius kernel: walk vector has " + std::to_string(v.size()) + " entries for " +
                            std::to_string(nf) + " fields");
    }
    int len = 0;
    for (const int s : v) len += std::abs(s);
    if (len > spec.radius) {
      throw ValidationError("radius kernel: coefficient for walk of length " + std::to_string(len) +
                            " exceeds radius " + std::to_string(spec.radius));
    }
    if (!std::isfinite(a)) throw ValidationError("radius kernel: non-finite coefficient");
  }

  std::vector<SparseRealMatrix> fwd, bwd;
  for (const auto& f : spec.fields) {
    fwd.push_back(forward_backward_step(f.values(), +1));
    bwd.push_back(forward_backward_step(f.values(), -1));
  }
  const Index n = g.node_count();
  SparseRealMatrix total(n, n);
  for (const auto& [v, a] : spec.coefficients) {
    if (a == 0.0) continue;
    std::vector<int> order(static_cast<std::size_t>(nf));
    if (spec.mode == PermutationMode::reverse_order) {
      std::iota(order.rbegin(), order.rend(), 0);
      total += a * walk_product(fwd, bwd, v, order, spec.max_density);
    } else {
      std::iota(order.begin(), order.end(), 0);
      SparseRealMatrix sum(n, n);
      long long count = 0;
      do {
        sum += walk_product(fwd, bwd, v, order, spec.max_density);
        ++count;
      } while (std::next_permutation(order.begin(), order.end()));
      total += (a / static_cast<double>(count)) * sum;
    }
  }
  total.prune(0.0);
  total.makeCompressed();
  return total;
}

std::vector<WalkVector> enumerate_walk_vectors(int n, int radius) {
  if (n < 1 || radius < 0) throw ValidationError("enumerate_walk_vectors: need n >= 1 and radius >= 0");
  std::vector<WalkVector> out;
  WalkVector v(static_cast<std::size_t>(n), -radius);
  while (true) {
    int len = 0;
    for (const int s : v) len += std::abs(s);
    if (len <= radius) out.push_back(v);
    std::size_t pos = v.size();
    while (pos > 0 && v[pos - 1] == radius) v[--pos] = -radius;
    if (pos == 0) break;
    ++v[pos - 1];
  }
  std::stable_sort(out.begin(), out.end(), [](const WalkVector& a, const WalkVector& b) {
    int la = 0, lb = 0;
    for (const int s : a) la += std::abs(s);
    for (const int s : b) lb += std::abs(s);
    return la < lb;
  });
  return out;
}

std::vector<std::vector<int>> enumerate_step_words(int n, int radius) {
  if (n < 1 || radius < 0) throw ValidationError("enumerate_step_words: need n >= 1 and radius >= 0");
  std::vector<std::vector<int>> out{{}};
  std::size_t begin = 0;
  for (int r = 1; r <= radius; ++r) {
    const std::size_t end = out.size();
    for (std::size_t w = begin; w < end; ++w) {
      for (int f = 1; f <= n; ++f) {
        for (const int s : {f, -f}) {
          auto word = out[w];
          word.push_back(s);
          out.push_back(std::move(word));
        }
      }
    }
    begin = end;
  }
  return out;
}

long long walk_word_count(int n, int radius) {
  long long total = 0, power = 1;
  for (int r = 0; r <= radius; ++r) {
    total += power;
    power *= 2LL * n;
  }
  return total;
}

}  // namespace dgn
