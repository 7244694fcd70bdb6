#include "dgn/c_api.h"

#include "dgn/aggregate.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <variant>

namespace {

using dgn::AggregationMatrix;
using dgn::Graph;
using dgn::Index;
using dgn::VectorField;

using Object = std::variant<std::shared_ptr<const Graph>, std::shared_ptr<const VectorField>,
                            std::shared_ptr<const AggregationMatrix>>;

struct Table {
  std::mutex mutex;
  std::map<dgn_handle, Object> live;
  dgn_handle next = 1;  // ids are never reused, so anything below `next` and not live was released
};

Table& table() {
  static Table t;
  return t;
}

thread_local std::string last_error;

struct Failure {
  dgn_status status;
  std::string message;
};

dgn_handle store(Object obj) {
  auto& t = table();
  std::lock_guard lock(t.mutex);
  const dgn_handle h = t.next++;
  t.live.emplace(h, std::move(obj));
  return h;
}

template <typename T>
std::shared_ptr<const T> fetch(dgn_handle h) {
  auto& t = table();
  std::lock_guard lock(t.mutex);
  const auto it = t.live.find(h);
  if (it == t.live.end()) {
    if (h != 0 && h < t.next) throw Failure{DGN_ERR_RELEASED, "handle " + std::to_string(h) + " was released"};
    throw Failure{DGN_ERR_UNKNOWN_HANDLE, "unknown handle " + std::to_string(h)};
  }
  const auto* p = std::get_if<std::shared_ptr<const T>>(&it->second);
  if (!p) throw Failure{DGN_ERR_WRONG_KIND, "handle " + std::to_string(h) + " has the wrong kind"};
  return *p;
}

template <typename Fn>
dgn_status guarded(Fn&& fn) {
  try {
    fn();
    last_error.clear();
    return DGN_OK;
  } catch (const Failure& f) {
    last_error = f.message;
    return f.status;
  } catch (const dgn::ValidationError& e) {
    last_error = e.what();
    return DGN_ERR_VALIDATION;
  } catch (const dgn::NumericalError& e) {
    last_error = e.what();
    return DGN_ERR_NUMERICAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return DGN_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown failure";
    return DGN_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) throw Failure{DGN_ERR_VALIDATION, std::string(what) + " is null"};
}

}  // namespace

extern "C" {

int dgn_api_version(void) { return DGN_C_API_VERSION; }

const char* dgn_last_error(void) { return last_error.c_str(); }

dgn_status dgn_bind_graph(int64_t node_count, const int64_t* edges, int64_t edge_count, dgn_handle* out) {
  return guarded([&] {
    need(out, "out");
    if (node_count < 0 || edge_count < 0) throw Failure{DGN_ERR_SHAPE, "negative size"};
    if (edge_count > 0) need(edges, "edges");
    std::vector<std::pair<Index, Index>> list;
    list.reserve(static_cast<std::size_t>(edge_count));
    for (int64_t e = 0; e < edge_count; ++e) list.emplace_back(edges[2 * e], edges[2 * e + 1]);
    *out = store(std::make_shared<const Graph>(dgn::build_graph(node_count, list)));
  });
}

dgn_status dgn_graph_node_count(dgn_handle graph, int64_t* out) {
  return guarded([&] {
    need(out, "out");
    *out = fetch<Graph>(graph)->node_count();
  });
}

dgn_status dgn_graph_edge_count(dgn_handle graph, int64_t* out) {
  return guarded([&] {
    need(out, "out");
    *out = fetch<Graph>(graph)->edge_count();
  });
}

dgn_status dgn_graph_edges(dgn_handle graph, int64_t* out) {
  return guarded([&] {
    need(out, "out");
    const auto g = fetch<Graph>(graph);
    int64_t k = 0;
    for (const auto& e : g->edges()) {
      out[k++] = e.u;
      out[k++] = e.v;
    }
  });
}

dgn_status dgn_bind_field(dgn_handle graph, const double* values, int64_t count, dgn_handle* out) {
  return guarded([&] {
    need(out, "out");
    const auto g = fetch<Graph>(graph);
    if (count != g->edge_count()) {
      throw Failure{DGN_ERR_SHAPE, "field has " + std::to_string(count) + " values for " +
                                       std::to_string(g->edge_count()) + " edges"};
    }
    if (count > 0) need(values, "values");
    std::map<std::pair<Index, Index>, double> by_edge;
    int64_t k = 0;
    for (const auto& e : g->edges()) by_edge[{e.u, e.v}] = values[k++];
    auto f = VectorField::from_edges(g, [&](Index i, Index j) { return by_edge.at({i, j}); });
    *out = store(std::make_shared<const VectorField>(std::move(f)));
  });
}

dgn_status dgn_field_gradient(dgn_handle graph, const double* x, int64_t count, dgn_handle* out) {
  return guarded([&] {
    need(out, "out");
    const auto g = fetch<Graph>(graph);
    if (count != g->node_count()) throw Failure{DGN_ERR_SHAPE, "potential length does not match the node count"};
    if (count > 0) need(x, "x");
    const Eigen::Map<const Eigen::VectorXd> v(x, count);
    *out = store(std::make_shared<const VectorField>(dgn::gradient(g, v)));
  });
}

dgn_status dgn_bind_aggregator(dgn_handle field, const char* kind, double epsilon, dgn_handle* out) {
  return guarded([&] {
    need(out, "out");
    need(kind, "kind");
    const auto f = fetch<VectorField>(field);
    auto b = dgn::build_aggregator(*f, dgn::parse_aggregator_kind(kind), epsilon);
    *out = store(std::make_shared<const AggregationMatrix>(std::move(b)));
  });
}

dgn_status dgn_apply(dgn_handle aggregator, const double* x, int64_t rows, int64_t cols, double* out) {
  return guarded([&] {
    const auto b = fetch<AggregationMatrix>(aggregator);
    if (rows != b->matrix.cols() || cols < 0) {
      throw Failure{DGN_ERR_SHAPE, "array shape " + std::to_string(rows) + "x" + std::to_string(cols) +
                                       " does not match aggregator size " + std::to_string(b->matrix.cols())};
    }
    if (cols == 0) return;
    need(x, "x");
    need(out, "out");
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const Eigen::Map<const RowMajor> in(x, rows, cols);
    // Same column-by-column product as the core path so results agree bit for bit.
    const Eigen::MatrixXd result = dgn::apply(*b, Eigen::MatrixXd(in));
    Eigen::Map<RowMajor>(out, rows, cols) = result;
  });
}

dgn_status dgn_release(dgn_handle handle) {
  return guarded([&] {
    auto& t = table();
    std::lock_guard lock(t.mutex);
    if (t.live.erase(handle) == 0) {
      if (handle != 0 && handle < t.next) throw Failure{DGN_ERR_RELEASED, "handle " + std::to_string(handle) + " was already released"};
      throw Failure{DGN_ERR_UNKNOWN_HANDLE, "unknown handle " + std::to_string(handle)};
    }
  });
}

}
