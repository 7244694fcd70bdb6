#ifndef DGN_C_API_H
#define DGN_C_API_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Bumped together with the JSON schema version. */
#define DGN_C_API_VERSION 1

typedef uint64_t dgn_handle;

typedef enum {
  DGN_OK = 0,
  DGN_ERR_VALIDATION = 1,
  DGN_ERR_NUMERICAL = 2,
  DGN_ERR_RELEASED = 3,
  DGN_ERR_UNKNOWN_HANDLE = 4,
  DGN_ERR_WRONG_KIND = 5,
  DGN_ERR_SHAPE = 6,
  DGN_ERR_INTERNAL = 7
} dgn_status;

int dgn_api_version(void);

/* Message of the last failing call on this thread; empty after success. */
const char* dgn_last_error(void);

/* edges: edge_count (u, v) pairs, row-major. */
dgn_status dgn_bind_graph(int64_t node_count, const int64_t* edges, int64_t edge_count, dgn_handle* out);

dgn_status dgn_graph_node_count(dgn_handle graph, int64_t* out);
dgn_status dgn_graph_edge_count(dgn_handle graph, int64_t* out);
/* Canonical edges (u < v, sorted); out holds 2 * edge_count entries. */
dgn_status dgn_graph_edges(dgn_handle graph, int64_t* out);

/* Field with F[u, v] = values[e] on canonical edge e, mirrored with a negation. */
dgn_status dgn_bind_field(dgn_handle graph, const double* values, int64_t count, dgn_handle* out);
/* Gradient of a node potential x (node_count entries). */
dgn_status dgn_field_gradient(dgn_handle graph, const double* x, int64_t count, dgn_handle* out);

/* kind: av, dx, av_center, dx_center, av_0pad, dx_0pad. */
dgn_status dgn_bind_aggregator(dgn_handle field, const char* kind, double epsilon, dgn_handle* out);

/* out = B x for a rows x cols row-major array; rows must equal the node count. */
dgn_status dgn_apply(dgn_handle aggregator, const double* x, int64_t rows, int64_t cols, double* out);

dgn_status dgn_release(dgn_handle handle);

#ifdef __cplusplus
}
#endif

#endif
