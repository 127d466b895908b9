/* C interface to the cliffsynth optimal Clifford-synthesis toolkit.
 *
 * Every function returns a cs_status; results come back through out
 * parameters. Handles are opaque and must be released with the matching
 * *_free function. Strings are NUL-terminated UTF-8; strings returned by
 * the library must be released with cs_string_free.
 *
 * Circuit text format:
 *     qubits <n>
 *     H 0
 *     CX 0 1
 *     ...
 * with gates H, S, SDG, CX, CZ, SWAP (case-insensitive), one per line,
 * '#' starting a comment, and an optional trailing "relabel p0 p1 ..."
 * line applying a final qubit permutation.
 */

#ifndef CLIFFSYNTH_H
#define CLIFFSYNTH_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cs_status {
    CS_OK = 0,
    CS_ERR_NULL_ARGUMENT = 1,
    CS_ERR_INVALID_ARGUMENT = 2,
    CS_ERR_UTF8 = 3,
    CS_ERR_PARSE = 4,
    CS_ERR_IO = 5,
    CS_ERR_UNSUPPORTED = 6,
    CS_ERR_NOT_FOUND = 7,
    CS_ERR_MEMORY_BUDGET = 8,
    CS_ERR_INTERNAL = 9
} cs_status;

/* Equivalence modes: circuits are compared modulo nothing, a shared qubit
 * relabeling, or independent input/output relabelings. */
typedef enum cs_mode {
    CS_MODE_EXACT = 0,
    CS_MODE_SIMULTANEOUS = 1,
    CS_MODE_INDEPENDENT = 2
} cs_mode;

/* Cost metrics: gate count over {H, S, CX}, circuit depth, or
 * controlled-Z count over {H, S, SDG, CZ}. */
typedef enum cs_metric {
    CS_METRIC_GATES = 0,
    CS_METRIC_DEPTH = 1,
    CS_METRIC_CZ = 2
} cs_metric;

/* Opaque handle to a cost database. */
typedef struct cs_database cs_database;

/* Build a database of optimal costs by breadth-first search.
 * linear != 0 restricts to CNOT-only (linear reversible) circuits.
 * max_cost < 0 builds until the group is exhausted. */
cs_status cs_db_build(size_t qubits, int mode, int metric, int linear,
                      int max_cost, cs_database **out);

/* Load / save the binary database format used by the CLI. */
cs_status cs_db_load(const char *path, cs_database **out);
cs_status cs_db_save(const cs_database *db, const char *path);

void cs_db_free(cs_database *db);

cs_status cs_db_qubits(const cs_database *db, size_t *out);

/* Largest cost layer present in the database. */
cs_status cs_db_max_cost(const cs_database *db, size_t *out);

/* Writes 1 if the database covers the whole group, 0 if truncated. */
cs_status cs_db_is_complete(const cs_database *db, int *out);

/* Number of canonical classes stored at the given cost;
 * CS_ERR_NOT_FOUND if the cost exceeds cs_db_max_cost. */
cs_status cs_db_layer_size(const cs_database *db, size_t cost, size_t *out);

/* Optimal cost of the Clifford implemented by the circuit text, under
 * the database's metric and mode. CS_ERR_NOT_FOUND if its class lies
 * outside a truncated database. */
cs_status cs_db_cost_of_circuit(const cs_database *db, const char *circuit,
                                size_t *out);

/* Synthesize an optimal circuit for the Clifford implemented by the
 * target circuit text. mim != 0 enables meet-in-the-middle search,
 * reaching up to twice the database's maximum cost. *out_circuit
 * receives circuit text owned by the library (free with
 * cs_string_free). */
cs_status cs_synthesize(const cs_database *db, const char *target, int mim,
                        size_t *out_cost, char **out_circuit);

/* Peephole-optimize the circuit text against the database; writes the
 * circuit's cost before and after and the optimized circuit text (free
 * with cs_string_free). The result never costs more than the input. */
cs_status cs_optimize(const cs_database *db, const char *circuit,
                      uint64_t *out_cost_before, uint64_t *out_cost_after,
                      char **out_circuit);

/* Writes 1 to *out_equal if the two circuit texts implement the same
 * Clifford under the given cs_mode, else 0. */
cs_status cs_verify(const char *circuit, const char *target, int mode,
                    int *out_equal);

/* Release a string returned by this library. */
void cs_string_free(char *s);

#ifdef __cplusplus
}
#endif

#endif /* CLIFFSYNTH_H */
