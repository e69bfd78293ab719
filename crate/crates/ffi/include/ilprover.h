#ifndef ILPROVER_H
#define ILPROVER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// How a search ended.
typedef enum IlpOutcome {
  ILP_OUTCOME_REFUTED = 0,
  ILP_OUTCOME_SATURATED = 1,
  ILP_OUTCOME_RESOURCE_OUT = 2,
} IlpOutcome;

// Result codes.
typedef enum IlpStatus {
  ILP_STATUS_OK = 0,
  // A required pointer argument was null.
  ILP_STATUS_NULL_ARGUMENT = 1,
  // A string argument was not UTF-8.
  ILP_STATUS_INVALID_UTF8 = 2,
  // Malformed or unreadable problem or proof.
  ILP_STATUS_PARSE = 3,
  // The problem uses equality.
  ILP_STATUS_EQUALITY = 4,
  ILP_STATUS_INVALID_ARGUMENT = 5,
  // Malformed scorer snapshot.
  ILP_STATUS_SNAPSHOT = 6,
  // The attempt has no proof.
  ILP_STATUS_NO_PROOF = 7,
  // Internal error.
  ILP_STATUS_PANIC = 8,
} IlpStatus;

// Finished search.
typedef struct IlpAttempt IlpAttempt;

// Parsed problem.
typedef struct IlpProblem IlpProblem;

// Trained scorer snapshot.
typedef struct IlpSnapshot IlpSnapshot;

// Search limits; zero `max_steps` means unlimited.
typedef struct IlpLimits {
  double time_secs;
  uint64_t memory_bytes;
  uint64_t max_steps;
  // Measure `time_secs` as thread CPU time instead of wall time.
  bool cpu_clock;
} IlpLimits;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread; empty if none. The pointer
// stays valid until the next failing call on the same thread.
const char *ilp_last_error_message(void);

// Parses TPTP text. `include` directives are rejected.
//
// # Safety
// `name` and `text` must be NUL-terminated strings; `out` must be writable.
enum IlpStatus ilp_problem_parse(const char *name, const char *text, struct IlpProblem **out);

// Loads a problem file; includes resolve against its directory, then the
// directory named by the `TPTP` environment variable.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum IlpStatus ilp_problem_load_file(const char *path, struct IlpProblem **out);

// Number of input clauses (axioms and negated conjecture).
//
// # Safety
// `problem` must be null or a live handle.
uintptr_t ilp_problem_num_clauses(const struct IlpProblem *problem);

// # Safety
// `problem` must be null or a handle not yet freed.
void ilp_problem_free(struct IlpProblem *problem);

// Decodes a snapshot written by a campaign.
//
// # Safety
// `bytes` must point to `len` readable bytes; `out` must be writable.
enum IlpStatus ilp_snapshot_load(const uint8_t *bytes, uintptr_t len, struct IlpSnapshot **out);

// # Safety
// `snapshot` must be null or a handle not yet freed.
void ilp_snapshot_free(struct IlpSnapshot *snapshot);

// Runs one search with the default queue ratio. `snapshot` may be null
// for an unguided search.
//
// # Safety
// `problem` must be a live handle, `snapshot` null or a live handle, and
// `out` writable.
enum IlpStatus ilp_search(const struct IlpProblem *problem,
                          struct IlpLimits limits,
                          const struct IlpSnapshot *snapshot,
                          struct IlpAttempt **out);

// # Safety
// `attempt` must be a live handle and `out` writable.
enum IlpStatus ilp_attempt_outcome(const struct IlpAttempt *attempt, enum IlpOutcome *out);

// Number of non-input clauses the search generated.
//
// # Safety
// `attempt` must be null or a live handle.
uint64_t ilp_attempt_generated(const struct IlpAttempt *attempt);

// Proof of a refuted attempt in the text format read by
// [`ilp_check_proof`]. Release with [`ilp_string_free`].
//
// # Safety
// `attempt` must be a live handle and `out` writable.
enum IlpStatus ilp_attempt_proof_text(const struct IlpAttempt *attempt, char **out);

// Full attempt record as JSON. Release with [`ilp_string_free`].
//
// # Safety
// `attempt` must be a live handle and `out` writable.
enum IlpStatus ilp_attempt_record_json(const struct IlpAttempt *attempt, char **out);

// # Safety
// `attempt` must be null or a handle not yet freed.
void ilp_attempt_free(struct IlpAttempt *attempt);

// # Safety
// `s` must be null or a string returned by this library, not yet freed.
void ilp_string_free(char *s);

// Replays a proof. With a non-null `problem`, its input clauses must also
// be clauses of that problem. Writes the verdict to `valid`.
//
// # Safety
// `proof_text` must be a NUL-terminated string, `problem` null or a live
// handle, and `valid` writable.
enum IlpStatus ilp_check_proof(const char *proof_text,
                               const struct IlpProblem *problem,
                               bool *valid);

// Inverse CDF of the heavy-tailed tree-size distribution used for
// hindsight goal sampling; `u` must lie in `[0, 1)`.
//
// # Safety
// `out` must be writable.
enum IlpStatus ilp_sample_size(double u, uint64_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ILPROVER_H */
