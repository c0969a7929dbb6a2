#ifndef WSP_H
#define WSP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Same numbers as the `wsp solve` exit codes.
 */
typedef enum WspOutcome {
  WSP_OUTCOME_SATISFIABLE = 10,
  WSP_OUTCOME_UNSATISFIABLE = 20,
  WSP_OUTCOME_BUDGET_EXCEEDED = 30,
} WspOutcome;

typedef enum WspStatus {
  WSP_STATUS_OK = 0,
  WSP_STATUS_NULL_POINTER = 1,
  WSP_STATUS_INVALID_UTF8 = 2,
  WSP_STATUS_PARSE_ERROR = 3,
  WSP_STATUS_INVALID_ARGUMENT = 4,
  WSP_STATUS_UNSUPPORTED = 5,
  WSP_STATUS_NO_WITNESS = 6,
  WSP_STATUS_PANIC = 99,
} WspStatus;

typedef struct WspInstance WspInstance;

typedef struct WspReport WspReport;

typedef struct WspSolveOptions {
  bool useless_pruning;
  bool pair_propagation;
  bool dynamic_order;
  bool saturated_pruning;
  /**
   * Seconds; zero or negative means no limit.
   */
  double time_limit;
  /**
   * Zero means no limit.
   */
  uint64_t node_limit;
} WspSolveOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty if none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *wsp_last_error(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void wsp_string_free(char *s);

/**
 * Parses instance text.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a writable pointer.
 */
enum WspStatus wsp_instance_parse(const char *text, struct WspInstance **out);

/**
 * Random instance with threshold 3 and scope size 5 counting constraints.
 *
 * # Safety
 * `out` must be a writable pointer.
 */
enum WspStatus wsp_instance_generate(uint32_t steps,
                                     uint32_t users,
                                     uint32_t density,
                                     uint32_t counting_b,
                                     uint64_t seed,
                                     struct WspInstance **out);

/**
 * # Safety
 * `inst` must be null or a live handle.
 */
void wsp_instance_free(struct WspInstance *inst);

/**
 * Number of steps; 0 for a null handle.
 *
 * # Safety
 * `inst` must be null or a live handle.
 */
size_t wsp_instance_steps(const struct WspInstance *inst);

/**
 * # Safety
 * `inst` must be null or a live handle.
 */
size_t wsp_instance_users(const struct WspInstance *inst);

/**
 * # Safety
 * `inst` must be null or a live handle.
 */
size_t wsp_instance_constraints(const struct WspInstance *inst);

/**
 * Canonical instance text.
 *
 * # Safety
 * `inst` must be a live handle and `out` a writable pointer.
 */
enum WspStatus wsp_instance_serialize(const struct WspInstance *inst, char **out);

/**
 * All heuristics on, no budget.
 */
struct WspSolveOptions wsp_solve_options_default(void);

/**
 * Solves `inst`. `options` may be null for the defaults.
 *
 * # Safety
 * `inst` must be a live handle, `options` null or valid, `out` writable.
 */
enum WspStatus wsp_solve(const struct WspInstance *inst,
                         const struct WspSolveOptions *options,
                         struct WspReport **out);

/**
 * # Safety
 * `report` must be null or a live handle.
 */
void wsp_report_free(struct WspReport *report);

/**
 * Budget exceeded for a null handle.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
enum WspOutcome wsp_report_outcome(const struct WspReport *report);

/**
 * # Safety
 * `report` must be null or a live handle.
 */
uint64_t wsp_report_users_processed(const struct WspReport *report);

/**
 * # Safety
 * `report` must be null or a live handle.
 */
uint64_t wsp_report_patterns(const struct WspReport *report);

/**
 * Users whose iteration produced no new pattern.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
uint64_t wsp_report_n_w(const struct WspReport *report);

/**
 * Users removed as useless.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
uint64_t wsp_report_n_useless(const struct WspReport *report);

/**
 * Wall-clock seconds spent solving.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
double wsp_report_seconds(const struct WspReport *report);

/**
 * 0-based user performing 0-based `step` in the witness, or -1 when there
 * is no witness or the step is out of range.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
int64_t wsp_report_witness_user(const struct WspReport *report, uint32_t step);

/**
 * Witness as `s1=u2 s2=u2 ...`.
 *
 * # Safety
 * `report` must be a live handle and `out` a writable pointer.
 */
enum WspStatus wsp_report_witness(const struct WspReport *report, char **out);

/**
 * OPB text and variable map of the pseudo-Boolean encoding.
 *
 * # Safety
 * `inst` must be a live handle; `opb` and `map` writable pointers.
 */
enum WspStatus wsp_encode_opb(const struct WspInstance *inst, char **opb, char **map);

/**
 * Sets `*valid` to whether `plan` (`s1=u2 ...`) is a valid complete plan.
 *
 * # Safety
 * `inst` must be a live handle, `plan` a NUL-terminated string and
 * `valid` writable.
 */
enum WspStatus wsp_verify_plan(const struct WspInstance *inst, const char *plan, bool *valid);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* WSP_H */
