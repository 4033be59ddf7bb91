/* feesim — transaction-fee mining and mechanism toolkit, C API.
 *
 * All entry points are JSON-in / JSON-out. Result strings are owned by the
 * engine handle and must be released with feesim_string_free(). Calls are
 * independent; one engine may be used for many calls but is not thread-safe.
 */
#ifndef FEESIM_H
#define FEESIM_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum feesim_status {
    FEESIM_OK = 0,
    FEESIM_ERR_INVALID_ARGUMENT = 2, /* validation failure */
    FEESIM_ERR_RUNTIME = 3,          /* evaluation failure */
} feesim_status;

typedef struct feesim_engine feesim_engine;

/* Engine lifecycle. Returns NULL only on allocation failure. */
feesim_engine* feesim_engine_create(void);
void feesim_engine_destroy(feesim_engine* engine);

/* Library version string (static storage, do not free). */
const char* feesim_version(void);

/* Machine-readable error document for the last failed call on this engine:
 * {"error": {"code": <int>, "message": "..."}}. Static until the next call. */
const char* feesim_last_error(const feesim_engine* engine);

/* Releases a string returned through an out-parameter. */
void feesim_string_free(char* s);

/* Runs a scenario document ({"name","kind","seed","params"} or
 * {"scenarios":[...]}) and returns the result envelope as JSON. When out_dir
 * is non-NULL and non-empty, CSV/JSON report files are written beneath it. */
feesim_status feesim_run_scenario(feesim_engine* engine, const char* scenario_json,
                                  const char* out_dir, char** result_json);

/* Named reproduction scenario (table1, counterexamples, selfish-curve,
 * fee-selfish-curve, whale-threshold, undercut-equilibrium, mining-gap).
 * overrides_json may be NULL or "{}" for the defaults. */
feesim_status feesim_reproduce(feesim_engine* engine, const char* name,
                               const char* overrides_json, const char* out_dir,
                               char** result_json);

/* Single mechanism evaluation: spec {"kind","B","k","p","sigma","gamma","c"},
 * bids either [amounts...] or [{"bidder","amount","fake"}...]. mode is
 * "expected" or "seeded". */
feesim_status feesim_tfm_eval(feesim_engine* engine, const char* mechanism_json,
                              const char* bids_json, const char* mode, uint64_t seed,
                              char** result_json);

/* Deviation audit: params {"mechanism":..., "notion":"uic|mmic|oca",
 * "values"|"bids":..., "gamma","strict","cartel_size","fake_budget"}. */
feesim_status feesim_audit(feesim_engine* engine, const char* params_json, char** result_json);

/* Closed-form evaluation over parameter grids: params {"formula":...,
 * "<arg>": value-or-array, ...}. */
feesim_status feesim_analytic(feesim_engine* engine, const char* params_json,
                              char** result_json);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* FEESIM_H */
