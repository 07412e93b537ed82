/*
 * uavsim - predictive UAV base-station deployment simulator.
 *
 * C interface to the core library. All functions return UAVSIM_OK on
 * success; on failure, uavsim_last_error(ctx) describes what went wrong.
 * Strings returned through char** are heap-allocated JSON documents owned
 * by the caller; release them with uavsim_string_free.
 *
 * A context carries an immutable configuration. Contexts are cheap and
 * independent; one context may be used from several threads as long as the
 * caller serializes access to uavsim_last_error.
 */

#ifndef UAVSIM_H
#define UAVSIM_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct uavsim_ctx uavsim_ctx;

typedef enum uavsim_status {
  UAVSIM_OK = 0,
  UAVSIM_ERR_INVALID_ARGUMENT = 1,
  UAVSIM_ERR_IO = 2,
  UAVSIM_ERR_PARSE = 3,
  UAVSIM_ERR_RUNTIME = 4,
  UAVSIM_ERR_INTERNAL = 5
} uavsim_status;

/* Library version string, static storage. */
const char* uavsim_version(void);

/* Create a context from a JSON configuration document; NULL or empty uses
 * the built-in defaults. Unknown configuration keys are rejected. */
uavsim_status uavsim_ctx_new(const char* config_json, uavsim_ctx** out);

/* Create a context from a JSON configuration file. */
uavsim_status uavsim_ctx_new_from_file(const char* path, uavsim_ctx** out);

void uavsim_ctx_free(uavsim_ctx* ctx);

/* Message for the most recent failure on this context; empty if none. The
 * pointer stays valid until the next call on the same context. */
const char* uavsim_last_error(const uavsim_ctx* ctx);

void uavsim_string_free(char* s);

/* The fully resolved configuration as JSON (defaults plus overrides). */
uavsim_status uavsim_effective_config(uavsim_ctx* ctx, char** json_out);

/* Parse the raw dataset tables, partition service areas, synthesize
 * second-granularity located records, and write the canonical record
 * stream under out_dir. Returns an ingest summary. */
uavsim_status uavsim_ingest(uavsim_ctx* ctx, const char* bs_csv,
                            const char* traffic_csv, const char* out_dir,
                            uint64_t seed, char** summary_json);

/* Flag congested hours of the city-level series in a traffic table. */
uavsim_status uavsim_detect(uavsim_ctx* ctx, const char* traffic_csv,
                            char** flags_json);

/* Build a synthetic scenario document. fleet_size <= 0 or rho_ratio <= 0
 * fall back to the configured values. */
uavsim_status uavsim_make_scenario(uavsim_ctx* ctx, uint64_t seed, int fleet_size,
                                   double rho_ratio, char** scenario_json);

/* Run the learning pipeline over every congestion episode in a scenario:
 * per-BS demand estimates, hotspot masks, subarea splits, and the
 * prediction-error table against the baselines. */
uavsim_status uavsim_learn(uavsim_ctx* ctx, const char* scenario_path,
                           const char* out_dir, char** report_json);

/* Feasibility report for the offload-contract menu at a given demand:
 * incentive-compatibility, both participation checks, closed-form
 * residuals, and the infeasible alternative slope. */
uavsim_status uavsim_contract_check(uavsim_ctx* ctx, double demand_bits,
                                    int grid_size, char** report_json);

/* Run one deployment simulation. policy is "predictive", "closest" or
 * "max_energy"; horizon_s <= 0 uses the scenario's horizon. Writes
 * events.jsonl and metrics.json under out_dir when it is non-NULL. */
uavsim_status uavsim_simulate(uavsim_ctx* ctx, const char* scenario_path,
                              const char* policy, double horizon_s,
                              const char* out_dir, char** metrics_json);

/* Run the configured policy x fleet-size x seed sweep with a bounded
 * worker pool, writing per-run outputs, sweep.csv and summary.json. */
uavsim_status uavsim_compare(uavsim_ctx* ctx, const char* out_dir, int jobs,
                             char** summary_json);

/* Aggregate an existing sweep.csv into per-(policy, fleet) means. */
uavsim_status uavsim_report(uavsim_ctx* ctx, const char* sweep_csv,
                            char** report_json);

#ifdef __cplusplus
}
#endif

#endif /* UAVSIM_H */
