/* branchtail — heavy-tailed branching fixed points: analysis, simulation,
 * validation. C interface to the shared library; all state lives behind
 * opaque handles and every call reports a bt_status.
 */
#ifndef BRANCHTAIL_H
#define BRANCHTAIL_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bt_status {
    BT_OK = 0,
    BT_ERR_CONFIG = 2,        /* schema violation, bad parameters */
    BT_ERR_SUPERCRITICAL = 3, /* nbar >= 1 or spectral radius >= 1 */
    BT_ERR_IO = 4,            /* file open/read/write failure */
    BT_ERR_BAND = 5,          /* validation ratios left the configured band */
    BT_ERR_INVALID = 6,       /* bad handle or argument */
    BT_ERR_NUMERIC = 7,       /* no convergence, degenerate system */
    BT_ERR_INTERNAL = 8
} bt_status;

/* A loaded, schema-checked run description (model + sim + validate). */
typedef struct bt_run bt_run;

const char* bt_version(void);

/* Loads a config. On failure writes a diagnostic into errbuf (when given)
 * and returns the corresponding status; *out stays NULL. */
bt_status bt_run_open(const char* config_path, bt_run** out, char* errbuf, size_t errlen);
bt_status bt_run_open_text(const char* config_json, bt_run** out, char* errbuf, size_t errlen);
void bt_run_close(bt_run* run);

/* Message describing the most recent failure on this handle. */
const char* bt_run_last_error(const bt_run* run);

/* Overrides applied after load. */
bt_status bt_run_set_seed(bt_run* run, uint64_t seed);
bt_status bt_run_set_workers(bt_run* run, unsigned workers);

/* Closed-form analysis report (rho, qbar, M, rbar, tail constants,
 * reduction chain). *text is heap-allocated; release with bt_free_text. */
bt_status bt_analyze(bt_run* run, char** text);

/* Runs the configured simulation; writes one sample per line to out_path
 * and a JSON sidecar to "<out_path>.meta.json". */
bt_status bt_simulate(bt_run* run, const char* out_path, uint64_t* truncated);

/* Simulates, compares empirical against predicted tails on the configured
 * quantile grid, writes the CSV report when report_path is non-NULL.
 * Returns BT_OK with *band_ok = 0 when the run succeeded but ratios left
 * the band; hard failures return an error status. */
bt_status bt_validate(bt_run* run, const char* report_path, char** summary, int* band_ok);

/* Emits the one-type-fewer reduced config to out_path. */
bt_status bt_reduce(bt_run* run, const char* out_path);

void bt_free_text(char* text);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* BRANCHTAIL_H */
