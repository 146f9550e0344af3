#ifndef BNMIMO_BNMIMO_H
#define BNMIMO_BNMIMO_H

#include <stddef.h>
#include <stdint.h>

#if defined(BNMIMO_BUILDING)
#define BNM_API __attribute__((visibility("default")))
#else
#define BNM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bnm_status {
    BNM_OK = 0,
    BNM_ERR_VALIDATION = 1, /* bad input or configuration */
    BNM_ERR_NUMERICAL = 2,  /* a numerical routine failed */
    BNM_ERR_SELFTEST = 3,   /* a self-test property did not hold */
    BNM_ERR_IO = 4,         /* file could not be read or written */
    BNM_ERR_INTERNAL = 5
} bnm_status;

/* Opaque run: a configuration and, after bnm_run_execute, its results. */
typedef struct bnm_run bnm_run;

BNM_API const char* bnm_version(void);

/* Message of the last failed call on this thread ("" if none). Valid until
   the next call on the same thread. */
BNM_API const char* bnm_last_error(void);

/* Strings returned through char** are owned by the caller. */
BNM_API void bnm_string_free(char* s);

BNM_API bnm_status bnm_run_create(bnm_run** out);
BNM_API void bnm_run_destroy(bnm_run* run);

BNM_API bnm_status bnm_run_set(bnm_run* run, const char* key, const char* value);
/* Flat key=value file, or a CSV/JSON output of an earlier run. */
BNM_API bnm_status bnm_run_load_config(bnm_run* run, const char* path);
BNM_API bnm_status bnm_run_load_config_text(bnm_run* run, const char* text);
BNM_API bnm_status bnm_run_apply_preset(bnm_run* run, const char* name);
BNM_API bnm_status bnm_run_validate(bnm_run* run);
/* Resolved configuration as key=value lines. */
BNM_API bnm_status bnm_run_config_text(const bnm_run* run, char** out);

BNM_API bnm_status bnm_run_execute(bnm_run* run);
/* format is "csv" or "json". `written` (may be NULL) receives the written
   paths, one per line. */
BNM_API bnm_status bnm_run_write(const bnm_run* run, const char* path, const char* format, char** written);
BNM_API bnm_status bnm_run_render(const bnm_run* run, const char* format, char** out);
BNM_API bnm_status bnm_run_summary(const bnm_run* run, char** out);

/* "name<TAB>description" lines. */
BNM_API bnm_status bnm_preset_list(char** out);

/* Runs the invariant self-test. Returns BNM_ERR_SELFTEST (with the report
   still filled in) when a property fails. */
BNM_API bnm_status bnm_selftest(uint64_t seed, size_t instances, int inject_fault, char** report);

/* Dispersion matrices of the built-in linear dispersion code, as JSON. */
BNM_API bnm_status bnm_ldc_export_json(int streams, int block_length, char** out);

/* Instantaneous capacity in bits per channel use for singular values
   `sigma` (descending, n of them), linear SNR `rho` and `nt` antennas. */
BNM_API bnm_status bnm_capacity_bits(const char* scheme, const double* sigma, size_t n, double rho, int nt, double* out);

#ifdef __cplusplus
}
#endif

#endif
