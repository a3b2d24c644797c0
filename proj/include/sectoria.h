#ifndef SECTORIA_H
#define SECTORIA_H

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes mirror the CLI exit codes. */
typedef enum {
    SECTORIA_OK = 0,
    SECTORIA_E_PARSE = 1,       /* malformed spec / expression */
    SECTORIA_E_PARTIAL = 2,     /* ran, but verdict partial / inconsistent */
    SECTORIA_E_UNSUPPORTED = 3, /* hypothesis violated or unsupported case */
    SECTORIA_E_NUMERIC = 4      /* numeric / quadrature / conditioning failure */
} sectoria_status;

typedef struct sectoria_job sectoria_job;

/* Creates a job from a JSON job spec (schema "sectoria/1"). The spec may
   contain: operator, band, region, rhs (list of expression strings), h,
   chart, sector, trials, seed, order, tolerances. */
sectoria_status sectoria_job_create(const char* spec_json, sectoria_job** out);
void sectoria_job_destroy(sectoria_job* job);

/* Overrides the spec's seed (reports embed it for reproducibility). */
sectoria_status sectoria_job_set_seed(sectoria_job* job, unsigned long long seed);

/* command: analyze | cover | solve | check-pullback | experiment.
   On return *result_json (when non-NULL requested) holds a NUL-terminated
   JSON document owned by the caller; release with sectoria_string_free.
   A report is produced even when the status is SECTORIA_E_PARTIAL. */
sectoria_status sectoria_job_run(sectoria_job* job, const char* command, char** result_json);

/* Named CSV artifacts of the last run ("samples.csv", "pieces.csv");
   SECTORIA_E_PARSE when the name is unknown. */
sectoria_status sectoria_job_artifact(sectoria_job* job, const char* name, char** out);

/* Message for the last failing call on this thread; empty string if none. */
const char* sectoria_last_error(void);

void sectoria_string_free(char* s);

const char* sectoria_version(void);

#ifdef __cplusplus
}
#endif

#endif
