#ifndef SLELAB_H
#define SLELAB_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes shared with the CLI exit codes. */
typedef enum {
    SLELAB_OK = 0,
    SLELAB_ERR_INVALID = 2,
    SLELAB_ERR_NUMERIC = 3,
    SLELAB_ERR_PARTIAL = 4,
    SLELAB_ERR_IO = 5
} slelab_status;

typedef struct slelab_curve slelab_curve;
typedef struct slelab_experiment slelab_experiment;

const char* slelab_version(void);

/* Message of the most recent failure on the calling thread. */
const char* slelab_last_error(void);

/* Sample one discretized trace.
   kind: "chordal" | "radial" | "two_sided_radial".
   stop: final capacity time for chordal/radial; for two_sided_radial the
   conformal-radius stop in (0, 1).
   theta: opening angle in (0, pi); only read for two_sided_radial. */
slelab_status slelab_curve_sample(const char* kind, double kappa, double theta,
                                  double dt_base, double stop, uint64_t seed,
                                  slelab_curve** out);

size_t slelab_curve_size(const slelab_curve* c);
slelab_status slelab_curve_point(const slelab_curve* c, size_t i, double* t, double* re,
                                 double* im);
/* Writes the CSV (t,re,im) plus the <path>.json sidecar. */
slelab_status slelab_curve_write_csv(const slelab_curve* c, const char* path);
void slelab_curve_free(slelab_curve* c);

/* Runs a full experiment from an ExperimentConfig JSON string; jobs <= 0
   picks one worker. On success *out owns the finished record. */
slelab_status slelab_experiment_run(const char* config_json, int jobs, slelab_experiment** out);
const char* slelab_experiment_record_json(const slelab_experiment* e);
/* One verdict per line, "name detail PASS|FAIL". */
const char* slelab_experiment_verdicts(const slelab_experiment* e);
int slelab_experiment_all_pass(const slelab_experiment* e);
void slelab_experiment_free(slelab_experiment* e);

#ifdef __cplusplus
}
#endif

#endif /* SLELAB_H */
