#ifndef NOISESHAPE_H
#define NOISESHAPE_H

/* C interface to the noiseshape library. All entry points are thread-safe;
 * error and report strings live in thread-local storage and stay valid until
 * the next noiseshape call on the same thread. Functions returning nsh_status
 * use the same codes the CLI uses as exit codes. */

#include <stddef.h>
#include <stdint.h>

#ifndef NSH_API
#if defined(__GNUC__)
#define NSH_API __attribute__((visibility("default")))
#else
#define NSH_API
#endif
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nsh_status {
    NSH_OK = 0,
    NSH_CHECK_FAILED = 1,  /* a verification check reported failure */
    NSH_USAGE_ERROR = 2,   /* bad arguments, bad config, unreadable files */
    NSH_NUMERIC_ERROR = 3  /* non-finite values, diverged computations */
} nsh_status;

/* Opaque handles. Configs are flat key = value stores; models are loaded
 * checkpoints together with their embedded dataset recipe. */
typedef struct nsh_config nsh_config;
typedef struct nsh_model nsh_model;

/* Message for the most recent failure on this thread; empty string if the
 * last call succeeded. */
NSH_API const char* nsh_last_error(void);

NSH_API nsh_config* nsh_config_new(void);
NSH_API void nsh_config_free(nsh_config* cfg);
NSH_API nsh_status nsh_config_load_file(nsh_config* cfg, const char* path);
NSH_API nsh_status nsh_config_set(nsh_config* cfg, const char* key, const char* value);
/* NULL when the key is missing; pointer valid until the next call using cfg. */
NSH_API const char* nsh_config_get(nsh_config* cfg, const char* key);

/* Runs one command: train | sample | erase | inject | pipeline | verify |
 * sweep. On return, nsh_last_report() holds the human-readable summary and
 * nsh_last_outdir() the run directory (empty when none was created). */
NSH_API nsh_status nsh_run(nsh_config* cfg, const char* command);
NSH_API const char* nsh_last_report(void);
NSH_API const char* nsh_last_outdir(void);

/* Deterministic standard normal draws for a seed (the library's pinned
 * generator stack), written to out[0..n). */
NSH_API nsh_status nsh_sample_gaussian(uint64_t seed, double* out, size_t n);

/* Noise erasure over n_sources tensors of length len each, laid out
 * back-to-back in sources; writes the (1/sqrt(n)) sum into out[0..len). */
NSH_API nsh_status nsh_erase(const double* sources, size_t n_sources, size_t len,
                             double* out);

/* Information (nats) one source retains after erasure over n sources of the
 * given dimension. Negative return on invalid arguments. */
NSH_API double nsh_mi_per_source(int n, int dim);

/* Relative sampling cost 1 + extra_evals/base_steps + k_over_c*n/base_steps.
 * Negative return on invalid arguments. */
NSH_API double nsh_cost_ratio(int base_steps, int extra_evals, double k_over_c,
                              int n_sources);

/* NULL on failure (see nsh_last_error). The checkpoint must carry the toy
 * dataset recipe, which train-produced checkpoints always do. */
NSH_API nsh_model* nsh_model_load(const char* path);
NSH_API void nsh_model_free(nsh_model* model);

/* Velocity prediction at point (x, y), time t in [0, 1], conditioned on a
 * shape from the model's recipe and a seed-bank position. */
NSH_API nsh_status nsh_model_predict(nsh_model* model, double x, double y, double t,
                                     const char* shape_name, int emb_position,
                                     double out_xy[2]);

#ifdef __cplusplus
}
#endif

#endif /* NOISESHAPE_H */
