#ifndef NSRTPLAN_H
#define NSRTPLAN_H

/* C interface to the nsrtplan shared library.
 *
 * The library learns relational operator models (symbolic preconditions and
 * effects plus small neural transition/sampler/classifier heads) from logged
 * interaction data in a set of built-in simulated environments, and plans
 * with them. All heavyweight state lives behind opaque handles; every
 * function returns a status code and leaves a message for npl_last_error()
 * on failure. Strings returned through char** are owned by the caller and
 * released with npl_string_free().
 */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum npl_status {
    NPL_OK = 0,
    NPL_ERR_INVALID_ARGUMENT = 1,
    NPL_ERR_IO = 2,
    NPL_ERR_RUNTIME = 3
} npl_status;

typedef struct npl_env npl_env;     /* a simulated environment */
typedef struct npl_model npl_model; /* a trained model bundle */

const char* npl_version(void);

/* Message for the most recent failure on this thread; never NULL. */
const char* npl_last_error(void);

void npl_string_free(char* s);

/* ---- environments ------------------------------------------------------ */

/* Comma-separated list of environment names. */
npl_status npl_env_names(char** out_names);

npl_status npl_env_open(const char* name, npl_env** out_env);
void npl_env_close(npl_env* env);

/* Versioned text dump of the environment's pinned dynamics constants. */
npl_status npl_env_constants(const npl_env* env, char** out_text);

/* ---- data collection and training -------------------------------------- */

/* Rolls the environment's scripted behavior prior for n_episodes training
 * episodes and writes the dataset file. */
npl_status npl_collect(const npl_env* env, int n_episodes, uint64_t seed,
                       const char* dataset_path);

typedef struct npl_train_options {
    uint64_t seed;
    /* Divides the reference epoch counts; 0 keeps the library default (10).
     * 1 trains at full reference length. */
    int epoch_scale;
    /* Nonzero prints stage timings to stderr. */
    int verbose;
} npl_train_options;

npl_status npl_train(const npl_env* env, const char* dataset_path, const char* bundle_path,
                     const npl_train_options* options);

/* ---- trained models ---------------------------------------------------- */

/* The model keeps references into env; close models before their env. */
npl_status npl_model_open(const npl_env* env, const char* bundle_path, npl_model** out_model);
void npl_model_close(npl_model* model);

/* Operator printout of the model's symbolic components. */
npl_status npl_model_describe(const npl_model* model, char** out_text);

/* ---- evaluation -------------------------------------------------------- */

typedef struct npl_eval_result {
    double solve_rate;    /* percent of tasks solved */
    double mean_wall_s;   /* planner wall seconds, mean over solved tasks */
    double mean_plan_len; /* actions executed, mean over solved tasks */
} npl_eval_result;

/* method: ours | b1 | b2 | b3 | b5 | b6 | b7 (b5 accepts a NULL model).
 * split: easy | hard. timeout_s <= 0 keeps the default of 3 seconds. */
npl_status npl_evaluate(const npl_env* env, const npl_model* model, const char* method,
                        const char* split, int n_tasks, uint64_t seed, double timeout_s,
                        npl_eval_result* out_result);

typedef struct npl_curve_options {
    const uint64_t* seeds; /* NULL selects seeds 0..7 */
    size_t n_seeds;
    const int* episode_grid; /* NULL selects 50,100,200,500 */
    size_t n_grid;
    const char* methods; /* comma-separated; NULL selects "ours" */
    int test_tasks;      /* <= 0 selects 100 */
    double timeout_s;    /* <= 0 selects 3.0 */
    int epoch_scale;     /* 0 keeps the library default */
    int workers;         /* <= 0 selects 1 */
} npl_curve_options;

/* Sweeps episodes x seeds x methods x {easy,hard} and streams CSV rows to
 * csv_path as cells finish. */
npl_status npl_curve(const npl_env* env, const npl_curve_options* options, const char* csv_path);

#ifdef __cplusplus
}
#endif

#endif
