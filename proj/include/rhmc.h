#ifndef RHMC_H
#define RHMC_H

/* C interface to the middle-convolution toolkit.  All entry points return a
   status code; 0 is success and nonzero values match the documented process
   exit codes.  On failure rhmc_last_error() describes the problem for the
   calling thread.  Strings returned through char** are heap copies owned by
   the caller; release them with rhmc_string_free.  Handles are released with
   rhmc_tuple_free. */

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rhmc_status {
    RHMC_OK = 0,
    RHMC_ERROR_PARSE = 2,
    RHMC_ERROR_PRECONDITION = 3,
    RHMC_ERROR_NO_LAMBDA = 4,
    RHMC_ERROR_THEOREM_CONDITIONS = 5,
    RHMC_ERROR_VERIFICATION = 6,
    RHMC_ERROR_INTEGRATION = 7
} rhmc_status;

/* matrix tuple (monodromy or residue role), optionally carrying the singular
   points that make a residue tuple a full Fuchsian system */
typedef struct rhmc_tuple rhmc_tuple;

/* last failure message of the calling thread; empty string if none */
const char* rhmc_last_error(void);

void rhmc_string_free(char* s);
void rhmc_tuple_free(rhmc_tuple* t);

/* ---- tuple files ------------------------------------------------------- */

/* JSON document: version, role "monodromy"|"residue", p, n, matrices as n
   row-major p x p arrays of [re, im] pairs, optional points as n [re, im]
   pairs.  Emission uses 17 significant digits; parse(emit(x)) == x. */
rhmc_status rhmc_tuple_parse(const char* text, rhmc_tuple** out);
rhmc_status rhmc_tuple_load(const char* path, rhmc_tuple** out);
rhmc_status rhmc_tuple_emit(const rhmc_tuple* t, char** text_out);
rhmc_status rhmc_tuple_save(const rhmc_tuple* t, const char* path);

/* any out pointer may be NULL; is_residue is 0 for role monodromy, 1 for
   role residue */
rhmc_status rhmc_tuple_info(const rhmc_tuple* t, int* p, int* n, int* is_residue, int* has_points);

/* ---- options ----------------------------------------------------------- */

/* every operation takes an optional JSON options object (pass NULL for the
   defaults).  Recognized keys:
     "rank_rel_tol"    number   relative rank cutoff          (default 1e-10)
     "eig_cluster_tol" number   eigenvalue clustering radius  (default 1e-8)
     "conj_tol"        number   conjugation match tolerance   (default 1e-8)
     "seed"            integer  seed for randomized searches  (default 0)
     "restarts"        integer  Newton restart budget         (default 24)
     "lambda_extras"   array    extra [re, im] candidates for the solve scan
     "points"          array    [re, im] points, overriding any in the file
   Unknown keys are rejected so typos cannot silently change a run. */

/* ---- operations -------------------------------------------------------- */

/* multiplicative middle convolution at lambda (role monodromy) or additive
   middle convolution at nu (role residue).  On success *out has the same role
   as the input (points carried over when present) and *report_json, if
   requested, holds {"m", "predicted_dim" (mult only), "conditions": {...},
   "kernel_dim", "relation_kernel_dim"}.  An empty quotient gives m = 0 and an
   empty tuple, not an error. */
rhmc_status rhmc_mc_mult(const rhmc_tuple* t, double lambda_re, double lambda_im,
                         const char* options_json, rhmc_tuple** out, char** report_json);
rhmc_status rhmc_mc_add(const rhmc_tuple* t, double nu_re, double nu_im,
                        const char* options_json, rhmc_tuple** out, char** report_json);

/* sum_k rk(G_k - I) - p + rk(lambda G_1...G_n - I) for a monodromy tuple */
rhmc_status rhmc_predicted_dim(const rhmc_tuple* t, double lambda_re, double lambda_im,
                               const char* options_json, int* dim_out);

/* the two kernel/image conditions; report lists witnesses when one fails */
rhmc_status rhmc_check_conditions(const rhmc_tuple* t, const char* options_json,
                                  char** report_json);

/* Jordan structures of the tuple members and of their product after
   multiplicative middle convolution at lambda, without computing it */
rhmc_status rhmc_predict_jordan(const rhmc_tuple* t, double lambda_re, double lambda_im,
                                const char* options_json, char** report_json);

/* construct a Fuchsian system with the prescribed monodromy (role monodromy,
   points required in the file or the options).  *system_out is a residue
   tuple with points; *trace_text, if requested, is a human-readable record of
   the lambda choice, conditions, and verification.  Fails with
   RHMC_ERROR_VERIFICATION unless the result reproduces the input tuple. */
rhmc_status rhmc_solve(const rhmc_tuple* t, const char* options_json,
                       rhmc_tuple** system_out, char** trace_text);

/* monodromy of a system (role residue with points) along the standard loops;
   report holds {"relation_defect", "defect_flagged", "loop_errors"} */
rhmc_status rhmc_monodromy(const rhmc_tuple* system, const char* options_json,
                           rhmc_tuple** tuple_out, char** report_json);

/* compare the monodromy of a system against a target tuple up to one global
   conjugation; report holds {"success", "residual", "relation_defect",
   "conjugator"}.  A clean comparison that does not match returns
   RHMC_ERROR_VERIFICATION with the report still filled in. */
rhmc_status rhmc_verify(const rhmc_tuple* system, const rhmc_tuple* target,
                        const char* options_json, char** report_json);

#ifdef __cplusplus
}
#endif

#endif /* RHMC_H */
