#ifndef COGNIPROF_H
#define COGNIPROF_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(COGNIPROF_BUILDING_LIBRARY)
#    define CP_API __declspec(dllexport)
#  else
#    define CP_API __declspec(dllimport)
#  endif
#else
#  define CP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cp_status {
  CP_OK = 0,
  CP_E_IO,
  CP_E_PARSE,
  CP_E_VALIDATION,
  CP_E_LOOKUP,
  CP_E_ARGUMENT,
  CP_E_VERSION,
  CP_E_CHECKSUM,
  CP_E_STATE,
  CP_E_NUMERIC,
  CP_E_INTERNAL
} cp_status;

typedef enum cp_variant {
  CP_VARIANT_CLUSTER = 0,
  CP_VARIANT_BOOST,
  CP_VARIANT_CURVE,
  CP_VARIANT_CONJUNCT
} cp_variant;

typedef struct cp_config cp_config;
typedef struct cp_corpus cp_corpus;
typedef struct cp_model cp_model;

typedef struct cp_report {
  double precision;
  double recall;
  double f1;
  size_t correct;
  size_t assigned;
  size_t labeled;
  double latency_median_us;
  double latency_p95_us;
} cp_report;

CP_API const char* cp_version(void);
CP_API const char* cp_status_string(cp_status status);
/* Message of the last failed call on this thread; "" after a success. */
CP_API const char* cp_last_error(void);

/* Pipeline, generator and path settings as key=value pairs. Unknown keys
   and malformed values fail with CP_E_ARGUMENT. */
CP_API cp_status cp_config_new(cp_config** out);
CP_API void cp_config_free(cp_config* config);
CP_API cp_status cp_config_set(cp_config* config, const char* key, const char* value);
/* Reads `key = value` lines; '#' starts a comment. */
CP_API cp_status cp_config_load(cp_config* config, const char* path);
/* Applies COGNIPROF_<KEY> environment variables for every known key. */
CP_API cp_status cp_config_apply_env(cp_config* config);
/* Space-separated list of accepted keys. */
CP_API const char* cp_config_keys(void);

CP_API cp_status cp_corpus_load(const char* path, cp_corpus** out);
CP_API void cp_corpus_free(cp_corpus* corpus);
CP_API size_t cp_corpus_posts(const cp_corpus* corpus);
CP_API size_t cp_corpus_authors(const cp_corpus* corpus);

/* A NULL config means defaults. Output paths of "-" write to stdout. */

/* Noise reduction with the given slang table (NULL: bundled); writes the
   cleaned token stream as JSON lines. */
CP_API cp_status cp_ingest(const char* input, const char* slang_tsv, const char* out_jsonl);
CP_API cp_status cp_segment(const cp_config* config, const char* corpus, const char* out_tsv);
/* Per-author linguistic and cognitive features as JSON lines. A NULL
   matrix uses the bundled one. */
CP_API cp_status cp_extract(const cp_config* config, const char* corpus, const char* matrix_csv,
                            const char* out_jsonl);
/* traits_csv may be NULL. */
CP_API cp_status cp_synth(const cp_config* config, const char* corpus_out, const char* traits_csv);

/* Splits the labeled authors, trains every module and tunes alpha/beta.
   traits_csv may be NULL. */
CP_API cp_status cp_train(const cp_config* config, const char* corpus, const char* traits_csv,
                          cp_model** out);
CP_API void cp_model_free(cp_model* model);
CP_API cp_status cp_model_save(const cp_model* model, const char* path);
CP_API cp_status cp_model_load(const char* path, cp_model** out);
CP_API const char* cp_model_run_id(const cp_model* model);
CP_API size_t cp_model_occupations(const cp_model* model);
CP_API const char* cp_model_occupation(const cp_model* model, size_t index);
CP_API cp_status cp_model_params(const cp_model* model, double* alpha, double* beta);
CP_API cp_status cp_model_write_surface(const cp_model* model, const char* out_csv);
/* The bundle's held-out test posts from `corpus`. */
CP_API cp_status cp_model_test_corpus(const cp_model* model, const cp_corpus* corpus, cp_corpus** out);

CP_API cp_status cp_variant_from_string(const char* name, cp_variant* out);

/* Predictions as JSON lines; abstentions carry a null occupation. */
CP_API cp_status cp_infer(const cp_model* model, const cp_corpus* corpus, cp_variant variant,
                          const char* out_jsonl);
/* Top-1 occupation for a single author's posts; writes into `occupation`
   (empty when abstaining). */
CP_API cp_status cp_infer_author(const cp_model* model, const cp_corpus* corpus, const char* author_id,
                                 cp_variant variant, char* occupation, size_t capacity);
/* out_json may be NULL. */
CP_API cp_status cp_evaluate(const cp_model* model, const cp_corpus* test, cp_variant variant,
                             const char* out_json, cp_report* report);
/* All four variants, one CSV row each. */
CP_API cp_status cp_evaluate_variants(const cp_model* model, const cp_corpus* test, const char* out_csv);

CP_API cp_status cp_ablate(const cp_config* config, const char* corpus, const char* traits_csv,
                           const double* fractions, size_t count, const char* out_csv);
CP_API cp_status cp_bench_index(const size_t* sizes, size_t count, size_t queries, uint64_t seed,
                                const char* out_csv);

#ifdef __cplusplus
}
#endif

#endif
