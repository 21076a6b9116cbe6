#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "cogniprof/cogniprof.h"

static int failures = 0;

#define EXPECT(cond)                                              \
  do {                                                            \
    if (!(cond)) {                                                \
      fprintf(stderr, "%s:%d: %s\n", __FILE__, __LINE__, #cond);  \
      ++failures;                                                 \
    }                                                             \
  } while (0)

#define EXPECT_OK(call)                                                              \
  do {                                                                               \
    cp_status s_ = (call);                                                           \
    if (s_ != CP_OK) {                                                               \
      fprintf(stderr, "%s:%d: %s -> %s: %s\n", __FILE__, __LINE__, #call,            \
              cp_status_string(s_), cp_last_error());                                \
      ++failures;                                                                    \
    }                                                                                \
  } while (0)

static long file_size(const char* path) {
  FILE* f = fopen(path, "rb");
  long n;
  if (!f) return -1;
  fseek(f, 0, SEEK_END);
  n = ftell(f);
  fclose(f);
  return n;
}

static void truncate_copy(const char* from, const char* to, long keep) {
  FILE* in = fopen(from, "rb");
  FILE* out = fopen(to, "wb");
  char* buf = malloc((size_t)keep);
  size_t got = fread(buf, 1, (size_t)keep, in);
  fwrite(buf, 1, got, out);
  free(buf);
  fclose(in);
  fclose(out);
}

int main(void) {
  cp_config* cfg = NULL;
  cp_corpus* corpus = NULL;
  cp_corpus* test = NULL;
  cp_model* model = NULL;
  cp_model* loaded = NULL;
  cp_report r1, r2;
  cp_variant v;
  double alpha = -1, beta = -1;
  char occupation[64];
  const size_t sizes[] = {5, 10};

  EXPECT(strlen(cp_version()) > 0);
  EXPECT(strcmp(cp_status_string(CP_OK), cp_status_string(CP_E_IO)) != 0);
  EXPECT(strstr(cp_config_keys(), "svm_c") != NULL);

  EXPECT_OK(cp_config_new(&cfg));
  EXPECT(cp_config_set(cfg, "no-such-key", "1") == CP_E_ARGUMENT);
  EXPECT(strstr(cp_last_error(), "no_such_key") != NULL);
  EXPECT(cp_config_set(cfg, "authors", "many") == CP_E_ARGUMENT);
  EXPECT(cp_config_load(cfg, "does-not-exist.conf") == CP_E_IO);
  EXPECT_OK(cp_config_set(cfg, "seed", "5"));
  EXPECT_OK(cp_config_set(cfg, "authors", "60"));
  EXPECT_OK(cp_config_set(cfg, "posts-per-author", "10"));
  EXPECT_OK(cp_config_set(cfg, "boost_rounds", "10"));
  EXPECT_OK(cp_config_set(cfg, "tuning_folds", "3"));
  EXPECT_OK(cp_config_set(cfg, "grid_step", "0.1"));

  EXPECT_OK(cp_synth(cfg, "capi_corpus.jsonl", "capi_traits.csv"));
  EXPECT_OK(cp_corpus_load("capi_corpus.jsonl", &corpus));
  EXPECT(cp_corpus_posts(corpus) == 600);
  EXPECT(cp_corpus_authors(corpus) == 60);
  EXPECT(cp_corpus_load("missing.jsonl", &test) == CP_E_IO);
  EXPECT(test == NULL);

  EXPECT_OK(cp_train(cfg, "capi_corpus.jsonl", "capi_traits.csv", &model));
  EXPECT(cp_model_occupations(model) == 5);
  EXPECT(cp_model_occupation(model, 99) == NULL);
  EXPECT_OK(cp_model_params(model, &alpha, &beta));
  EXPECT(alpha >= 0 && beta >= 0 && alpha + beta <= 1 + 1e-12);
  EXPECT_OK(cp_model_save(model, "capi_model.bundle"));
  EXPECT_OK(cp_model_load("capi_model.bundle", &loaded));
  EXPECT(strcmp(cp_model_run_id(model), cp_model_run_id(loaded)) == 0);

  EXPECT_OK(cp_model_test_corpus(model, corpus, &test));
  EXPECT(cp_corpus_authors(test) > 0 && cp_corpus_authors(test) < 60);
  EXPECT_OK(cp_evaluate(model, test, CP_VARIANT_CONJUNCT, "capi_report.json", &r1));
  EXPECT_OK(cp_evaluate(loaded, test, CP_VARIANT_CONJUNCT, NULL, &r2));
  EXPECT(r1.labeled == cp_corpus_authors(test));
  EXPECT(r1.correct == r2.correct && r1.assigned == r2.assigned && r1.f1 == r2.f1);
  EXPECT(r1.f1 >= 0 && r1.f1 <= 1);
  EXPECT(file_size("capi_report.json") > 0);
  EXPECT_OK(cp_evaluate_variants(model, test, "capi_variants.csv"));
  EXPECT_OK(cp_infer(model, test, CP_VARIANT_CURVE, "capi_predictions.jsonl"));
  EXPECT(file_size("capi_predictions.jsonl") > 0);
  EXPECT_OK(cp_infer_author(model, corpus, "author-00001", CP_VARIANT_CONJUNCT, occupation, sizeof occupation));
  EXPECT(cp_infer_author(model, corpus, "nobody", CP_VARIANT_CONJUNCT, occupation, sizeof occupation) ==
         CP_E_LOOKUP);
  EXPECT(cp_evaluate(model, corpus, CP_VARIANT_CLUSTER, NULL, &r1) == CP_E_VALIDATION);

  EXPECT_OK(cp_variant_from_string("boost", &v));
  EXPECT(v == CP_VARIANT_BOOST);
  EXPECT(cp_variant_from_string("forest", &v) == CP_E_ARGUMENT);
  EXPECT(strstr(cp_last_error(), "forest") != NULL);

  truncate_copy("capi_model.bundle", "capi_truncated.bundle", file_size("capi_model.bundle") / 2);
  cp_model_free(loaded);
  loaded = NULL;
  EXPECT(cp_model_load("capi_truncated.bundle", &loaded) == CP_E_CHECKSUM);
  EXPECT(loaded == NULL);
  EXPECT(cp_model_load("missing.bundle", &loaded) == CP_E_IO);

  EXPECT(cp_train(cfg, NULL, NULL, &loaded) == CP_E_ARGUMENT);
  EXPECT_OK(cp_bench_index(sizes, 2, 20, 1, "capi_bench.csv"));
  EXPECT(cp_bench_index(sizes, 0, 20, 1, "capi_bench.csv") == CP_E_ARGUMENT);

  cp_corpus_free(test);
  cp_corpus_free(corpus);
  cp_model_free(model);
  cp_config_free(cfg);
  cp_model_free(NULL);
  cp_corpus_free(NULL);
  cp_config_free(NULL);

  if (failures) fprintf(stderr, "%d failure(s)\n", failures);
  else printf("capi: all checks passed\n");
  return failures ? 1 : 0;
}
