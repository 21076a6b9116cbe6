#include "cogniprof/cogniprof.h"

#include <cstring>
#include <fstream>
#include <iostream>
#include <new>

#include <json.hpp>

#include "cogniprof/error.hpp"
#include "cogniprof/harness.hpp"
#include "config.hpp"

namespace cp = cogniprof;
namespace h = cogniprof::harness;

struct cp_config {
  cp::capi::Settings settings;
};

struct cp_corpus {
  std::vector<cp::corpus::RawPost> posts;
};

struct cp_model {
  h::ModelBundle bundle;
};

namespace {

thread_local std::string last_error;

cp_status status_of(cp::ErrorCode code) {
  switch (code) {
    case cp::ErrorCode::io: return CP_E_IO;
    case cp::ErrorCode::parse: return CP_E_PARSE;
    case cp::ErrorCode::validation: return CP_E_VALIDATION;
    case cp::ErrorCode::lookup: return CP_E_LOOKUP;
    case cp::ErrorCode::argument: return CP_E_ARGUMENT;
    case cp::ErrorCode::version: return CP_E_VERSION;
    case cp::ErrorCode::checksum: return CP_E_CHECKSUM;
    case cp::ErrorCode::state: return CP_E_STATE;
    case cp::ErrorCode::numeric: return CP_E_NUMERIC;
  }
  return CP_E_INTERNAL;
}

template <typename Fn>
cp_status guard(Fn&& fn) noexcept {
  try {
    fn();
    last_error.clear();
    return CP_OK;
  } catch (const cp::Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const nlohmann::json::exception& e) {
    last_error = e.what();
    return CP_E_PARSE;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return CP_E_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return CP_E_INTERNAL;
  } catch (...) {
    last_error = "unknown failure";
    return CP_E_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) cp::fail(cp::ErrorCode::argument, std::string(what) + " must not be null");
}

template <typename Fn>
void write_to(const char* path, Fn&& fn) {
  need(path, "output path");
  if (std::strcmp(path, "-") == 0) {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) cp::fail(cp::ErrorCode::io, std::string("cannot write ") + path);
  fn(out);
  out.flush();
  if (!out) cp::fail(cp::ErrorCode::io, std::string("write failed: ") + path);
}

cp::capi::Settings settings_of(const cp_config* c) { return c ? c->settings : cp::capi::Settings{}; }

h::Variant variant_of(cp_variant v) {
  switch (v) {
    case CP_VARIANT_CLUSTER: return h::Variant::cluster;
    case CP_VARIANT_BOOST: return h::Variant::boost;
    case CP_VARIANT_CURVE: return h::Variant::curve;
    case CP_VARIANT_CONJUNCT: return h::Variant::conjunct;
  }
  cp::fail(cp::ErrorCode::argument, "unknown variant");
}

std::vector<cp::synthetic::AuthorTruth> traits_of(const char* path) {
  if (!path) return {};
  return cp::synthetic::read_traits_csv(path);
}

struct Cleaned {
  std::vector<cp::corpus::CleanPost> posts;
};

Cleaned clean(std::span<const cp::corpus::RawPost> posts, const cp::lessn::LexiconSet& lexicons,
              const cp::corpus::SlangTable& slang) {
  std::vector<std::string> extra = lexicons.words();
  for (const auto& [key, expansion] : slang.entries()) {
    for (auto& w : cp::corpus::tokenize(expansion)) extra.push_back(std::move(w));
  }
  const cp::corpus::NoiseReducer reducer(slang, cp::corpus::build_vocabulary(posts, extra));
  Cleaned out;
  out.posts.reserve(posts.size());
  for (const auto& p : posts) out.posts.push_back(reducer.reduce(p));
  return out;
}

void fill(cp_report* out, const h::EvalReport& r) {
  if (!out) return;
  out->precision = r.precision;
  out->recall = r.recall;
  out->f1 = r.f1;
  out->correct = r.correct;
  out->assigned = r.assigned;
  out->labeled = r.labeled;
  out->latency_median_us = r.latency_median_us;
  out->latency_p95_us = r.latency_p95_us;
}

}  // namespace

extern "C" {

const char* cp_version(void) { return "1.0.0"; }

const char* cp_status_string(cp_status s) {
  switch (s) {
    case CP_OK: return "ok";
    case CP_E_IO: return "io error";
    case CP_E_PARSE: return "parse error";
    case CP_E_VALIDATION: return "validation error";
    case CP_E_LOOKUP: return "lookup error";
    case CP_E_ARGUMENT: return "argument error";
    case CP_E_VERSION: return "version mismatch";
    case CP_E_CHECKSUM: return "checksum mismatch";
    case CP_E_STATE: return "state error";
    case CP_E_NUMERIC: return "numeric error";
    case CP_E_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* cp_last_error(void) { return last_error.c_str(); }

cp_status cp_config_new(cp_config** out) {
  return guard([&] {
    need(out, "out");
    *out = new cp_config;
  });
}

void cp_config_free(cp_config* c) { delete c; }

cp_status cp_config_set(cp_config* c, const char* key, const char* value) {
  return guard([&] {
    need(c, "config");
    need(key, "key");
    need(value, "value");
    c->settings.set(key, value);
  });
}

cp_status cp_config_load(cp_config* c, const char* path) {
  return guard([&] {
    need(c, "config");
    need(path, "path");
    c->settings.load(path);
  });
}

cp_status cp_config_apply_env(cp_config* c) {
  return guard([&] {
    need(c, "config");
    c->settings.apply_env();
  });
}

const char* cp_config_keys(void) {
  static const std::string joined = [] {
    std::string s;
    for (const auto& k : cp::capi::setting_keys()) {
      if (!s.empty()) s += ' ';
      s += k;
    }
    return s;
  }();
  return joined.c_str();
}

cp_status cp_corpus_load(const char* path, cp_corpus** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    auto c = std::make_unique<cp_corpus>();
    c->posts = cp::corpus::ingest_corpus(path);
    *out = c.release();
  });
}

void cp_corpus_free(cp_corpus* c) { delete c; }

size_t cp_corpus_posts(const cp_corpus* c) { return c ? c->posts.size() : 0; }

size_t cp_corpus_authors(const cp_corpus* c) {
  if (!c) return 0;
  std::unordered_set<std::string> ids;
  for (const auto& p : c->posts) ids.insert(p.author_id);
  return ids.size();
}

cp_status cp_ingest(const char* input, const char* slang_tsv, const char* out_jsonl) {
  return guard([&] {
    need(input, "input");
    const auto posts = cp::corpus::ingest_corpus(input);
    const cp::capi::Settings s;
    const auto slang = slang_tsv ? cp::corpus::SlangTable::load(slang_tsv) : s.resources().slang;
    const auto vocabulary = cp::corpus::build_vocabulary(posts);
    const cp::corpus::NoiseReducer reducer(slang, vocabulary);
    std::vector<cp::corpus::CleanPost> cleaned;
    for (const auto& p : posts) cleaned.push_back(reducer.reduce(p));
    write_to(out_jsonl, [&](std::ostream& out) { cp::corpus::write_clean_corpus(out, cleaned); });
  });
}

cp_status cp_segment(const cp_config* config, const char* corpus, const char* out_tsv) {
  return guard([&] {
    need(corpus, "corpus");
    const auto s = settings_of(config);
    const auto res = s.resources();
    const auto posts = cp::corpus::ingest_corpus(corpus);
    const auto c = clean(posts, res.lexicons, res.slang);
    const auto profiles = cp::segmentation::term_profiles(c.posts, res.lexicons);
    const auto g = cp::segmentation::build_term_graph(c.posts, profiles, s.pipeline.segment_epsilon,
                                                      s.pipeline.max_phrase_length);
    const auto phrases = cp::segmentation::extract_segments(c.posts, g, s.pipeline.phrase_top_k,
                                                            s.pipeline.popularity_cap, s.pipeline.max_phrase_length);
    write_to(out_tsv, [&](std::ostream& out) { cp::segmentation::write_segments(out, phrases); });
  });
}

cp_status cp_extract(const cp_config* config, const char* corpus, const char* matrix_csv, const char* out_jsonl) {
  return guard([&] {
    need(corpus, "corpus");
    const auto s = settings_of(config);
    const auto res = s.resources();
    cp::lessn::CorrelationMatrix matrix;
    if (matrix_csv) {
      matrix = cp::lessn::CorrelationMatrix::load_csv(matrix_csv);
    } else if (res.bundled_matrix) {
      matrix = *res.bundled_matrix;
    } else {
      cp::fail(cp::ErrorCode::validation, "no correlation matrix given and none bundled");
    }
    const auto posts = cp::corpus::ingest_corpus(corpus);
    const auto c = clean(posts, res.lexicons, res.slang);
    const auto stats = cp::lessn::corpus_stats(c.posts, res.lexicons);
    write_to(out_jsonl, [&](std::ostream& out) {
      for (const auto& g : cp::corpus::group_by_author(c.posts)) {
        std::vector<const cp::corpus::CleanPost*> mine;
        for (auto i : g.post_indices) mine.push_back(&c.posts[i]);
        const auto lv = cp::lessn::extract_linguistic(mine, res.lexicons, stats);
        const auto cv = cp::lessn::map_to_cognitive(lv, matrix);
        nlohmann::json row;
        row["author_id"] = g.author_id;
        if (const auto& occ = c.posts[g.post_indices.front()].occupation) row["occupation"] = *occ;
        row["linguistic"] = lv.entries;
        nlohmann::json cog = nlohmann::json::object();
        for (std::size_t q = 0; q < cp::lessn::kTraitCount; ++q) cog[std::string(cp::lessn::kTraitNames[q])] = cv[q];
        row["cognitive"] = cog;
        out << row.dump() << '\n';
      }
    });
  });
}

cp_status cp_synth(const cp_config* config, const char* corpus_out, const char* traits_csv) {
  return guard([&] {
    need(corpus_out, "corpus output");
    const auto s = settings_of(config);
    const auto res = s.resources();
    const auto corpus = cp::synthetic::generate_synthetic(s.synth, res.lexicons);
    write_to(corpus_out, [&](std::ostream& out) { cp::corpus::write_corpus(out, corpus.posts); });
    if (traits_csv) {
      write_to(traits_csv, [&](std::ostream& out) { cp::synthetic::write_traits_csv(out, corpus.authors); });
    }
  });
}

cp_status cp_train(const cp_config* config, const char* corpus, const char* traits_csv, cp_model** out) {
  return guard([&] {
    need(corpus, "corpus");
    need(out, "out");
    const auto s = settings_of(config);
    const auto cfg = s.resolved();
    cfg.validate();
    const auto posts = cp::corpus::ingest_corpus(corpus);
    const auto traits = traits_of(traits_csv);
    const auto split = h::split_authors(posts, cfg.test_fraction, cfg.seed);
    auto m = std::make_unique<cp_model>();
    m->bundle = h::train_model(posts, traits, s.resources(), cfg, &split);
    *out = m.release();
  });
}

void cp_model_free(cp_model* m) { delete m; }

cp_status cp_model_save(const cp_model* m, const char* path) {
  return guard([&] {
    need(m, "model");
    need(path, "path");
    h::save_model(m->bundle, std::filesystem::path(path));
  });
}

cp_status cp_model_load(const char* path, cp_model** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    auto m = std::make_unique<cp_model>();
    m->bundle = h::load_model(std::filesystem::path(path));
    *out = m.release();
  });
}

const char* cp_model_run_id(const cp_model* m) { return m ? m->bundle.run_id.c_str() : ""; }

size_t cp_model_occupations(const cp_model* m) { return m ? m->bundle.occupations.size() : 0; }

const char* cp_model_occupation(const cp_model* m, size_t i) {
  if (!m || i >= m->bundle.occupations.size()) return nullptr;
  return m->bundle.occupations[i].c_str();
}

cp_status cp_model_params(const cp_model* m, double* alpha, double* beta) {
  return guard([&] {
    need(m, "model");
    if (alpha) *alpha = m->bundle.coherence.alpha;
    if (beta) *beta = m->bundle.coherence.beta;
  });
}

cp_status cp_model_write_surface(const cp_model* m, const char* out_csv) {
  return guard([&] {
    need(m, "model");
    if (m->bundle.tuning.surface.empty()) cp::fail(cp::ErrorCode::state, "model was trained with fixed alpha/beta");
    write_to(out_csv, [&](std::ostream& out) { h::write_surface_csv(out, m->bundle.tuning); });
  });
}

cp_status cp_model_test_corpus(const cp_model* m, const cp_corpus* c, cp_corpus** out) {
  return guard([&] {
    need(m, "model");
    need(c, "corpus");
    need(out, "out");
    auto t = std::make_unique<cp_corpus>();
    t->posts = h::posts_of(c->posts, m->bundle.test_ids);
    *out = t.release();
  });
}

cp_status cp_variant_from_string(const char* name, cp_variant* out) {
  return guard([&] {
    need(name, "name");
    need(out, "out");
    *out = static_cast<cp_variant>(h::parse_variant(name));
  });
}

cp_status cp_infer(const cp_model* m, const cp_corpus* c, cp_variant v, const char* out_jsonl) {
  return guard([&] {
    need(m, "model");
    need(c, "corpus");
    const auto preds = h::predict(m->bundle, c->posts, variant_of(v));
    write_to(out_jsonl, [&](std::ostream& out) { h::write_predictions_jsonl(out, preds); });
  });
}

cp_status cp_infer_author(const cp_model* m, const cp_corpus* c, const char* author_id, cp_variant v,
                          char* occupation, size_t capacity) {
  return guard([&] {
    need(m, "model");
    need(c, "corpus");
    need(author_id, "author_id");
    need(occupation, "occupation buffer");
    const auto posts = h::posts_of(c->posts, {author_id});
    if (posts.empty()) cp::fail(cp::ErrorCode::lookup, std::string("no posts for author ") + author_id);
    const auto preds = h::predict(m->bundle, posts, variant_of(v));
    const std::string name = preds.front().occupation.value_or("");
    if (name.size() + 1 > capacity) cp::fail(cp::ErrorCode::argument, "occupation buffer too small");
    std::memcpy(occupation, name.c_str(), name.size() + 1);
  });
}

cp_status cp_evaluate(const cp_model* m, const cp_corpus* test, cp_variant v, const char* out_json,
                      cp_report* report) {
  return guard([&] {
    need(m, "model");
    need(test, "test corpus");
    const auto r = h::evaluate(m->bundle, test->posts, variant_of(v));
    fill(report, r);
    if (out_json) write_to(out_json, [&](std::ostream& out) { h::write_report_json(out, r); });
  });
}

cp_status cp_evaluate_variants(const cp_model* m, const cp_corpus* test, const char* out_csv) {
  return guard([&] {
    need(m, "model");
    need(test, "test corpus");
    std::vector<h::EvalReport> reports;
    for (auto v : {h::Variant::cluster, h::Variant::boost, h::Variant::curve, h::Variant::conjunct}) {
      reports.push_back(h::run_variant(m->bundle, v, test->posts));
    }
    write_to(out_csv, [&](std::ostream& out) { h::write_reports_csv(out, reports); });
  });
}

cp_status cp_ablate(const cp_config* config, const char* corpus, const char* traits_csv, const double* fractions,
                    size_t count, const char* out_csv) {
  return guard([&] {
    need(corpus, "corpus");
    if (count) need(fractions, "fractions");
    const auto s = settings_of(config);
    const auto posts = cp::corpus::ingest_corpus(corpus);
    const std::vector<double> fs(fractions, fractions + count);
    const auto points = h::history_ablation(s.resolved(), posts, traits_of(traits_csv), s.resources(), fs);
    write_to(out_csv, [&](std::ostream& out) {
      out << "fraction,precision,recall,f1,correct,assigned,labeled\n";
      for (const auto& p : points) {
        out << p.fraction << ',' << p.report.precision << ',' << p.report.recall << ',' << p.report.f1 << ','
            << p.report.correct << ',' << p.report.assigned << ',' << p.report.labeled << '\n';
      }
    });
  });
}

cp_status cp_bench_index(const size_t* sizes, size_t count, size_t queries, uint64_t seed, const char* out_csv) {
  return guard([&] {
    if (count == 0) cp::fail(cp::ErrorCode::argument, "bench needs at least one size");
    need(sizes, "sizes");
    const std::vector<std::size_t> sz(sizes, sizes + count);
    h::BenchOptions opt;
    opt.seed = seed;
    const auto rows = h::bench_index(sz, queries, opt);
    write_to(out_csv, [&](std::ostream& out) { h::write_bench_csv(out, rows); });
  });
}

}  // extern "C"
