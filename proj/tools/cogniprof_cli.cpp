#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cogniprof/cogniprof.h"

namespace {

struct Failure {
  cp_status status;
};

void check(cp_status s) {
  if (s != CP_OK) throw Failure{s};
}

struct ConfigDeleter {
  void operator()(cp_config* c) const { cp_config_free(c); }
};
struct CorpusDeleter {
  void operator()(cp_corpus* c) const { cp_corpus_free(c); }
};
struct ModelDeleter {
  void operator()(cp_model* m) const { cp_model_free(m); }
};
using ConfigPtr = std::unique_ptr<cp_config, ConfigDeleter>;
using CorpusPtr = std::unique_ptr<cp_corpus, CorpusDeleter>;
using ModelPtr = std::unique_ptr<cp_model, ModelDeleter>;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string dashed(std::string key) {
  for (auto& c : key) {
    if (c == '_') c = '-';
  }
  return key;
}

// Every pipeline/generator setting as --key on the subcommand; only values
// given on the command line are applied.
struct SettingFlags {
  std::map<std::string, std::string> values;

  void attach(CLI::App* cmd, const std::vector<std::string>& skip = {}) {
    for (const auto& key : split(cp_config_keys(), ' ')) {
      if (std::find(skip.begin(), skip.end(), key) != skip.end()) continue;
      cmd->add_option("--" + dashed(key), values[key], "setting " + key)->group("Settings");
    }
  }

  void apply(cp_config* c) const {
    for (const auto& [key, value] : values) {
      if (!value.empty()) check(cp_config_set(c, key.c_str(), value.c_str()));
    }
  }
};

cp_variant variant_or_usage(const std::string& name) {
  cp_variant v;
  if (cp_variant_from_string(name.c_str(), &v) != CP_OK) {
    throw CLI::ValidationError("--variant", cp_last_error());
  }
  return v;
}

std::vector<std::size_t> parse_sizes(const std::string& spec) {
  std::vector<std::size_t> out;
  const auto dots = spec.find("..");
  if (dots != std::string::npos) {
    const auto lo = std::stoul(spec.substr(0, dots));
    const auto hi = std::stoul(spec.substr(dots + 2));
    if (lo == 0 || hi < lo) throw CLI::ValidationError("--boundaries", "expected LO..HI with 0 < LO <= HI");
    for (auto n = lo; n <= hi; n += lo) out.push_back(n);
    if (out.back() != hi) out.push_back(hi);
    return out;
  }
  for (const auto& t : split(spec, ',')) out.push_back(std::stoul(t));
  return out;
}

const char* opt(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Occupation inference from short-text author histories"};
  app.require_subcommand(1);
  app.set_version_flag("--version", cp_version());

  std::string config_path;
  app.add_option("--config", config_path, "key = value settings file")->check(CLI::ExistingFile);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Reduce noise and tokenize a JSONL corpus");
  std::string in_input, in_slang, in_out = "-";
  ingest->add_option("--input", in_input, "JSONL corpus")->required();
  ingest->add_option("--slang", in_slang, "two-column slang TSV");
  ingest->add_option("--out", in_out, "cleaned JSONL ('-' for stdout)");

  // segment
  auto* segment = app.add_subcommand("segment", "Extract sticky multi-word segments");
  std::string sg_corpus, sg_out = "-";
  SettingFlags sg_flags;
  segment->add_option("--corpus", sg_corpus, "JSONL corpus")->required();
  segment->add_option("--out", sg_out, "TSV: phrase, n, probability, scp");
  sg_flags.attach(segment);

  // extract
  auto* extract = app.add_subcommand("extract", "Per-author linguistic and cognitive features");
  std::string ex_corpus, ex_matrix, ex_out = "-";
  SettingFlags ex_flags;
  extract->add_option("--corpus", ex_corpus, "JSONL corpus")->required();
  extract->add_option("--matrix", ex_matrix, "correlation matrix CSV (default: bundled)");
  extract->add_option("--out", ex_out, "JSONL");
  ex_flags.attach(extract);

  // train
  auto* train = app.add_subcommand("train", "Train every module and tune alpha/beta");
  std::string tr_corpus, tr_traits, tr_model, tr_module = "all";
  SettingFlags tr_flags;
  train->add_option("--corpus", tr_corpus, "labeled JSONL corpus")->required();
  train->add_option("--traits", tr_traits, "author trait CSV for the correlation matrix");
  train->add_option("--model", tr_model, "bundle output path")->required();
  train->add_option("--module", tr_module, "module whose held-out report is printed")
      ->check(CLI::IsMember({"all", "cluster", "boost", "curve", "conjunct"}));
  tr_flags.attach(train);

  // tune
  auto* tune = app.add_subcommand("tune", "Grid-search alpha/beta and emit the F1 surface");
  std::string tu_corpus, tu_traits, tu_model, tu_metric = "f1", tu_out = "-";
  double tu_step = 0.05;
  SettingFlags tu_flags;
  tune->add_option("--corpus", tu_corpus, "labeled JSONL corpus")->required();
  tune->add_option("--traits", tu_traits, "author trait CSV");
  tune->add_option("--step", tu_step, "grid step");
  tune->add_option("--metric", tu_metric, "tuning metric")->check(CLI::IsMember({"f1"}));
  tune->add_option("--out", tu_out, "surface CSV: alpha, beta, f1");
  tune->add_option("--model", tu_model, "also save the tuned bundle");
  tu_flags.attach(tune, {"grid_step", "alpha", "beta"});

  // infer
  auto* infer = app.add_subcommand("infer", "Predict occupations for every author in a corpus");
  std::string if_model, if_corpus, if_variant = "conjunct", if_out = "-";
  infer->add_option("--model", if_model, "bundle")->required();
  infer->add_option("--corpus", if_corpus, "JSONL corpus")->required();
  infer->add_option("--variant", if_variant, "cluster, boost, curve or conjunct");
  infer->add_option("--out", if_out, "JSONL predictions");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Precision, recall and F1 on held-out authors");
  std::string ev_model, ev_corpus, ev_variant = "conjunct", ev_out = "-";
  bool ev_all_authors = false;
  evaluate->add_option("--model", ev_model, "bundle")->required();
  evaluate->add_option("--corpus", ev_corpus, "labeled JSONL corpus")->required();
  evaluate->add_option("--variant", ev_variant, "cluster, boost, curve, conjunct or all");
  evaluate->add_flag("--all-authors", ev_all_authors, "use every author in the corpus, not the held-out split");
  evaluate->add_option("--out", ev_out, "JSON report, or CSV with --variant all");

  // ablate
  auto* ablate = app.add_subcommand("ablate", "Drop the oldest posts, retrain and evaluate");
  std::string ab_corpus, ab_traits, ab_fractions, ab_out = "-";
  SettingFlags ab_flags;
  ablate->add_option("--corpus", ab_corpus, "timestamped JSONL corpus")->required();
  ablate->add_option("--traits", ab_traits, "author trait CSV");
  ablate->add_option("--fractions", ab_fractions, "extra comma-separated removal fractions");
  ablate->add_option("--out", ab_out, "CSV");
  ab_flags.attach(ablate);

  // bench-index
  auto* bench = app.add_subcommand("bench-index", "Quest latency of the weighted R-tree against a plain R-tree");
  std::string bi_sizes = "10..100", bi_out = "-";
  std::size_t bi_queries = 1000;
  std::uint64_t bi_seed = 42;
  bench->add_option("--boundaries", bi_sizes, "LO..HI (step LO) or a comma list");
  bench->add_option("--queries", bi_queries, "queries per size")->check(CLI::PositiveNumber);
  bench->add_option("--seed", bi_seed, "workload seed");
  bench->add_option("--out", bi_out, "CSV");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a seeded labeled corpus");
  std::string sy_out, sy_traits;
  SettingFlags sy_flags;
  synth->add_option("--out", sy_out, "JSONL corpus")->required();
  synth->add_option("--traits", sy_traits, "write author traits CSV here");
  sy_flags.attach(synth);

  CLI11_PARSE(app, argc, argv);

  auto make_config = [&](const SettingFlags* flags) {
    cp_config* raw = nullptr;
    check(cp_config_new(&raw));
    ConfigPtr c(raw);
    if (!config_path.empty()) check(cp_config_load(c.get(), config_path.c_str()));
    check(cp_config_apply_env(c.get()));
    if (flags) flags->apply(c.get());
    return c;
  };
  auto load_corpus = [](const std::string& path) {
    cp_corpus* raw = nullptr;
    check(cp_corpus_load(path.c_str(), &raw));
    return CorpusPtr(raw);
  };
  auto load_model = [](const std::string& path) {
    cp_model* raw = nullptr;
    check(cp_model_load(path.c_str(), &raw));
    return ModelPtr(raw);
  };

  try {
    if (*ingest) {
      check(cp_ingest(in_input.c_str(), opt(in_slang), in_out.c_str()));
    } else if (*segment) {
      const auto c = make_config(&sg_flags);
      check(cp_segment(c.get(), sg_corpus.c_str(), sg_out.c_str()));
    } else if (*extract) {
      const auto c = make_config(&ex_flags);
      check(cp_extract(c.get(), ex_corpus.c_str(), opt(ex_matrix), ex_out.c_str()));
    } else if (*train) {
      const auto c = make_config(&tr_flags);
      cp_model* raw = nullptr;
      check(cp_train(c.get(), tr_corpus.c_str(), opt(tr_traits), &raw));
      const ModelPtr m(raw);
      check(cp_model_save(m.get(), tr_model.c_str()));
      double a = 0, b = 0;
      check(cp_model_params(m.get(), &a, &b));
      std::fprintf(stderr, "run %s: %zu occupations, alpha=%.2f beta=%.2f\n", cp_model_run_id(m.get()),
                   cp_model_occupations(m.get()), a, b);
      if (tr_module != "all") {
        const auto corpus = load_corpus(tr_corpus);
        cp_corpus* test_raw = nullptr;
        check(cp_model_test_corpus(m.get(), corpus.get(), &test_raw));
        const CorpusPtr test(test_raw);
        if (cp_corpus_posts(test.get()) > 0) {
          cp_report r{};
          check(cp_evaluate(m.get(), test.get(), variant_or_usage(tr_module), nullptr, &r));
          std::fprintf(stderr, "%s held-out: P=%.4f R=%.4f F1=%.4f\n", tr_module.c_str(), r.precision, r.recall,
                       r.f1);
        }
      }
    } else if (*tune) {
      auto c = make_config(&tu_flags);
      check(cp_config_set(c.get(), "grid_step", std::to_string(tu_step).c_str()));
      cp_model* raw = nullptr;
      check(cp_train(c.get(), tu_corpus.c_str(), opt(tu_traits), &raw));
      const ModelPtr m(raw);
      check(cp_model_write_surface(m.get(), tu_out.c_str()));
      double a = 0, b = 0;
      check(cp_model_params(m.get(), &a, &b));
      std::fprintf(stderr, "tuned alpha=%.2f beta=%.2f\n", a, b);
      if (!tu_model.empty()) check(cp_model_save(m.get(), tu_model.c_str()));
    } else if (*infer) {
      const auto v = variant_or_usage(if_variant);
      const auto m = load_model(if_model);
      const auto corpus = load_corpus(if_corpus);
      check(cp_infer(m.get(), corpus.get(), v, if_out.c_str()));
    } else if (*evaluate) {
      const bool all = ev_variant == "all";
      const auto v = all ? CP_VARIANT_CONJUNCT : variant_or_usage(ev_variant);
      const auto m = load_model(ev_model);
      auto corpus = load_corpus(ev_corpus);
      if (!ev_all_authors) {
        cp_corpus* raw = nullptr;
        check(cp_model_test_corpus(m.get(), corpus.get(), &raw));
        corpus.reset(raw);
      }
      if (all) {
        check(cp_evaluate_variants(m.get(), corpus.get(), ev_out.c_str()));
      } else {
        cp_report r{};
        check(cp_evaluate(m.get(), corpus.get(), v, ev_out.c_str(), &r));
      }
    } else if (*ablate) {
      const auto c = make_config(&ab_flags);
      std::vector<double> fs;
      for (const auto& t : split(ab_fractions, ',')) fs.push_back(std::stod(t));
      check(cp_ablate(c.get(), ab_corpus.c_str(), opt(ab_traits), fs.data(), fs.size(), ab_out.c_str()));
    } else if (*bench) {
      std::vector<std::size_t> sizes;
      try {
        sizes = parse_sizes(bi_sizes);
      } catch (const std::logic_error&) {
        throw CLI::ValidationError("--boundaries", "expected LO..HI or a comma list of counts");
      }
      check(cp_bench_index(sizes.data(), sizes.size(), bi_queries, bi_seed, bi_out.c_str()));
    } else if (*synth) {
      const auto c = make_config(&sy_flags);
      check(cp_synth(c.get(), sy_out.c_str(), opt(sy_traits)));
    }
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const Failure& f) {
    std::fprintf(stderr, "cogniprof: %s: %s\n", cp_status_string(f.status), cp_last_error());
    return f.status == CP_E_ARGUMENT ? 2 : 1;
  }
  return 0;
}
