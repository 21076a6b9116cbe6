#include "cogniprof/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <map>
#include <random>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "cogniprof/error.hpp"
#include "cogniprof/log.hpp"

#ifndef COGNIPROF_DEFAULT_DATA_DIR
#define COGNIPROF_DEFAULT_DATA_DIR "data"
#endif

namespace cogniprof::harness {
namespace {

using coherence::kNoClass;
using coherence::ModuleScores;

std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 1469598103934665603ull) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

struct AuthorGroup {
  std::string author_id;
  std::vector<const RawPost*> posts;
};

std::vector<AuthorGroup> group_raw(std::span<const RawPost> posts) {
  std::vector<AuthorGroup> groups;
  std::unordered_map<std::string, std::size_t> at;
  for (const auto& p : posts) {
    auto [it, fresh] = at.emplace(p.author_id, groups.size());
    if (fresh) groups.push_back(AuthorGroup{p.author_id, {}});
    groups[it->second].posts.push_back(&p);
  }
  return groups;
}

std::optional<std::string> group_label(const AuthorGroup& g) {
  std::optional<std::string> label;
  for (const auto* p : g.posts) {
    if (!p->occupation) continue;
    if (label && *label != *p->occupation) {
      fail(ErrorCode::validation, "author " + g.author_id + " has conflicting occupations '" + *label +
                                      "' and '" + *p->occupation + "'");
    }
    label = p->occupation;
  }
  return label;
}

template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min<std::size_t>(hw, n / 16 + 1);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// Token document: content tokens plus every known phrase glued with '_'.
std::vector<corpus::Term> author_document(std::span<const corpus::CleanPost> posts, const ModelBundle& m,
                                          const std::unordered_set<std::string>& phrases) {
  std::vector<corpus::Term> doc;
  const std::size_t max_n = m.config.max_phrase_length;
  for (const auto& p : posts) {
    for (const auto& t : p.tokens) {
      if (!m.stopwords.contains(t)) doc.push_back(t);
    }
    if (phrases.empty()) continue;
    for (std::size_t i = 0; i < p.tokens.size(); ++i) {
      std::string joined = p.tokens[i];
      for (std::size_t n = 2; n <= max_n && i + n <= p.tokens.size(); ++n) {
        joined += ' ';
        joined += p.tokens[i + n - 1];
        if (phrases.count(joined)) {
          std::string glued = joined;
          std::replace(glued.begin(), glued.end(), ' ', '_');
          doc.push_back(std::move(glued));
        }
      }
    }
  }
  return doc;
}

std::vector<double> joint_of(const lessn::CognitiveFeatureVector& c, const std::vector<double>& tfidf) {
  std::vector<double> j(c.values.begin(), c.values.end());
  j.insert(j.end(), tfidf.begin(), tfidf.end());
  return j;
}

struct Modules {
  svm::SvmModel svm;
  boost::BoostModel boost;
  icf::CurveModel curve;
  rwtree::RwTree tree;
};

ModuleScores module_scores(const Modules& m, const AuthorFeatures& a, std::size_t classes, std::size_t k,
                           const std::vector<std::string>& occupations) {
  ModuleScores s;
  s.cluster = m.svm.cluster_weights(a.joint);
  s.boost = m.boost.weights(a.cognitive);
  s.curve = m.curve.scores(a.cognitive);
  s.label = a.label.value_or(kNoClass);
  if (!m.tree.empty()) {
    s.candidates.assign(classes, false);
    rwtree::Point p;
    std::copy(a.cognitive.values.begin(), a.cognitive.values.end(), p.begin());
    for (auto id : m.tree.candidates(p, k)) {
      const auto& name = m.tree.entries()[id].name;
      const auto it = std::lower_bound(occupations.begin(), occupations.end(), name);
      if (it != occupations.end() && *it == name) s.candidates[static_cast<std::size_t>(it - occupations.begin())] = true;
    }
    if (std::none_of(s.candidates.begin(), s.candidates.end(), [](bool b) { return b; })) s.candidates.clear();
  }
  return s;
}

Modules fit_modules(std::span<const AuthorFeatures> train, std::size_t classes, const svm::KernelParams& kp,
                    const PipelineConfig& cfg) {
  Modules m;
  std::vector<svm::AuthorRepresentation> reps;
  std::vector<lessn::CognitiveFeatureVector> cog;
  std::vector<std::size_t> labels;
  for (const auto& a : train) {
    svm::AuthorRepresentation r;
    r.cognitive = a.cognitive.values;
    r.tfidf.assign(a.joint.begin() + lessn::kTraitCount, a.joint.end());
    r.label = a.label;
    reps.push_back(std::move(r));
    cog.push_back(a.cognitive);
    labels.push_back(*a.label);
  }
  m.svm = svm::SvmModel::train(reps, classes, kp);
  m.boost = boost::BoostModel::train(cog, labels, classes, cfg.boost);
  m.curve = icf::CurveModel::train(cog, labels, classes);
  return m;
}

// One rectangle per occupation over its training authors' cognitive points,
// weighted by the mean fused weight those authors give their own class.
rwtree::RwTree build_tree(const Modules& m, std::span<const AuthorFeatures> train,
                          const std::vector<std::string>& occupations, const coherence::CoherenceParams& params,
                          const PipelineConfig& cfg) {
  rwtree::RwTreeOptions opts;
  opts.delta = cfg.delta;
  rwtree::RwTree tree(opts);
  Modules scoring{m.svm, m.boost, m.curve, rwtree::RwTree(opts)};
  std::vector<rwtree::OccupationNode> nodes(occupations.size());
  std::vector<double> sums(occupations.size(), 0);
  for (std::size_t c = 0; c < occupations.size(); ++c) nodes[c].name = occupations[c];
  for (const auto& a : train) {
    const auto s = module_scores(scoring, a, occupations.size(), cfg.candidate_k, occupations);
    const auto fused = coherence::fuse(s, params);
    const auto c = *a.label;
    sums[c] += fused[c];
    rwtree::OrientPoint op;
    std::copy(a.cognitive.values.begin(), a.cognitive.values.end(), op.coords.begin());
    op.author_id = a.author_id;
    nodes[c].orients.push_back(std::move(op));
  }
  for (std::size_t c = 0; c < occupations.size(); ++c) {
    auto& n = nodes[c];
    if (n.orients.size() < cfg.delta) {
      log::warn("occupation '" + n.name + "' has fewer than delta training authors; left out of the index");
      continue;
    }
    n.weight = std::clamp(sums[c] / static_cast<double>(n.orients.size()), 0.0, 1.0);
    tree.insert(n);
  }
  return tree;
}

Split stratified(const std::vector<std::pair<std::string, std::string>>& labeled, double fraction,
                 std::uint64_t seed) {
  std::map<std::string, std::vector<std::string>> by_class;
  for (const auto& [id, occ] : labeled) by_class[occ].push_back(id);
  std::mt19937_64 rng(seed);
  Split s;
  for (auto& [occ, ids] : by_class) {
    std::sort(ids.begin(), ids.end());
    std::shuffle(ids.begin(), ids.end(), rng);
    auto take = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(ids.size())));
    take = std::min(take, ids.size() - 1);
    s.test.insert(s.test.end(), ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(take));
    s.train.insert(s.train.end(), ids.begin() + static_cast<std::ptrdiff_t>(take), ids.end());
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

// Stratified fold index per author, in input order.
std::vector<std::size_t> fold_assignment(const std::vector<std::pair<std::string, std::string>>& labeled,
                                         std::size_t folds, std::uint64_t seed) {
  std::map<std::string, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labeled.size(); ++i) by_class[labeled[i].second].push_back(i);
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> out(labeled.size(), 0);
  std::size_t next = 0;
  for (auto& [occ, idx] : by_class) {
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return labeled[a].first < labeled[b].first; });
    std::shuffle(idx.begin(), idx.end(), rng);
    for (auto i : idx) out[i] = next++ % folds;
  }
  return out;
}

Modules bundle_modules(const ModelBundle& m) { return Modules{m.svm, m.boost, m.curve, m.tree}; }

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const auto i = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size()))) - (q > 0 ? 1 : 0);
  return v[std::min(i, v.size() - 1)];
}

}  // namespace

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::cluster: return "cluster";
    case Variant::boost: return "boost";
    case Variant::curve: return "curve";
    case Variant::conjunct: return "conjunct";
  }
  return "?";
}

Variant parse_variant(std::string_view name) {
  for (auto v : {Variant::cluster, Variant::boost, Variant::curve, Variant::conjunct}) {
    if (to_string(v) == name) return v;
  }
  fail(ErrorCode::argument, "unknown variant '" + std::string(name) + "' (cluster, boost, curve, conjunct)");
}

std::filesystem::path Resources::default_dir() {
  if (const char* env = std::getenv("COGNIPROF_DATA_DIR"); env && *env) return env;
  return COGNIPROF_DEFAULT_DATA_DIR;
}

Resources Resources::load(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) fail(ErrorCode::io, "data directory not found: " + dir.string());
  Resources r;
  r.lexicons = lessn::LexiconSet::load_dir(dir / "lexicons");
  if (fs::exists(dir / "slang.tsv")) r.slang = corpus::SlangTable::load(dir / "slang.tsv");
  r.stopwords = fs::exists(dir / "stopwords.txt") ? corpus::StopWords::load(dir / "stopwords.txt")
                                                  : corpus::StopWords::english();
  if (fs::exists(dir / "default_matrix.csv")) {
    r.bundled_matrix = lessn::CorrelationMatrix::load_csv(dir / "default_matrix.csv");
    r.bundled_matrix->provenance = lessn::MatrixProvenance::bundled;
  }
  return r;
}

void PipelineConfig::validate() const {
  if (!(test_fraction >= 0 && test_fraction < 1)) fail(ErrorCode::argument, "test_fraction must be in [0,1)");
  if (tuning_folds < 2) fail(ErrorCode::argument, "tuning_folds must be at least 2");
  if (max_phrase_length < 2 || max_phrase_length > segmentation::kMaxPhraseLength) {
    fail(ErrorCode::argument, "max_phrase_length must be in [2, " + std::to_string(segmentation::kMaxPhraseLength) + "]");
  }
  if (!(segment_epsilon > 0)) fail(ErrorCode::argument, "segment epsilon must be positive");
  if (!(popularity_cap > 0 && popularity_cap <= 1)) fail(ErrorCode::argument, "popularity_cap must be in (0,1]");
  if (tfidf_dims == 0) fail(ErrorCode::argument, "tfidf_dims must be positive");
  if (!(svm_c > 0)) fail(ErrorCode::argument, "C must be positive");
  if (eta && !(*eta > 0)) fail(ErrorCode::argument, "eta must be positive");
  boost.validate();
  if (coherence) coherence->validate();
  if (delta == 0) fail(ErrorCode::argument, "delta must be positive");
  if (candidate_k == 0) fail(ErrorCode::argument, "candidate_k must be positive");
  if (abstain_floor && !(*abstain_floor >= 0 && *abstain_floor <= 1)) {
    fail(ErrorCode::argument, "abstain floor must be in [0,1]");
  }
}

std::vector<std::pair<std::string, std::string>> author_labels(std::span<const RawPost> posts) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& g : group_raw(posts)) {
    if (auto l = group_label(g)) out.emplace_back(g.author_id, *l);
  }
  return out;
}

Split split_authors(std::span<const RawPost> posts, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction >= 0 && test_fraction < 1)) fail(ErrorCode::argument, "test_fraction must be in [0,1)");
  return stratified(author_labels(posts), test_fraction, seed);
}

std::optional<std::size_t> ModelBundle::occupation_index(std::string_view name) const {
  const auto it = std::lower_bound(occupations.begin(), occupations.end(), name);
  if (it == occupations.end() || *it != name) return std::nullopt;
  return static_cast<std::size_t>(it - occupations.begin());
}

std::vector<RawPost> posts_of(std::span<const RawPost> posts, const std::vector<std::string>& ids) {
  const std::unordered_set<std::string> keep(ids.begin(), ids.end());
  std::vector<RawPost> out;
  for (const auto& p : posts) {
    if (keep.count(p.author_id)) out.push_back(p);
  }
  return out;
}

namespace {

// Featurization shared by training and inference once the matrix and the
// TF-IDF model exist.
AuthorFeatures finish_features(const ModelBundle& m, const std::unordered_set<std::string>& phrases,
                               std::string id, std::optional<std::size_t> label,
                               const std::vector<corpus::CleanPost>& clean) {
  AuthorFeatures a;
  a.author_id = std::move(id);
  a.label = label;
  a.linguistic = lessn::extract_linguistic(std::span<const corpus::CleanPost>(clean), m.lexicons, m.stats);
  a.cognitive = lessn::map_to_cognitive(a.linguistic, m.matrix);
  a.document = author_document(clean, m, phrases);
  a.joint = joint_of(a.cognitive, m.tfidf.transform(a.document));
  return a;
}

}  // namespace

std::vector<AuthorFeatures> featurize(const ModelBundle& m, std::span<const RawPost> posts) {
  const corpus::NoiseReducer reducer(m.slang, m.vocabulary);
  const std::unordered_set<std::string> phrases(m.phrases.begin(), m.phrases.end());
  const auto groups = group_raw(posts);
  std::vector<AuthorFeatures> out(groups.size());
  parallel_for(groups.size(), [&](std::size_t i) {
    const auto& g = groups[i];
    std::vector<corpus::CleanPost> clean;
    for (const auto* p : g.posts) clean.push_back(reducer.reduce(*p));
    std::optional<std::size_t> label;
    if (auto l = group_label(g)) label = m.occupation_index(*l);
    out[i] = finish_features(m, phrases, g.author_id, label, clean);
  });
  return out;
}

std::vector<ModuleScores> score_authors(const ModelBundle& m, std::span<const AuthorFeatures> authors) {
  const auto mods = bundle_modules(m);
  std::vector<ModuleScores> out(authors.size());
  parallel_for(authors.size(), [&](std::size_t i) {
    out[i] = module_scores(mods, authors[i], m.occupations.size(), m.config.candidate_k, m.occupations);
  });
  return out;
}

coherence::CoherenceParams variant_params(const ModelBundle& m, Variant v) {
  switch (v) {
    case Variant::cluster: return {0, 0};
    case Variant::boost: return {1, 0};
    case Variant::curve: return {0, 1};
    case Variant::conjunct: return m.coherence;
  }
  return m.coherence;
}

ModelBundle train_model(std::span<const RawPost> posts, std::span<const AuthorTruth> traits,
                        const Resources& res, const PipelineConfig& cfg, const Split* split) {
  cfg.validate();
  if (res.lexicons.empty()) fail(ErrorCode::argument, "training needs at least one lexicon");
  ModelBundle m;
  m.config = cfg;
  m.lexicons = res.lexicons;
  m.slang = res.slang;
  m.stopwords = res.stopwords;

  std::vector<RawPost> train_posts;
  if (split) {
    m.train_ids = split->train;
    m.test_ids = split->test;
    train_posts = posts_of(posts, split->train);
  } else {
    train_posts.assign(posts.begin(), posts.end());
  }
  const auto groups = group_raw(train_posts);
  std::vector<std::pair<std::string, std::string>> labeled;
  for (const auto& g : groups) {
    if (auto l = group_label(g)) labeled.emplace_back(g.author_id, *l);
  }
  if (!split) {
    for (const auto& [id, occ] : labeled) m.train_ids.push_back(id);
    std::sort(m.train_ids.begin(), m.train_ids.end());
  }
  for (const auto& [id, occ] : labeled) m.occupations.push_back(occ);
  std::sort(m.occupations.begin(), m.occupations.end());
  m.occupations.erase(std::unique(m.occupations.begin(), m.occupations.end()), m.occupations.end());
  if (m.occupations.size() < 2) fail(ErrorCode::validation, "training needs authors from at least two occupations");

  std::vector<std::string> extra = m.lexicons.words();
  for (const auto& [key, expansion] : m.slang.entries()) {
    for (auto& w : corpus::tokenize(expansion)) extra.push_back(std::move(w));
  }
  m.vocabulary = corpus::build_vocabulary(train_posts, extra);
  const corpus::NoiseReducer reducer(m.slang, m.vocabulary);

  std::vector<corpus::CleanPost> clean;
  clean.reserve(train_posts.size());
  for (const auto& p : train_posts) clean.push_back(reducer.reduce(p));
  m.stats = lessn::corpus_stats(clean, m.lexicons);

  // Per-author clean posts, labeled authors only, in group order.
  std::unordered_map<std::string, std::size_t> label_of;
  for (const auto& [id, occ] : labeled) label_of[id] = *m.occupation_index(occ);
  std::vector<std::vector<corpus::CleanPost>> author_clean;
  std::vector<std::string> author_ids;
  {
    std::unordered_map<std::string, std::size_t> at;
    for (const auto& cp : clean) {
      if (!label_of.count(cp.author_id)) continue;
      auto [it, fresh] = at.emplace(cp.author_id, author_clean.size());
      if (fresh) {
        author_clean.emplace_back();
        author_ids.push_back(cp.author_id);
      }
      author_clean[it->second].push_back(cp);
    }
  }

  // Correlation matrix from traits when there are enough of them.
  std::unordered_map<std::string, const AuthorTruth*> trait_of;
  for (const auto& t : traits) trait_of[t.author_id] = &t;
  std::vector<lessn::TrainingRow> rows;
  for (std::size_t i = 0; i < author_ids.size(); ++i) {
    const auto it = trait_of.find(author_ids[i]);
    if (it == trait_of.end()) continue;
    rows.push_back(lessn::TrainingRow{
        lessn::extract_linguistic(std::span<const corpus::CleanPost>(author_clean[i]), m.lexicons, m.stats),
        it->second->traits});
  }
  if (rows.size() >= lessn::kMinCorrelationRows) {
    m.matrix = lessn::train_correlation(rows);
    m.matrix.provenance = lessn::MatrixProvenance::trained;
  } else if (res.bundled_matrix) {
    if (!traits.empty()) log::warn("too few training authors with traits; using the bundled matrix");
    m.matrix = *res.bundled_matrix;
    m.matrix.provenance = lessn::MatrixProvenance::bundled;
  } else {
    fail(ErrorCode::validation, "no traits for at least " + std::to_string(lessn::kMinCorrelationRows) +
                                    " training authors and no bundled matrix");
  }

  if (cfg.use_phrases) {
    const auto profiles = segmentation::term_profiles(clean, m.lexicons);
    const auto graph = segmentation::build_term_graph(clean, profiles, cfg.segment_epsilon, cfg.max_phrase_length);
    for (const auto& ph : segmentation::extract_segments(clean, graph, cfg.phrase_top_k, cfg.popularity_cap,
                                                         cfg.max_phrase_length)) {
      m.phrases.push_back(ph.text());
    }
  }
  const std::unordered_set<std::string> phrase_set(m.phrases.begin(), m.phrases.end());

  std::vector<std::vector<corpus::Term>> docs(author_ids.size());
  for (std::size_t i = 0; i < author_ids.size(); ++i) docs[i] = author_document(author_clean[i], m, phrase_set);
  m.tfidf = svm::Tfidf::fit(docs, cfg.tfidf_dims);

  std::vector<AuthorFeatures> feats(author_ids.size());
  parallel_for(author_ids.size(), [&](std::size_t i) {
    feats[i] = finish_features(m, phrase_set, author_ids[i], label_of.at(author_ids[i]), author_clean[i]);
  });

  std::vector<std::vector<double>> joint_rows;
  for (const auto& f : feats) joint_rows.push_back(f.joint);
  auto kp = svm::KernelParams::defaults(lessn::kTraitCount + cfg.tfidf_dims);
  if (cfg.eta) kp.eta = *cfg.eta;
  kp.C = cfg.svm_c;
  if (cfg.inverse_variance) kp.scale = svm::inverse_std_scaling(joint_rows);

  const std::size_t classes = m.occupations.size();
  if (cfg.coherence) {
    m.coherence = *cfg.coherence;
  } else {
    // Tune on out-of-fold scores over the training authors.
    std::vector<std::pair<std::string, std::string>> inner;
    for (const auto& f : feats) inner.emplace_back(f.author_id, m.occupations[*f.label]);
    const auto folds = fold_assignment(inner, cfg.tuning_folds, cfg.seed ^ 0x5bd1e995ull);
    std::vector<ModuleScores> val_scores;
    for (std::size_t k = 0; k < cfg.tuning_folds; ++k) {
      std::vector<AuthorFeatures> fit_part, val_part;
      for (std::size_t i = 0; i < feats.size(); ++i) (folds[i] == k ? val_part : fit_part).push_back(feats[i]);
      if (val_part.empty()) continue;
      auto inner_mods = fit_modules(fit_part, classes, kp, cfg);
      inner_mods.tree = build_tree(inner_mods, fit_part, m.occupations, {0, 0}, cfg);
      for (const auto& f : val_part) {
        val_scores.push_back(module_scores(inner_mods, f, classes, cfg.candidate_k, m.occupations));
      }
    }
    m.tuning = coherence::tune(val_scores, cfg.grid_step);
    m.coherence = m.tuning.best;
  }

  auto mods = fit_modules(feats, classes, kp, cfg);
  m.tree = build_tree(mods, feats, m.occupations, m.coherence, cfg);
  m.svm = std::move(mods.svm);
  m.boost = std::move(mods.boost);
  m.curve = std::move(mods.curve);

  std::ostringstream id;
  id << cfg.seed << '|' << m.lexicons.hash() << '|' << train_posts.size();
  for (const auto& t : m.train_ids) id << '|' << t;
  m.run_id = hex64(fnv1a(id.str()));
  return m;
}

std::vector<AuthorPrediction> predict(const ModelBundle& m, std::span<const RawPost> posts, Variant v) {
  const auto feats = featurize(m, posts);
  const auto scores = score_authors(m, feats);
  const auto params = variant_params(m, v);
  const auto groups = group_raw(posts);
  std::vector<AuthorPrediction> out;
  for (std::size_t i = 0; i < feats.size(); ++i) {
    AuthorPrediction p;
    p.author_id = feats[i].author_id;
    p.truth = group_label(groups[i]);
    p.fused = coherence::fuse(scores[i], params);
    const auto best = coherence::fuse_predict(scores[i], params);
    if (best != kNoClass) {
      p.weight = p.fused[best];
      if (!m.config.abstain_floor || p.weight > *m.config.abstain_floor) p.occupation = m.occupations[best];
    }
    out.push_back(std::move(p));
  }
  return out;
}

bool EvalReport::same_metrics(const EvalReport& o) const {
  return variant == o.variant && precision == o.precision && recall == o.recall && f1 == o.f1 &&
         correct == o.correct && assigned == o.assigned && labeled == o.labeled &&
         occupations == o.occupations && confusion == o.confusion;
}

EvalReport evaluate(const ModelBundle& m, std::span<const RawPost> test_posts, Variant v) {
  const auto groups = group_raw(test_posts);
  if (groups.empty()) fail(ErrorCode::validation, "evaluation needs at least one test author");
  const std::unordered_set<std::string> trained(m.train_ids.begin(), m.train_ids.end());
  std::vector<std::optional<std::string>> truth(groups.size());
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (trained.count(groups[i].author_id)) {
      fail(ErrorCode::validation, "test author " + groups[i].author_id + " was in the training set");
    }
    truth[i] = group_label(groups[i]);
    if (!truth[i]) fail(ErrorCode::validation, "test author " + groups[i].author_id + " has no occupation label");
  }

  const auto params = variant_params(m, v);
  const auto mods = bundle_modules(m);
  const corpus::NoiseReducer reducer(m.slang, m.vocabulary);
  const std::unordered_set<std::string> phrases(m.phrases.begin(), m.phrases.end());
  const std::size_t classes = m.occupations.size();
  std::vector<std::size_t> predicted(groups.size(), kNoClass);
  std::vector<double> latency(groups.size());
  parallel_for(groups.size(), [&](std::size_t i) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<corpus::CleanPost> clean;
    for (const auto* p : groups[i].posts) clean.push_back(reducer.reduce(*p));
    const auto f = finish_features(m, phrases, groups[i].author_id, std::nullopt, clean);
    const auto s = module_scores(mods, f, classes, m.config.candidate_k, m.occupations);
    auto best = coherence::fuse_predict(s, params);
    if (best != kNoClass && m.config.abstain_floor && !(coherence::fuse(s, params)[best] > *m.config.abstain_floor)) {
      best = kNoClass;
    }
    predicted[i] = best;
    latency[i] = std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t0).count();
  });

  EvalReport r;
  r.variant = std::string(to_string(v));
  r.occupations = m.occupations;
  r.confusion.assign(classes, std::vector<std::size_t>(classes + 1, 0));
  std::vector<std::size_t> truth_idx(groups.size());
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const auto t = m.occupation_index(*truth[i]);
    // Occupations unseen in training stay labeled but can never be matched.
    truth_idx[i] = t.value_or(kNoClass - 1);
    if (t) ++r.confusion[*t][predicted[i] == kNoClass ? classes : predicted[i]];
  }
  const auto s = coherence::f1_score(predicted, truth_idx);
  r.correct = s.correct;
  r.assigned = s.assigned;
  r.labeled = s.labeled;
  r.precision = s.precision;
  r.recall = m.config.coverage_recall ? static_cast<double>(s.assigned) / static_cast<double>(s.labeled) : s.recall;
  r.f1 = r.precision + r.recall > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  r.latency_median_us = quantile(latency, 0.5);
  r.latency_p95_us = quantile(latency, 0.95);
  return r;
}

EvalReport run_variant(const ModelBundle& m, Variant v, std::span<const RawPost> test_posts) {
  return evaluate(m, test_posts, v);
}

std::vector<RawPost> drop_oldest(std::span<const RawPost> posts, double fraction) {
  if (!(fraction >= 0 && fraction < 1)) fail(ErrorCode::argument, "removal fraction must be in [0,1)");
  std::vector<bool> keep(posts.size(), true);
  std::unordered_map<std::string, std::vector<std::size_t>> by_author;
  for (std::size_t i = 0; i < posts.size(); ++i) {
    if (!posts[i].timestamp) fail(ErrorCode::validation, "post " + posts[i].post_id + " has no timestamp");
    by_author[posts[i].author_id].push_back(i);
  }
  for (auto& [id, idx] : by_author) {
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return *posts[a].timestamp < *posts[b].timestamp;
    });
    auto drop = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(idx.size())));
    drop = std::min(drop, idx.size() - 1);
    for (std::size_t k = 0; k < drop; ++k) keep[idx[k]] = false;
  }
  std::vector<RawPost> out;
  for (std::size_t i = 0; i < posts.size(); ++i) {
    if (keep[i]) out.push_back(posts[i]);
  }
  return out;
}

std::vector<AblationPoint> history_ablation(const PipelineConfig& cfg, std::span<const RawPost> posts,
                                            std::span<const AuthorTruth> traits, const Resources& res,
                                            std::span<const double> fractions) {
  std::vector<double> fs = {0.0, 0.2, 0.3, 0.5};
  for (double f : fractions) {
    if (!(f >= 0 && f < 1)) fail(ErrorCode::argument, "removal fraction must be in [0,1)");
    fs.push_back(f);
  }
  std::sort(fs.begin(), fs.end());
  fs.erase(std::unique(fs.begin(), fs.end()), fs.end());
  const auto split = split_authors(posts, cfg.test_fraction, cfg.seed);
  if (split.test.empty()) fail(ErrorCode::validation, "ablation needs a non-empty test split");
  std::vector<AblationPoint> out;
  for (double f : fs) {
    const auto kept = drop_oldest(posts, f);
    const auto model = train_model(kept, traits, res, cfg, &split);
    out.push_back(AblationPoint{f, evaluate(model, posts_of(kept, split.test))});
  }
  return out;
}

}  // namespace cogniprof::harness
