#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "cogniprof/boost.hpp"
#include "cogniprof/coherence.hpp"
#include "cogniprof/corpus.hpp"
#include "cogniprof/icf.hpp"
#include "cogniprof/lessn.hpp"
#include "cogniprof/rwtree.hpp"
#include "cogniprof/segmentation.hpp"
#include "cogniprof/svm.hpp"
#include "cogniprof/synthetic.hpp"

// Training pipeline, evaluation, ablation, index benchmark and the model
// bundle file.
namespace cogniprof::harness {

using corpus::RawPost;
using synthetic::AuthorTruth;

inline constexpr int kFormatVersion = 1;
inline constexpr std::string_view kBundleMagic = "COGNIPROF-MODEL";

enum class Variant { cluster, boost, curve, conjunct };

std::string_view to_string(Variant v);
// Throws ErrorCode::argument on unknown names.
Variant parse_variant(std::string_view name);

struct Resources {
  lessn::LexiconSet lexicons;
  corpus::SlangTable slang;
  corpus::StopWords stopwords;
  std::optional<lessn::CorrelationMatrix> bundled_matrix;

  // lexicons/*.tsv, slang.tsv, stopwords.txt, default_matrix.csv; missing
  // optional files fall back to built-ins.
  static Resources load(const std::filesystem::path& data_dir);
  // The data directory configured at build time, or $COGNIPROF_DATA_DIR.
  static std::filesystem::path default_dir();
};

struct PipelineConfig {
  std::uint64_t seed = 42;
  double test_fraction = 0.2;
  // Cross-validation folds over the training authors for alpha/beta tuning.
  std::size_t tuning_folds = 5;

  bool use_phrases = true;
  double segment_epsilon = segmentation::kDefaultEpsilon;
  std::size_t max_phrase_length = segmentation::kMaxPhraseLength;
  std::size_t phrase_top_k = 1000;
  double popularity_cap = segmentation::kDefaultPopularityCap;

  std::size_t tfidf_dims = svm::kDefaultTfidfDims;
  double svm_c = 1.0;
  std::optional<double> eta;
  bool inverse_variance = true;

  boost::BoostParams boost;

  double grid_step = coherence::kDefaultGridStep;
  std::optional<coherence::CoherenceParams> coherence;

  std::size_t delta = rwtree::kDefaultDelta;
  std::size_t candidate_k = 1;

  bool coverage_recall = false;
  std::optional<double> abstain_floor;

  void validate() const;
};

struct Split {
  std::vector<std::string> train;
  std::vector<std::string> test;
};

// Seeded split stratified by occupation; every class keeps at least one
// training author. Unlabeled authors are ignored.
Split split_authors(std::span<const RawPost> posts, double test_fraction, std::uint64_t seed);

// Author id -> occupation from the post labels; conflicting labels throw.
std::vector<std::pair<std::string, std::string>> author_labels(std::span<const RawPost> posts);

struct AuthorFeatures {
  std::string author_id;
  std::optional<std::size_t> label;
  lessn::LinguisticFeatureVector linguistic;
  lessn::CognitiveFeatureVector cognitive;
  std::vector<corpus::Term> document;
  std::vector<double> joint;
};

struct ModelBundle {
  int format_version = kFormatVersion;
  std::string run_id;
  PipelineConfig config;

  std::vector<std::string> occupations;
  lessn::LexiconSet lexicons;
  corpus::SlangTable slang;
  corpus::Vocabulary vocabulary;
  corpus::StopWords stopwords;
  lessn::CorpusStats stats;
  lessn::CorrelationMatrix matrix;
  std::vector<std::string> phrases;
  svm::Tfidf tfidf;
  svm::SvmModel svm;
  boost::BoostModel boost;
  icf::CurveModel curve;
  coherence::CoherenceParams coherence;
  coherence::TuneResult tuning;
  rwtree::RwTree tree;
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;

  std::optional<std::size_t> occupation_index(std::string_view name) const;
};

// Trains on the posts of `train_ids` (all labeled authors when empty).
// Traits, when given for at least ten training authors, fit the correlation
// matrix; otherwise the bundled matrix is used.
ModelBundle train_model(std::span<const RawPost> posts, std::span<const AuthorTruth> traits,
                        const Resources& resources, const PipelineConfig& config,
                        const Split* split = nullptr);

// Cleans and featurizes each author's posts with the bundle's resources.
std::vector<AuthorFeatures> featurize(const ModelBundle& model, std::span<const RawPost> posts);

std::vector<coherence::ModuleScores> score_authors(const ModelBundle& model,
                                                   std::span<const AuthorFeatures> authors);

coherence::CoherenceParams variant_params(const ModelBundle& model, Variant v);

struct AuthorPrediction {
  std::string author_id;
  std::optional<std::string> truth;
  std::optional<std::string> occupation;  // empty when abstaining
  double weight = 0;
  std::vector<double> fused;
};

std::vector<AuthorPrediction> predict(const ModelBundle& model, std::span<const RawPost> posts,
                                      Variant v = Variant::conjunct);

struct EvalReport {
  std::string variant;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::size_t correct = 0;
  std::size_t assigned = 0;
  std::size_t labeled = 0;
  std::vector<std::string> occupations;
  // confusion[truth][predicted]; the extra last column counts abstentions.
  std::vector<std::vector<std::size_t>> confusion;
  double latency_median_us = 0;
  double latency_p95_us = 0;

  // Every field but the latencies.
  bool same_metrics(const EvalReport& other) const;
};

// Test authors must be labeled and disjoint from the bundle's training set.
EvalReport evaluate(const ModelBundle& model, std::span<const RawPost> test_posts,
                    Variant v = Variant::conjunct);
EvalReport run_variant(const ModelBundle& model, Variant v, std::span<const RawPost> test_posts);

std::vector<RawPost> posts_of(std::span<const RawPost> posts, const std::vector<std::string>& author_ids);

struct AblationPoint {
  double fraction = 0;
  EvalReport report;
};

// Drops the oldest floor(f * n) posts of every author (keeping one), then
// retrains and evaluates on the same author split. Fractions 0.2, 0.3 and
// 0.5 are always included, as is 0.
std::vector<AblationPoint> history_ablation(const PipelineConfig& config, std::span<const RawPost> posts,
                                            std::span<const AuthorTruth> traits, const Resources& resources,
                                            std::span<const double> fractions);
std::vector<RawPost> drop_oldest(std::span<const RawPost> posts, double fraction);

struct BenchRow {
  std::size_t boundaries = 0;
  std::size_t queries = 0;
  double rwtree_median_us = 0;
  double rwtree_p95_us = 0;
  double rtree_median_us = 0;
  double rtree_p95_us = 0;
  double ratio = 0;  // median RwTree / median R-tree
};

struct BenchOptions {
  std::uint64_t seed = 42;
  std::size_t repetitions = 31;
};

// Seeded rectangle workload per size; answers of both indexes are checked
// equal before any timing.
std::vector<BenchRow> bench_index(std::span<const std::size_t> sizes, std::size_t queries,
                                  const BenchOptions& options = {});
rwtree::RwTree bench_tree(std::size_t boundaries, std::uint64_t seed);
std::vector<rwtree::Point> bench_queries(const rwtree::RwTree& tree, std::size_t queries, std::uint64_t seed);

void write_bench_csv(std::ostream& out, std::span<const BenchRow> rows);
void write_report_json(std::ostream& out, const EvalReport& report);
void write_reports_csv(std::ostream& out, std::span<const EvalReport> reports);
void write_surface_csv(std::ostream& out, const coherence::TuneResult& tuning);
void write_predictions_jsonl(std::ostream& out, std::span<const AuthorPrediction> predictions);

void save_model(const ModelBundle& model, const std::filesystem::path& path);
void save_model(const ModelBundle& model, std::ostream& out);
ModelBundle load_model(const std::filesystem::path& path);
ModelBundle load_model(std::istream& in, std::string_view source = "<model>");

}  // namespace cogniprof::harness
