#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <tuple>
#include <unordered_set>
#include <vector>

#include "cogniprof/corpus.hpp"

// LESSN: lexicon-driven linguistic features and their Pearson mapping onto
// the Big-Five cognitive dimensions.
namespace cogniprof::lessn {

enum class LexiconKind { liwc, emoji, splice, senti, nrc };
enum class MatcherKind { word, prefix, emoji };

std::string_view to_string(LexiconKind kind);
std::optional<LexiconKind> parse_lexicon_kind(std::string_view name);

inline constexpr std::array<std::string_view, 10> kNrcCategories = {
    "anger", "fear", "anticipation", "trust", "surprise",
    "sadness", "joy", "disgust", "negative", "positive"};

struct Category {
  std::string name;
  std::unordered_set<std::string> words;
  std::vector<std::string> prefixes;
  std::unordered_set<std::string> emojis;
};

class Lexicon {
 public:
  explicit Lexicon(LexiconKind kind) : kind_(kind) {}

  // Rows are `category<TAB>matcher<TAB>kind` with kind in {word, prefix, emoji}.
  // The lexicon kind comes from a `# lexicon: NAME` header line or, failing
  // that, from the file stem.
  static Lexicon load(const std::filesystem::path& path);
  static Lexicon parse(std::istream& in, std::optional<LexiconKind> kind,
                       std::string_view source = "<lexicon>");

  void add(std::string_view category, std::string_view matcher, MatcherKind kind);

  LexiconKind kind() const { return kind_; }
  const std::vector<Category>& categories() const { return categories_; }
  std::optional<std::size_t> category_index(std::string_view name) const;

  // SENTI categories are polarity scores in {-5..-1} U {1..5}.
  int polarity(std::size_t category) const;

  void match_term(std::string_view term, std::vector<std::size_t>& out) const;
  void match_emoji(std::string_view emoji, std::vector<std::size_t>& out) const;

  std::string feature_name(std::size_t category) const;
  bool contains_word(std::string_view word) const;

  // Canonical TSV rendering; parse(to_tsv()) reproduces the lexicon.
  std::string to_tsv() const;

 private:
  std::size_t ensure_category(std::string_view name);

  LexiconKind kind_;
  std::vector<Category> categories_;
  std::unordered_map<std::string, std::size_t> by_name_;
  std::unordered_map<std::string, std::vector<std::size_t>> word_index_;
  std::unordered_map<std::string, std::vector<std::size_t>> emoji_index_;
  std::vector<std::pair<std::string, std::size_t>> prefix_index_;
  std::vector<std::tuple<std::string, std::string, MatcherKind>> rows_;
};

class LexiconSet {
 public:
  LexiconSet() = default;
  explicit LexiconSet(std::vector<Lexicon> lexicons);

  // Loads every *.tsv file in the directory (sorted by file name).
  static LexiconSet load_dir(const std::filesystem::path& dir);

  const std::vector<Lexicon>& lexicons() const { return lexicons_; }
  bool empty() const { return lexicons_.empty(); }

  // Every feature name the set can emit, sorted.
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  std::uint64_t hash() const;
  std::vector<std::string> words() const;

 private:
  std::vector<Lexicon> lexicons_;
  std::vector<std::string> feature_names_;
};

// Extra SPLICE-like readability features: token counts per word-length band.
inline constexpr std::array<std::string_view, 3> kLengthBands = {
    "splice.wordlen-short", "splice.wordlen-medium", "splice.wordlen-long"};
inline constexpr std::string_view kSentiPositive = "senti.positive";
inline constexpr std::string_view kSentiNegative = "senti.negative";

struct LinguisticFeatureVector {
  std::map<std::string, double> entries;

  double weight(std::string_view name) const;
  double l1() const;
};

// Raw category counts over a set of posts.
struct FeatureCounts {
  std::map<std::string, double> counts;
  double units = 0;  // tokens + emojis
  double senti_positive_sum = 0;
  double senti_negative_sum = 0;
  std::size_t posts = 0;
};

FeatureCounts count_features(std::span<const corpus::CleanPost* const> posts,
                             const LexiconSet& lexicons);
FeatureCounts count_features(std::span<const corpus::CleanPost> posts,
                             const LexiconSet& lexicons);

struct CorpusStats {
  std::map<std::string, double> counts;
  double units = 0;

  // Relative frequency; unseen features get a Laplace-smoothed rate.
  double rate(const std::string& feature) const;
};

CorpusStats corpus_stats(std::span<const corpus::CleanPost> posts, const LexiconSet& lexicons);

LinguisticFeatureVector extract_linguistic(std::span<const corpus::CleanPost* const> author_posts,
                                           const LexiconSet& lexicons,
                                           const CorpusStats& stats);
LinguisticFeatureVector extract_linguistic(std::span<const corpus::CleanPost> author_posts,
                                           const LexiconSet& lexicons,
                                           const CorpusStats& stats);

// ------------------------------------------------------------ Cognitive side

inline constexpr std::size_t kTraitCount = 5;
inline constexpr std::array<std::string_view, kTraitCount> kTraitNames = {
    "openness", "conscientiousness", "extroversion", "agreeableness", "neuroticism"};

using TraitScores = std::array<double, kTraitCount>;

struct CognitiveFeatureVector {
  TraitScores values{};

  double operator[](std::size_t q) const { return values[q]; }
  double& operator[](std::size_t q) { return values[q]; }
  bool operator==(const CognitiveFeatureVector&) const = default;
};

// Throws ErrorCode::numeric when either input is constant.
double pearson(std::span<const double> x, std::span<const double> y);

enum class MatrixProvenance { trained, bundled };

struct CorrelationMatrix {
  std::map<std::string, TraitScores> rows;
  MatrixProvenance provenance = MatrixProvenance::bundled;

  static CorrelationMatrix load_csv(const std::filesystem::path& path);
  static CorrelationMatrix parse_csv(std::istream& in, std::string_view source = "<matrix>");
  void save_csv(std::ostream& out) const;
  void save_csv(const std::filesystem::path& path) const;

  const TraitScores* row(const std::string& feature) const;
};

struct TrainingRow {
  LinguisticFeatureVector features;
  TraitScores traits{};
};

inline constexpr std::size_t kMinCorrelationRows = 10;

CorrelationMatrix train_correlation(std::span<const TrainingRow> rows);

CognitiveFeatureVector map_to_cognitive(const LinguisticFeatureVector& lv,
                                        const CorrelationMatrix& m);

}  // namespace cogniprof::lessn
