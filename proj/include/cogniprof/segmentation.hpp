#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "cogniprof/corpus.hpp"
#include "cogniprof/lessn.hpp"

// Term graph over a corpus and sticky multi-word segment extraction.
namespace cogniprof::segmentation {

using corpus::Term;

inline constexpr double kDefaultEpsilon = 1e-6;
inline constexpr std::size_t kMaxPhraseLength = 5;
inline constexpr std::size_t kDefaultTopK = 10000;
inline constexpr double kDefaultPopularityCap = 0.5;
inline constexpr double kNoScore = -std::numeric_limits<double>::infinity();

using TermFeatures = std::unordered_map<Term, lessn::LinguisticFeatureVector>;

// Per-term lexicon profile: the mean category-count vector of the posts that
// contain the term.
TermFeatures term_profiles(std::span<const corpus::CleanPost> posts,
                           const lessn::LexiconSet& lexicons);

struct Edge {
  Term x;
  Term y;
  double coherence = 0;
};

class TermGraph {
 public:
  double epsilon() const { return epsilon_; }
  std::size_t max_n() const { return max_n_; }
  std::size_t node_count() const { return terms_.size(); }
  std::size_t post_count() const { return post_count_; }
  std::size_t author_count() const { return author_count_; }

  bool contains(const Term& t) const { return ids_.count(t) != 0; }
  // Rescaled L1 weight in [0,1]; throws lookup for unknown terms.
  double weight(const Term& t) const;
  // Number of posts containing the term.
  std::size_t frequency(const Term& t) const;
  // Cosine of the two profiles clamped to [0,1]; 0 when the terms never
  // share a post.
  double coherence(const Term& x, const Term& y) const;

  // Relative frequency of the window among all windows of that length.
  double probability(std::span<const Term> terms) const;
  std::size_t count(std::span<const Term> terms) const;
  std::size_t authors_using(std::span<const Term> terms) const;

  // Enumerates all co-occurring pairs; quadratic in post length, meant for
  // inspection rather than scoring.
  std::vector<Edge> edges() const;

  struct Key {
    std::array<std::uint32_t, kMaxPhraseLength> ids{};
    std::uint8_t n = 0;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept;
  };
  struct Stats {
    std::uint64_t count = 0;
    std::uint32_t authors = 0;
    std::uint32_t last_author = std::numeric_limits<std::uint32_t>::max();
  };
  // False when a term is unknown or the window is too long.
  bool make_key(std::span<const Term> terms, Key& key) const;

 private:
  friend TermGraph build_term_graph(std::span<const corpus::CleanPost>, const TermFeatures&,
                                    double, std::size_t);

  double cosine(std::uint32_t a, std::uint32_t b) const;
  bool share_post(std::uint32_t a, std::uint32_t b) const;

  double epsilon_ = kDefaultEpsilon;
  std::size_t max_n_ = kMaxPhraseLength;
  std::size_t post_count_ = 0;
  std::size_t author_count_ = 0;
  std::vector<Term> terms_;
  std::unordered_map<Term, std::uint32_t> ids_;
  std::vector<double> weights_;
  std::vector<std::vector<double>> profiles_;
  std::vector<double> norms_;
  std::vector<std::vector<std::uint32_t>> postings_;
  std::vector<std::vector<std::uint32_t>> post_terms_;
  std::array<std::uint64_t, kMaxPhraseLength + 1> windows_{};
  std::unordered_map<Key, Stats, KeyHash> ngrams_;
};

TermGraph build_term_graph(std::span<const corpus::CleanPost> posts, const TermFeatures& features,
                           double epsilon = kDefaultEpsilon, std::size_t max_n = kMaxPhraseLength);

// max(epsilon, (w(x)+w(y))/2 * C(x,y))
double edge_score(const Term& x, const Term& y, const TermGraph& g);

struct Phrase {
  std::vector<Term> terms;
  double probability = 0;
  double scp = kNoScore;

  std::string text(char sep = ' ') const;
};

// Modified symmetric conditional probability; kNoScore when any involved
// probability is zero.
double scp_score(std::span<const Term> terms, const TermGraph& g);
double scp_score(const Phrase& phrase, const TermGraph& g);

std::vector<Phrase> extract_segments(std::span<const corpus::CleanPost> posts, const TermGraph& g,
                                     std::size_t top_k = kDefaultTopK,
                                     double popularity_cap = kDefaultPopularityCap,
                                     std::size_t max_n = kMaxPhraseLength);

// TSV rows: phrase, n, probability, scp.
void write_segments(std::ostream& out, std::span<const Phrase> phrases);

}  // namespace cogniprof::segmentation
