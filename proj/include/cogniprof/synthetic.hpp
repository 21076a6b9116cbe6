#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "cogniprof/corpus.hpp"
#include "cogniprof/lessn.hpp"

// Seeded labeled corpus generator with planted trait profiles, occupation
// jargon and sticky collocations.
namespace cogniprof::synthetic {

using lessn::TraitScores;

inline constexpr std::size_t kMaxPostsPerAuthor = 300;

struct SyntheticSpec {
  std::uint64_t seed = 42;
  std::size_t num_authors = 500;
  std::size_t posts_per_author = 30;
  std::size_t occupations = 5;
  // Probability that a lexicon word or emoji ignores the author's traits and
  // comes from a uniformly chosen category.
  double noise = 0.1;
  // Probability that an author's traits follow another occupation's profile.
  double profile_swap = 0;
  // Gaussian jitter around the profile.
  double trait_jitter = 0.3;
  // Strength of the trait -> category usage coupling.
  double coupling = 2.0;
  std::size_t collocations = 20;
  // Oldest fraction of each author's posts written under another
  // occupation's profile and jargon.
  double stale_fraction = 0;
  std::size_t words_per_post = 14;
  // Words each author draws from per lexicon category; 0 means all of them.
  std::size_t idiolect = 2;
  double lexicon_rate = 0.35;
  double jargon_rate = 0.0;
  double collocation_rate = 0.3;
  double emoji_rate = 0.3;
  double slang_rate = 0.02;
  double elongation_rate = 0.01;
  std::int64_t start_time = 1600000000;

  void validate() const;
};

struct AuthorTruth {
  std::string author_id;
  std::string occupation;
  TraitScores traits{};
};

struct SyntheticCorpus {
  std::vector<corpus::RawPost> posts;
  std::vector<AuthorTruth> authors;
  std::vector<std::string> occupations;
  std::vector<TraitScores> profiles;
  std::vector<std::pair<std::string, std::string>> collocations;
};

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec, const lessn::LexiconSet& lexicons);

// Small corpus for segmentation checks: filler text with `bigrams` planted
// two-word collocations whose words never occur apart.
SyntheticCorpus generate_collocation_corpus(std::uint64_t seed, std::size_t bigrams, std::size_t posts,
                                            std::size_t authors, const lessn::LexiconSet& lexicons);

// How strongly each lexicon feature tracks each trait in generated text.
const std::vector<std::pair<std::string, TraitScores>>& trait_loadings();

void write_traits_csv(std::ostream& out, const std::vector<AuthorTruth>& authors);
void write_traits_csv(const std::filesystem::path& path, const std::vector<AuthorTruth>& authors);
std::vector<AuthorTruth> read_traits_csv(const std::filesystem::path& path);
std::vector<AuthorTruth> parse_traits_csv(std::istream& in, std::string_view source = "<traits>");

}  // namespace cogniprof::synthetic
