#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

// Corpus ingestion, lexical noise reduction and tokenization for short posts.
namespace cogniprof::corpus {

using Term = std::string;

struct RawPost {
  std::string post_id;
  std::string author_id;
  std::string text;
  std::optional<std::string> occupation;
  std::optional<std::int64_t> timestamp;

  bool operator==(const RawPost&) const = default;
};

struct CleanPost {
  std::string post_id;
  std::string author_id;
  std::vector<Term> tokens;
  // Emoji codepoint sequences, kept out of the token stream.
  std::vector<std::string> emojis;
  std::optional<std::string> occupation;
  std::optional<std::int64_t> timestamp;
};

// Slang key -> expansion. Keys are lowercase single tokens; expansions may be
// several words. Chains (a -> b, b -> c) are followed when applied.
class SlangTable {
 public:
  SlangTable() = default;

  static SlangTable load(const std::filesystem::path& tsv);
  static SlangTable parse(std::istream& in, std::string_view source = "<slang>");

  void add(std::string key, std::string expansion);
  const std::string* find(std::string_view key) const;
  std::size_t size() const { return table_.size(); }
  bool empty() const { return table_.empty(); }

  std::vector<std::pair<std::string, std::string>> entries() const;

 private:
  void check_acyclic(const std::string& key) const;

  std::unordered_map<std::string, std::string> table_;
};

using Vocabulary = std::unordered_set<std::string>;

class StopWords {
 public:
  StopWords() = default;
  explicit StopWords(std::unordered_set<std::string> words) : words_(std::move(words)) {}

  static StopWords english();
  static StopWords load(const std::filesystem::path& path);

  bool contains(std::string_view term) const { return words_.count(std::string(term)) != 0; }
  std::size_t size() const { return words_.size(); }
  std::vector<std::string> sorted() const;

 private:
  std::unordered_set<std::string> words_;
};

// Reads a JSON-lines corpus: one object per line with post_id, author_id,
// text and optional occupation / timestamp. Blank lines are skipped.
std::vector<RawPost> ingest_corpus(const std::filesystem::path& path);
std::vector<RawPost> parse_corpus(std::istream& in, std::string_view source = "<corpus>");
void write_corpus(std::ostream& out, std::span<const RawPost> posts);
void write_corpus(const std::filesystem::path& path, std::span<const RawPost> posts);

void write_clean_corpus(std::ostream& out, std::span<const CleanPost> posts);

// Whitespace/punctuation split with case folding. Apostrophes survive only
// between two word characters ("i'm").
std::vector<Term> tokenize(std::string_view text);

// Removes URLs and @mentions; moves emoji sequences into `emojis`.
std::string strip_noise(std::string_view text, std::vector<std::string>* emojis);

// Compresses runs longer than two to two; if that spelling is not in the
// vocabulary, the compressed runs drop to a single character.
std::string repair_runs(std::string_view token, const Vocabulary& vocabulary);

class NoiseReducer {
 public:
  NoiseReducer() = default;
  NoiseReducer(SlangTable slang, Vocabulary vocabulary)
      : slang_(std::move(slang)), vocabulary_(std::move(vocabulary)) {}

  CleanPost reduce(const RawPost& post) const;
  std::vector<Term> clean_tokens(std::string_view text, std::vector<std::string>* emojis) const;

  const SlangTable& slang() const { return slang_; }
  const Vocabulary& vocabulary() const { return vocabulary_; }

 private:
  void expand(const std::string& token, std::vector<Term>& out, int depth) const;

  SlangTable slang_;
  Vocabulary vocabulary_;
};

CleanPost reduce_noise(const RawPost& post, const SlangTable& slang,
                       const Vocabulary& vocabulary = {});

// Words spelled without runs longer than two, plus any extra known words.
Vocabulary build_vocabulary(std::span<const RawPost> posts,
                            std::span<const std::string> extra = {});

// Groups posts by author, preserving first-appearance order of authors.
struct AuthorPosts {
  std::string author_id;
  std::vector<std::size_t> post_indices;
};
std::vector<AuthorPosts> group_by_author(std::span<const CleanPost> posts);

}  // namespace cogniprof::corpus
