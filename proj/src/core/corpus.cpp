#include "cogniprof/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cogniprof/error.hpp"
#include "utf8.hpp"

namespace cogniprof::corpus {
namespace {

using nlohmann::json;

constexpr int kMaxSlangDepth = 16;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n\f\v");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n\f\v");
  return s.substr(first, last - first + 1);
}

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    char c = s[i];
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c + 32);
    if (c != prefix[i]) return false;
  }
  return true;
}

bool is_url(std::string_view chunk) {
  return starts_with_ci(chunk, "http://") || starts_with_ci(chunk, "https://") ||
         starts_with_ci(chunk, "www.");
}

bool is_mention(std::string_view chunk) {
  if (chunk.size() < 2 || chunk[0] != '@') return false;
  const auto d = utf8::decode(chunk, 1);
  return !utf8::is_punctuation(d.cp) || d.cp == '_';
}

bool is_word_cp(char32_t cp) {
  return !utf8::is_punctuation(cp) && !utf8::is_emoji_base(cp) &&
         !utf8::is_emoji_modifier(cp) && !utf8::is_regional_indicator(cp) &&
         cp != utf8::kZeroWidthJoiner;
}

// Returns the byte length of the emoji sequence starting at i, or 0.
std::size_t emoji_sequence_length(std::string_view s, std::size_t i) {
  auto d = utf8::decode(s, i);
  std::size_t pos = i;
  if (utf8::is_regional_indicator(d.cp)) {
    pos += d.length;
    if (pos < s.size()) {
      const auto next = utf8::decode(s, pos);
      if (utf8::is_regional_indicator(next.cp)) pos += next.length;
    }
    return pos - i;
  }
  if (!utf8::is_emoji_base(d.cp)) return 0;
  pos += d.length;
  while (pos < s.size()) {
    auto next = utf8::decode(s, pos);
    if (utf8::is_emoji_modifier(next.cp)) {
      pos += next.length;
      continue;
    }
    if (next.cp == utf8::kZeroWidthJoiner && pos + next.length < s.size()) {
      const auto after = utf8::decode(s, pos + next.length);
      if (utf8::is_emoji_base(after.cp)) {
        pos += next.length + after.length;
        continue;
      }
    }
    break;
  }
  return pos - i;
}

struct Run {
  std::size_t begin;  // codepoint index
  std::size_t length;
};

}  // namespace

// ---------------------------------------------------------------- SlangTable

SlangTable SlangTable::load(const std::filesystem::path& tsv) {
  std::ifstream in(tsv);
  if (!in) fail(ErrorCode::io, "cannot open slang table: " + tsv.string());
  return parse(in, tsv.string());
}

SlangTable SlangTable::parse(std::istream& in, std::string_view source) {
  SlangTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      fail(ErrorCode::parse, std::string(source) + ":" + std::to_string(line_no) +
                                 ": expected 'slang<TAB>expansion'");
    }
    auto key = std::string(trim(std::string_view(line).substr(0, tab)));
    auto expansion = std::string(trim(std::string_view(line).substr(tab + 1)));
    try {
      table.add(std::move(key), std::move(expansion));
    } catch (const Error& e) {
      fail(e.code(), std::string(source) + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return table;
}

void SlangTable::add(std::string key, std::string expansion) {
  const auto key_tokens = tokenize(key);
  if (key_tokens.size() != 1 || key_tokens.front() != key) {
    fail(ErrorCode::validation, "slang key must be a single lowercase token: '" + key + "'");
  }
  std::string folded;
  for (const auto& t : tokenize(expansion)) {
    if (!folded.empty()) folded.push_back(' ');
    folded += t;
  }
  if (folded.empty()) fail(ErrorCode::validation, "empty expansion for slang key '" + key + "'");
  if (folded == key) fail(ErrorCode::validation, "slang key maps to itself: '" + key + "'");
  auto previous = table_.find(key);
  std::optional<std::string> old;
  if (previous != table_.end()) old = previous->second;
  table_[key] = folded;
  try {
    check_acyclic(key);
  } catch (...) {
    if (old) table_[key] = *old; else table_.erase(key);
    throw;
  }
}

void SlangTable::check_acyclic(const std::string& key) const {
  // Depth-first walk over expansion tokens looking for a path back to key.
  std::vector<std::pair<std::string, int>> stack{{key, 0}};
  std::unordered_set<std::string> seen;
  while (!stack.empty()) {
    auto [current, depth] = stack.back();
    stack.pop_back();
    const auto it = table_.find(current);
    if (it == table_.end()) continue;
    if (depth > kMaxSlangDepth) {
      fail(ErrorCode::validation, "slang chain too deep from '" + key + "'");
    }
    for (const auto& t : tokenize(it->second)) {
      if (t == key) fail(ErrorCode::validation, "slang expansion cycle through '" + key + "'");
      if (seen.insert(t).second) stack.emplace_back(t, depth + 1);
    }
  }
}

const std::string* SlangTable::find(std::string_view key) const {
  const auto it = table_.find(std::string(key));
  return it == table_.end() ? nullptr : &it->second;
}

std::vector<std::pair<std::string, std::string>> SlangTable::entries() const {
  std::vector<std::pair<std::string, std::string>> out(table_.begin(), table_.end());
  std::sort(out.begin(), out.end());
  return out;
}

// ----------------------------------------------------------------- StopWords

StopWords StopWords::english() {
  static const char* const kWords[] = {
      "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any",
      "are", "as", "at", "be", "because", "been", "before", "being", "below", "between",
      "both", "but", "by", "can", "could", "did", "do", "does", "doing", "down", "during",
      "each", "few", "for", "from", "further", "had", "has", "have", "having", "he", "her",
      "here", "hers", "herself", "him", "himself", "his", "how", "i", "i'm", "if", "in",
      "into", "is", "it", "it's", "its", "itself", "just", "me", "more", "most", "my",
      "myself", "no", "nor", "not", "now", "of", "off", "on", "once", "only", "or", "other",
      "our", "ours", "ourselves", "out", "over", "own", "same", "she", "should", "so",
      "some", "such", "than", "that", "the", "their", "theirs", "them", "themselves", "then",
      "there", "these", "they", "this", "those", "through", "to", "too", "under", "until",
      "up", "very", "was", "we", "were", "what", "when", "where", "which", "while", "who",
      "whom", "why", "will", "with", "would", "you", "your", "yours", "yourself",
      "yourselves"};
  std::unordered_set<std::string> words(std::begin(kWords), std::end(kWords));
  return StopWords(std::move(words));
}

std::vector<std::string> StopWords::sorted() const {
  std::vector<std::string> out(words_.begin(), words_.end());
  std::sort(out.begin(), out.end());
  return out;
}

StopWords StopWords::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open stop-word list: " + path.string());
  std::unordered_set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    for (auto& t : tokenize(body)) words.insert(std::move(t));
  }
  return StopWords(std::move(words));
}

// ----------------------------------------------------------------- Ingestion

std::vector<RawPost> ingest_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open corpus: " + path.string());
  return parse_corpus(in, path.string());
}

std::vector<RawPost> parse_corpus(std::istream& in, std::string_view source) {
  std::vector<RawPost> posts;
  std::unordered_map<std::string, std::size_t> seen;
  std::string line;
  std::size_t line_no = 0;
  auto where = [&] { return std::string(source) + ":" + std::to_string(line_no) + ": "; };
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      fail(ErrorCode::parse, where() + "malformed JSON (" + e.what() + ")");
    }
    if (!record.is_object()) fail(ErrorCode::parse, where() + "expected a JSON object");
    auto required = [&](const char* field) -> std::string {
      const auto it = record.find(field);
      if (it == record.end() || !it->is_string()) {
        fail(ErrorCode::parse, where() + "missing string field '" + field + "'");
      }
      return it->get<std::string>();
    };
    RawPost post;
    post.post_id = required("post_id");
    post.author_id = required("author_id");
    post.text = required("text");
    if (const auto it = record.find("occupation"); it != record.end() && !it->is_null()) {
      if (!it->is_string()) fail(ErrorCode::parse, where() + "'occupation' must be a string");
      post.occupation = it->get<std::string>();
    }
    if (const auto it = record.find("timestamp"); it != record.end() && !it->is_null()) {
      if (!it->is_number_integer()) {
        fail(ErrorCode::parse, where() + "'timestamp' must be an integer");
      }
      post.timestamp = it->get<std::int64_t>();
    }
    if (post.post_id.empty()) fail(ErrorCode::validation, where() + "empty post_id");
    if (trim(post.text).empty()) {
      fail(ErrorCode::validation, where() + "empty text for post '" + post.post_id + "'");
    }
    if (const auto [it, inserted] = seen.emplace(post.post_id, line_no); !inserted) {
      fail(ErrorCode::validation, where() + "duplicate post_id '" + post.post_id +
                                      "' (first seen at line " + std::to_string(it->second) +
                                      ")");
    }
    posts.push_back(std::move(post));
  }
  return posts;
}

void write_corpus(std::ostream& out, std::span<const RawPost> posts) {
  for (const auto& p : posts) {
    json record = {{"post_id", p.post_id}, {"author_id", p.author_id}, {"text", p.text}};
    if (p.occupation) record["occupation"] = *p.occupation;
    if (p.timestamp) record["timestamp"] = *p.timestamp;
    out << record.dump() << '\n';
  }
}

void write_corpus(const std::filesystem::path& path, std::span<const RawPost> posts) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io, "cannot write corpus: " + path.string());
  write_corpus(out, posts);
}

void write_clean_corpus(std::ostream& out, std::span<const CleanPost> posts) {
  for (const auto& p : posts) {
    json record = {{"post_id", p.post_id},
                   {"author_id", p.author_id},
                   {"tokens", p.tokens},
                   {"emojis", p.emojis}};
    if (p.occupation) record["occupation"] = *p.occupation;
    if (p.timestamp) record["timestamp"] = *p.timestamp;
    out << record.dump() << '\n';
  }
}

// ------------------------------------------------------------- Tokenization

std::vector<Term> tokenize(std::string_view text) {
  std::vector<char32_t> cps;
  cps.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) {
    const auto d = utf8::decode(text, i);
    cps.push_back(d.cp);
    i += d.length;
  }
  std::vector<Term> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  for (std::size_t k = 0; k < cps.size(); ++k) {
    const char32_t cp = cps[k];
    if (is_word_cp(cp)) {
      utf8::append(current, utf8::fold_case(cp));
    } else if (utf8::is_apostrophe(cp) && !current.empty() && k + 1 < cps.size() &&
               is_word_cp(cps[k + 1])) {
      current.push_back('\'');
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

std::string strip_noise(std::string_view text, std::vector<std::string>* emojis) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (is_space(text[i])) {
      out.push_back(' ');
      ++i;
      continue;
    }
    std::size_t end = i;
    while (end < text.size() && !is_space(text[end])) ++end;
    const auto chunk = text.substr(i, end - i);
    if (!is_url(chunk) && !is_mention(chunk)) {
      for (std::size_t j = 0; j < chunk.size();) {
        if (const auto len = emoji_sequence_length(chunk, j); len > 0) {
          if (emojis) emojis->emplace_back(chunk.substr(j, len));
          out.push_back(' ');
          j += len;
        } else {
          const auto d = utf8::decode(chunk, j);
          out.append(chunk.substr(j, d.length));
          j += d.length;
        }
      }
    }
    i = end;
  }
  return out;
}

std::string repair_runs(std::string_view token, const Vocabulary& vocabulary) {
  std::vector<char32_t> cps;
  for (std::size_t i = 0; i < token.size();) {
    const auto d = utf8::decode(token, i);
    cps.push_back(d.cp);
    i += d.length;
  }
  std::vector<Run> long_runs;
  for (std::size_t k = 0; k < cps.size();) {
    std::size_t j = k;
    while (j < cps.size() && cps[j] == cps[k]) ++j;
    if (j - k > 2) long_runs.push_back({k, j - k});
    k = j;
  }
  if (long_runs.empty()) return std::string(token);
  auto render = [&](std::size_t keep) {
    std::string out;
    std::size_t r = 0;
    for (std::size_t k = 0; k < cps.size();) {
      if (r < long_runs.size() && long_runs[r].begin == k) {
        for (std::size_t n = 0; n < keep; ++n) utf8::append(out, cps[k]);
        k += long_runs[r].length;
        ++r;
      } else {
        utf8::append(out, cps[k]);
        ++k;
      }
    }
    return out;
  };
  auto doubled = render(2);
  if (vocabulary.count(doubled)) return doubled;
  return render(1);
}

// ------------------------------------------------------------ NoiseReducer

void NoiseReducer::expand(const std::string& token, std::vector<Term>& out, int depth) const {
  auto repaired = repair_runs(token, vocabulary_);
  const std::string* expansion = depth < kMaxSlangDepth ? slang_.find(repaired) : nullptr;
  if (!expansion) {
    out.push_back(std::move(repaired));
    return;
  }
  for (const auto& t : tokenize(*expansion)) expand(t, out, depth + 1);
}

std::vector<Term> NoiseReducer::clean_tokens(std::string_view text,
                                             std::vector<std::string>* emojis) const {
  const auto stripped = strip_noise(text, emojis);
  std::vector<Term> tokens;
  for (const auto& t : tokenize(stripped)) expand(t, tokens, 0);
  return tokens;
}

CleanPost NoiseReducer::reduce(const RawPost& post) const {
  CleanPost clean;
  clean.post_id = post.post_id;
  clean.author_id = post.author_id;
  clean.occupation = post.occupation;
  clean.timestamp = post.timestamp;
  clean.tokens = clean_tokens(post.text, &clean.emojis);
  return clean;
}

CleanPost reduce_noise(const RawPost& post, const SlangTable& slang,
                       const Vocabulary& vocabulary) {
  return NoiseReducer(slang, vocabulary).reduce(post);
}

Vocabulary build_vocabulary(std::span<const RawPost> posts, std::span<const std::string> extra) {
  Vocabulary vocab(extra.begin(), extra.end());
  const Vocabulary empty;
  for (const auto& p : posts) {
    for (auto& t : tokenize(strip_noise(p.text, nullptr))) {
      if (repair_runs(t, empty) == t) vocab.insert(std::move(t));
    }
  }
  return vocab;
}

std::vector<AuthorPosts> group_by_author(std::span<const CleanPost> posts) {
  std::vector<AuthorPosts> groups;
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < posts.size(); ++i) {
    const auto [it, inserted] = index.emplace(posts[i].author_id, groups.size());
    if (inserted) groups.push_back({posts[i].author_id, {}});
    groups[it->second].post_indices.push_back(i);
  }
  return groups;
}

}  // namespace cogniprof::corpus
