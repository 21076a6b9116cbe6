#include "cogniprof/lessn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "cogniprof/error.hpp"
#include "cogniprof/log.hpp"
#include "utf8.hpp"

namespace cogniprof::lessn {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    parts.push_back(trim(line.substr(start, tab - start)));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return parts;
}

// Variation selectors do not change emoji identity.
std::string normalize_emoji(std::string_view e) {
  std::string out;
  for (std::size_t i = 0; i < e.size();) {
    const auto d = utf8::decode(e, i);
    if (d.cp != 0xFE0F && d.cp != 0xFE0E) out.append(e.substr(i, d.length));
    i += d.length;
  }
  return out;
}

std::optional<MatcherKind> parse_matcher_kind(std::string_view kind) {
  if (kind == "word") return MatcherKind::word;
  if (kind == "prefix") return MatcherKind::prefix;
  if (kind == "emoji") return MatcherKind::emoji;
  return std::nullopt;
}

const char* matcher_kind_name(MatcherKind kind) {
  switch (kind) {
    case MatcherKind::word: return "word";
    case MatcherKind::prefix: return "prefix";
    case MatcherKind::emoji: return "emoji";
  }
  return "?";
}

std::optional<int> parse_polarity(std::string_view s) {
  int value = 0;
  std::istringstream in{std::string(s)};
  if (!(in >> value) || !in.eof()) return std::nullopt;
  if (value == 0 || value < -5 || value > 5) return std::nullopt;
  return value;
}

std::size_t codepoint_length(std::string_view s) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < s.size(); i += utf8::decode(s, i).length) ++n;
  return n;
}

std::size_t length_band(std::string_view token) {
  const auto n = codepoint_length(token);
  if (n <= 3) return 0;
  if (n <= 6) return 1;
  return 2;
}

}  // namespace

std::string_view to_string(LexiconKind kind) {
  switch (kind) {
    case LexiconKind::liwc: return "liwc";
    case LexiconKind::emoji: return "emoji";
    case LexiconKind::splice: return "splice";
    case LexiconKind::senti: return "senti";
    case LexiconKind::nrc: return "nrc";
  }
  return "?";
}

std::optional<LexiconKind> parse_lexicon_kind(std::string_view name) {
  std::string lower;
  for (char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lower == "liwc" || lower == "liwc-like") return LexiconKind::liwc;
  if (lower == "emoji") return LexiconKind::emoji;
  if (lower == "splice" || lower == "splice-like") return LexiconKind::splice;
  if (lower == "senti" || lower == "sentistrength") return LexiconKind::senti;
  if (lower == "nrc") return LexiconKind::nrc;
  return std::nullopt;
}

// -------------------------------------------------------------------- Lexicon

Lexicon Lexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open lexicon: " + path.string());
  return parse(in, parse_lexicon_kind(path.stem().string()), path.string());
}

Lexicon Lexicon::parse(std::istream& in, std::optional<LexiconKind> kind, std::string_view source) {
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(std::move(line));
  // A header overrides the kind derived from the file name.
  for (const auto& line : lines) {
    const auto body = trim(line);
    if (body.rfind("#", 0) != 0) continue;
    auto rest = trim(body.substr(1));
    if (rest.rfind("lexicon:", 0) == 0) {
      const auto name = trim(rest.substr(8));
      kind = parse_lexicon_kind(name);
      if (!kind) fail(ErrorCode::parse, std::string(source) + ": unknown lexicon kind '" +
                                            std::string(name) + "'");
      break;
    }
  }
  if (!kind) {
    fail(ErrorCode::parse, std::string(source) +
                               ": lexicon kind unknown (add '# lexicon: NAME' or name the file "
                               "liwc/emoji/splice/senti/nrc)");
  }
  Lexicon lexicon(*kind);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto body = trim(lines[i]);
    if (body.empty() || body.front() == '#') continue;
    const auto where = std::string(source) + ":" + std::to_string(i + 1) + ": ";
    const auto parts = split_tabs(lines[i]);
    if (parts.size() != 3) fail(ErrorCode::parse, where + "expected category<TAB>matcher<TAB>kind");
    const auto mk = parse_matcher_kind(parts[2]);
    if (!mk) {
      fail(ErrorCode::parse, where + "unsupported matcher kind '" + std::string(parts[2]) + "'");
    }
    try {
      lexicon.add(parts[0], parts[1], *mk);
    } catch (const Error& e) {
      fail(e.code(), where + e.what());
    }
  }
  return lexicon;
}

std::size_t Lexicon::ensure_category(std::string_view name) {
  if (const auto it = by_name_.find(std::string(name)); it != by_name_.end()) return it->second;
  if (kind_ == LexiconKind::senti && !parse_polarity(name)) {
    fail(ErrorCode::validation,
         "SENTI category must be a polarity in {-5..-1, 1..5}: '" + std::string(name) + "'");
  }
  if (kind_ == LexiconKind::nrc &&
      std::find(kNrcCategories.begin(), kNrcCategories.end(), name) == kNrcCategories.end()) {
    fail(ErrorCode::validation, "unknown NRC category '" + std::string(name) + "'");
  }
  const auto index = categories_.size();
  categories_.push_back(Category{std::string(name), {}, {}, {}});
  by_name_.emplace(std::string(name), index);
  return index;
}

void Lexicon::add(std::string_view category, std::string_view matcher, MatcherKind kind) {
  if (category.empty()) fail(ErrorCode::validation, "empty category name");
  std::string pattern(matcher);
  if (kind == MatcherKind::prefix && !pattern.empty() && pattern.back() == '*') pattern.pop_back();
  if (kind == MatcherKind::emoji) {
    pattern = normalize_emoji(pattern);
  } else {
    const auto tokens = corpus::tokenize(pattern);
    if (tokens.size() != 1) {
      fail(ErrorCode::validation, "matcher must be a single token: '" + std::string(matcher) + "'");
    }
    pattern = tokens.front();
  }
  if (pattern.empty()) fail(ErrorCode::validation, "empty matcher");
  const auto index = ensure_category(category);
  auto& cat = categories_[index];
  bool inserted = false;
  switch (kind) {
    case MatcherKind::word:
      inserted = cat.words.insert(pattern).second;
      if (inserted) word_index_[pattern].push_back(index);
      break;
    case MatcherKind::prefix:
      inserted = std::find(cat.prefixes.begin(), cat.prefixes.end(), pattern) == cat.prefixes.end();
      if (inserted) {
        cat.prefixes.push_back(pattern);
        prefix_index_.emplace_back(pattern, index);
      }
      break;
    case MatcherKind::emoji:
      inserted = cat.emojis.insert(pattern).second;
      if (inserted) emoji_index_[pattern].push_back(index);
      break;
  }
  if (!inserted) {
    fail(ErrorCode::validation, "duplicate matcher '" + std::string(matcher) + "' in category '" +
                                    std::string(category) + "'");
  }
  rows_.emplace_back(std::string(category), pattern, kind);
}

std::optional<std::size_t> Lexicon::category_index(std::string_view name) const {
  const auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

int Lexicon::polarity(std::size_t category) const {
  if (kind_ != LexiconKind::senti) fail(ErrorCode::state, "polarity requested on a non-SENTI lexicon");
  return *parse_polarity(categories_.at(category).name);
}

void Lexicon::match_term(std::string_view term, std::vector<std::size_t>& out) const {
  const std::string key(term);
  if (const auto it = word_index_.find(key); it != word_index_.end()) {
    out.insert(out.end(), it->second.begin(), it->second.end());
  }
  for (const auto& [prefix, index] : prefix_index_) {
    if (term.size() >= prefix.size() && term.compare(0, prefix.size(), prefix) == 0) {
      if (std::find(out.begin(), out.end(), index) == out.end()) out.push_back(index);
    }
  }
}

void Lexicon::match_emoji(std::string_view emoji, std::vector<std::size_t>& out) const {
  if (const auto it = emoji_index_.find(normalize_emoji(emoji)); it != emoji_index_.end()) {
    out.insert(out.end(), it->second.begin(), it->second.end());
  }
}

std::string Lexicon::feature_name(std::size_t category) const {
  return std::string(to_string(kind_)) + "." + categories_.at(category).name;
}

bool Lexicon::contains_word(std::string_view word) const {
  std::vector<std::size_t> hits;
  match_term(word, hits);
  return !hits.empty();
}

std::string Lexicon::to_tsv() const {
  std::string out = "# lexicon: " + std::string(to_string(kind_)) + "\n";
  for (const auto& [category, pattern, kind] : rows_) {
    out += category + "\t" + pattern + "\t" + matcher_kind_name(kind) + "\n";
  }
  return out;
}

// ----------------------------------------------------------------- LexiconSet

LexiconSet::LexiconSet(std::vector<Lexicon> lexicons) : lexicons_(std::move(lexicons)) {
  std::vector<std::string> names;
  for (const auto& lex : lexicons_) {
    if (lex.kind() == LexiconKind::senti) {
      names.emplace_back(kSentiPositive);
      names.emplace_back(kSentiNegative);
      continue;
    }
    for (std::size_t c = 0; c < lex.categories().size(); ++c) names.push_back(lex.feature_name(c));
    if (lex.kind() == LexiconKind::splice) {
      for (auto band : kLengthBands) names.emplace_back(band);
    }
  }
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  feature_names_ = std::move(names);
}

LexiconSet LexiconSet::load_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    fail(ErrorCode::io, "lexicon directory not found: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".tsv") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) fail(ErrorCode::io, "no *.tsv lexicons in " + dir.string());
  std::vector<Lexicon> lexicons;
  for (const auto& f : files) lexicons.push_back(Lexicon::load(f));
  return LexiconSet(std::move(lexicons));
}

std::uint64_t LexiconSet::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& lex : lexicons_) {
    for (unsigned char c : lex.to_tsv()) {
      h ^= c;
      h *= 1099511628211ULL;
    }
  }
  return h;
}

std::vector<std::string> LexiconSet::words() const {
  std::vector<std::string> out;
  for (const auto& lex : lexicons_) {
    for (const auto& cat : lex.categories()) {
      out.insert(out.end(), cat.words.begin(), cat.words.end());
      out.insert(out.end(), cat.prefixes.begin(), cat.prefixes.end());
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// ---------------------------------------------------------- Feature counting

double LinguisticFeatureVector::weight(std::string_view name) const {
  const auto it = entries.find(std::string(name));
  return it == entries.end() ? 0.0 : it->second;
}

double LinguisticFeatureVector::l1() const {
  double total = 0;
  for (const auto& [_, w] : entries) total += std::abs(w);
  return total;
}

FeatureCounts count_features(std::span<const corpus::CleanPost* const> posts,
                             const LexiconSet& lexicons) {
  FeatureCounts result;
  for (const auto& name : lexicons.feature_names()) result.counts[name] = 0;
  std::vector<std::size_t> hits;
  for (const auto* post : posts) {
    ++result.posts;
    result.units += static_cast<double>(post->tokens.size() + post->emojis.size());
    int best_pos = 0, best_neg = 0;
    for (const auto& lex : lexicons.lexicons()) {
      const bool senti = lex.kind() == LexiconKind::senti;
      for (const auto& token : post->tokens) {
        hits.clear();
        lex.match_term(token, hits);
        for (auto c : hits) {
          if (senti) {
            const int p = lex.polarity(c);
            if (p > 0) best_pos = std::max(best_pos, p);
            else best_neg = std::max(best_neg, -p);
          } else {
            result.counts[lex.feature_name(c)] += 1;
          }
        }
        if (lex.kind() == LexiconKind::splice) {
          result.counts[std::string(kLengthBands[length_band(token)])] += 1;
        }
      }
      for (const auto& emoji : post->emojis) {
        hits.clear();
        lex.match_emoji(emoji, hits);
        for (auto c : hits) {
          if (senti) {
            const int p = lex.polarity(c);
            if (p > 0) best_pos = std::max(best_pos, p);
            else best_neg = std::max(best_neg, -p);
          } else {
            result.counts[lex.feature_name(c)] += 1;
          }
        }
      }
    }
    result.senti_positive_sum += best_pos;
    result.senti_negative_sum += best_neg;
  }
  return result;
}

FeatureCounts count_features(std::span<const corpus::CleanPost> posts, const LexiconSet& lexicons) {
  std::vector<const corpus::CleanPost*> ptrs;
  ptrs.reserve(posts.size());
  for (const auto& p : posts) ptrs.push_back(&p);
  return count_features(ptrs, lexicons);
}

double CorpusStats::rate(const std::string& feature) const {
  const auto it = counts.find(feature);
  const double c = it == counts.end() ? 0.0 : it->second;
  if (c > 0 && units > 0) return c / units;
  return (c + 1.0) / (units + 1.0);
}

CorpusStats corpus_stats(std::span<const corpus::CleanPost> posts, const LexiconSet& lexicons) {
  auto counts = count_features(posts, lexicons);
  return CorpusStats{std::move(counts.counts), counts.units};
}

LinguisticFeatureVector extract_linguistic(std::span<const corpus::CleanPost* const> author_posts,
                                           const LexiconSet& lexicons, const CorpusStats& stats) {
  if (lexicons.empty()) fail(ErrorCode::argument, "extract_linguistic needs at least one lexicon");
  const auto counts = count_features(author_posts, lexicons);
  LinguisticFeatureVector lv;
  for (const auto& [name, c] : counts.counts) {
    double w = 0;
    if (c > 0 && counts.units > 0) {
      const double ratio = (c / counts.units) / stats.rate(name);
      w = ratio / (1.0 + ratio);
    }
    lv.entries[name] = w;
  }
  const bool has_senti = std::any_of(lexicons.lexicons().begin(), lexicons.lexicons().end(),
                                     [](const Lexicon& l) { return l.kind() == LexiconKind::senti; });
  if (has_senti) {
    const double n = counts.posts > 0 ? static_cast<double>(counts.posts) : 1.0;
    lv.entries[std::string(kSentiPositive)] = counts.senti_positive_sum / n / 5.0;
    lv.entries[std::string(kSentiNegative)] = counts.senti_negative_sum / n / 5.0;
  }
  return lv;
}

LinguisticFeatureVector extract_linguistic(std::span<const corpus::CleanPost> author_posts,
                                           const LexiconSet& lexicons, const CorpusStats& stats) {
  std::vector<const corpus::CleanPost*> ptrs;
  ptrs.reserve(author_posts.size());
  for (const auto& p : author_posts) ptrs.push_back(&p);
  return extract_linguistic(ptrs, lexicons, stats);
}

// -------------------------------------------------------------------- Pearson

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail(ErrorCode::argument, "pearson: length mismatch");
  if (x.size() < 2) fail(ErrorCode::argument, "pearson: need at least two observations");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0 || syy == 0) fail(ErrorCode::numeric, "pearson: correlation undefined for constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// --------------------------------------------------------- CorrelationMatrix

CorrelationMatrix CorrelationMatrix::load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open correlation matrix: " + path.string());
  return parse_csv(in, path.string());
}

CorrelationMatrix CorrelationMatrix::parse_csv(std::istream& in, std::string_view source) {
  CorrelationMatrix m;
  m.provenance = MatrixProvenance::bundled;
  std::string line;
  std::size_t line_no = 0;
  std::array<std::size_t, kTraitCount> column{};
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss{std::string(body)};
    for (std::string cell; std::getline(ss, cell, ',');) cells.emplace_back(trim(cell));
    const auto where = std::string(source) + ":" + std::to_string(line_no) + ": ";
    if (!header_seen) {
      for (std::size_t q = 0; q < kTraitCount; ++q) {
        const auto it = std::find(cells.begin(), cells.end(), kTraitNames[q]);
        if (it == cells.end() || it == cells.begin()) {
          fail(ErrorCode::parse, where + "header lacks trait column '" + std::string(kTraitNames[q]) + "'");
        }
        column[q] = static_cast<std::size_t>(it - cells.begin());
      }
      header_seen = true;
      continue;
    }
    TraitScores row{};
    for (std::size_t q = 0; q < kTraitCount; ++q) {
      if (column[q] >= cells.size()) fail(ErrorCode::parse, where + "missing cell");
      try {
        std::size_t used = 0;
        row[q] = std::stod(cells[column[q]], &used);
        if (used != cells[column[q]].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        fail(ErrorCode::parse, where + "bad number '" + cells[column[q]] + "'");
      }
      if (!(row[q] >= -1.0 && row[q] <= 1.0)) fail(ErrorCode::validation, where + "correlation outside [-1,1]");
    }
    if (!m.rows.emplace(cells[0], row).second) {
      fail(ErrorCode::validation, where + "duplicate feature row '" + cells[0] + "'");
    }
  }
  if (!header_seen) fail(ErrorCode::parse, std::string(source) + ": empty correlation matrix");
  return m;
}

void CorrelationMatrix::save_csv(std::ostream& out) const {
  out << "feature";
  for (auto name : kTraitNames) out << ',' << name;
  out << '\n';
  out.precision(17);
  for (const auto& [feature, row] : rows) {
    out << feature;
    for (double v : row) out << ',' << v;
    out << '\n';
  }
}

void CorrelationMatrix::save_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io, "cannot write correlation matrix: " + path.string());
  save_csv(out);
}

const TraitScores* CorrelationMatrix::row(const std::string& feature) const {
  const auto it = rows.find(feature);
  return it == rows.end() ? nullptr : &it->second;
}

CorrelationMatrix train_correlation(std::span<const TrainingRow> rows) {
  if (rows.size() < kMinCorrelationRows) {
    fail(ErrorCode::validation, "train_correlation needs at least " +
                                    std::to_string(kMinCorrelationRows) + " rows, got " +
                                    std::to_string(rows.size()));
  }
  std::vector<std::string> features;
  for (const auto& r : rows) {
    for (const auto& [name, _] : r.features.entries) features.push_back(name);
  }
  std::sort(features.begin(), features.end());
  features.erase(std::unique(features.begin(), features.end()), features.end());

  std::array<std::vector<double>, kTraitCount> traits;
  std::array<bool, kTraitCount> trait_constant{};
  for (std::size_t q = 0; q < kTraitCount; ++q) {
    for (const auto& r : rows) traits[q].push_back(r.traits[q]);
    trait_constant[q] = std::all_of(traits[q].begin(), traits[q].end(),
                                    [&](double v) { return v == traits[q].front(); });
    if (trait_constant[q]) {
      log::warn("train_correlation: trait '" + std::string(kTraitNames[q]) +
                "' is constant; its column is zero");
    }
  }

  CorrelationMatrix m;
  m.provenance = MatrixProvenance::trained;
  std::vector<double> x(rows.size());
  for (const auto& feature : features) {
    for (std::size_t i = 0; i < rows.size(); ++i) x[i] = rows[i].features.weight(feature);
    TraitScores cell{};
    const bool constant = std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); });
    if (constant) {
      log::warn("train_correlation: feature '" + feature + "' is constant; its row is zero");
    } else {
      for (std::size_t q = 0; q < kTraitCount; ++q) {
        if (!trait_constant[q]) cell[q] = pearson(x, traits[q]);
      }
    }
    m.rows.emplace(feature, cell);
  }
  return m;
}

CognitiveFeatureVector map_to_cognitive(const LinguisticFeatureVector& lv, const CorrelationMatrix& m) {
  CognitiveFeatureVector c;
  double total = 0;
  std::size_t missing = 0;
  for (const auto& [name, w] : lv.entries) {
    if (w <= 0) continue;
    total += w;
    const auto* row = m.row(name);
    if (!row) {
      ++missing;
      continue;
    }
    for (std::size_t q = 0; q < kTraitCount; ++q) c[q] += w * (*row)[q];
  }
  if (missing > 0) {
    log::debug("map_to_cognitive: " + std::to_string(missing) +
               " feature(s) without a matrix row treated as zero");
  }
  if (total <= 0) return CognitiveFeatureVector{};
  for (auto& v : c.values) v = std::clamp(v / total, -1.0, 1.0);
  return c;
}

}  // namespace cogniprof::lessn
