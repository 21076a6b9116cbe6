#include "cogniprof/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "cogniprof/error.hpp"

namespace cogniprof::synthetic {
namespace {

using Rng = std::mt19937_64;

const std::vector<std::string>& filler_words() {
  static const std::vector<std::string> words = {
      "the", "a", "to", "and", "of", "in", "on", "for", "with", "at", "this", "that", "it", "is",
      "was", "today", "just", "so", "really", "then", "about", "from", "all", "some", "new",
      "day", "time", "week", "back", "out", "up", "again", "still", "morning", "evening", "night",
      "city", "street", "train", "bus", "car", "coffee", "tea", "lunch", "dinner", "weather",
      "rain", "sun", "snow", "phone", "email", "news", "story", "photo", "video", "picture",
      "place", "room", "door", "window", "table", "chair", "book", "page", "letter", "paper",
      "road", "walk", "run", "bike", "park", "tree", "river", "hill", "town", "village", "shop",
      "market", "bread", "water", "apple", "orange", "summer", "winter", "spring", "autumn",
      "monday", "friday", "sunday", "month", "year", "hour", "minute", "later", "early", "late",
      "long", "short", "small", "big", "old", "little", "other", "next", "last", "first",
      "second", "third", "left", "right", "here", "there", "around", "near", "far", "over",
      "under", "inside", "outside", "along", "across", "down", "off", "yet", "also", "too",
      "very", "quite", "almost", "enough", "much", "many", "few", "every", "each", "both",
      "either", "neither", "any", "another", "such", "same", "different", "own", "whole",
      "half", "open", "closed", "full", "empty", "warm", "cold", "hot", "cool", "dry", "wet",
      "green", "blue", "red", "yellow", "white", "black", "grey", "brown", "light", "dark",
      "quiet", "loud", "fast", "slow", "soft", "hard", "heavy", "clean", "fresh", "simple",
      "usual", "common", "normal", "local", "public", "private", "main", "general", "total"};
  return words;
}

const std::vector<std::vector<std::string>>& jargon_banks() {
  static const std::vector<std::vector<std::string>> banks = {
      {"compiler", "refactor", "kubernetes", "backend", "repo", "bugfix", "latency", "deploy",
       "runtime", "api", "debugger", "commit"},
      {"ward", "triage", "shift", "patients", "icu", "vitals", "meds", "clinic", "scrubs",
       "nightshift", "dosage", "rounds"},
      {"classroom", "pupils", "grading", "homework", "lesson", "syllabus", "semester", "recess",
       "quiz", "curriculum", "tutoring", "students"},
      {"canvas", "sketch", "palette", "studio", "exhibit", "acrylic", "portrait", "mural",
       "brush", "sculpture", "charcoal", "easel"},
      {"quota", "leads", "prospect", "upsell", "crm", "revenue", "pitch", "closing", "territory",
       "commission", "forecast", "pipeline"}};
  return banks;
}

const std::vector<std::string>& occupation_names() {
  static const std::vector<std::string> names = {"software-engineer", "nurse", "teacher", "artist",
                                                 "sales-manager"};
  return names;
}

// Pronounceable nonce words from a seeded syllable walk.
std::string nonce_word(Rng& rng, std::size_t syllables) {
  static const char* const onset[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s",
                                      "t", "v", "z", "br", "tr", "pl", "gr", "st", "qu"};
  static const char* const vowel[] = {"a", "e", "i", "o", "u", "ai", "ou", "io"};
  std::string w;
  for (std::size_t s = 0; s < syllables; ++s) {
    w += onset[rng() % std::size(onset)];
    w += vowel[rng() % std::size(vowel)];
  }
  w += "x";
  return w;
}

bool matches_any(const lessn::LexiconSet& lexicons, const std::string& word) {
  std::vector<std::size_t> hits;
  for (const auto& lex : lexicons.lexicons()) {
    hits.clear();
    lex.match_term(word, hits);
    if (!hits.empty()) return true;
  }
  return false;
}

struct CategoryBank {
  std::string feature;
  std::vector<std::string> items;
  TraitScores loading{};
  bool emoji = false;
};

std::vector<CategoryBank> category_banks(const lessn::LexiconSet& lexicons) {
  std::map<std::string, TraitScores> loads(trait_loadings().begin(), trait_loadings().end());
  std::vector<CategoryBank> banks;
  for (const auto& lex : lexicons.lexicons()) {
    if (lex.kind() == lessn::LexiconKind::senti) continue;
    for (std::size_t c = 0; c < lex.categories().size(); ++c) {
      const auto& cat = lex.categories()[c];
      CategoryBank b;
      b.feature = lex.feature_name(c);
      b.emoji = lex.kind() == lessn::LexiconKind::emoji;
      if (b.emoji) b.items.assign(cat.emojis.begin(), cat.emojis.end());
      else {
        b.items.assign(cat.words.begin(), cat.words.end());
        b.items.insert(b.items.end(), cat.prefixes.begin(), cat.prefixes.end());
      }
      std::sort(b.items.begin(), b.items.end());
      if (b.items.empty()) continue;
      if (const auto it = loads.find(b.feature); it != loads.end()) b.loading = it->second;
      banks.push_back(std::move(b));
    }
  }
  std::sort(banks.begin(), banks.end(), [](const auto& a, const auto& b) { return a.feature < b.feature; });
  return banks;
}

std::size_t pick_weighted(Rng& rng, const std::vector<double>& cumulative) {
  std::uniform_real_distribution<double> u(0.0, cumulative.back());
  const double r = u(rng);
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
  return std::min(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
}

std::vector<double> usage(const std::vector<CategoryBank>& banks, bool emoji, const TraitScores& t,
                          double coupling) {
  std::vector<double> cum;
  double acc = 0;
  for (const auto& b : banks) {
    double w = 0;
    if (b.emoji == emoji) {
      double s = 0;
      for (std::size_t q = 0; q < lessn::kTraitCount; ++q) s += b.loading[q] * t[q];
      w = std::exp(coupling * s);
    }
    acc += w;
    cum.push_back(acc);
  }
  return cum;
}

TraitScores profile_for(std::size_t occupation) {
  TraitScores p;
  p.fill(-0.4);
  p[occupation % lessn::kTraitCount] = 0.6;
  return p;
}

TraitScores jitter(Rng& rng, const TraitScores& base, double sd) {
  std::normal_distribution<double> n(0.0, sd > 0 ? sd : 1.0);
  TraitScores t = base;
  if (sd > 0) {
    for (auto& v : t) v = std::clamp(v + n(rng), -1.0, 1.0);
  }
  return t;
}

std::string elongate(const std::string& w) {
  if (w.empty()) return w;
  return w + std::string(3, w.back());
}

}  // namespace

const std::vector<std::pair<std::string, TraitScores>>& trait_loadings() {
  // openness, conscientiousness, extroversion, agreeableness, neuroticism
  static const std::vector<std::pair<std::string, TraitScores>> loads = {
      {"liwc.insight", {1, 0, 0, 0, 0}},     {"liwc.leisure", {1, 0, 0, 0, 0}},
      {"splice.complex", {1, 0, 0, 0, 0}},   {"nrc.anticipation", {0.5, 0, 0, 0, 0}},
      {"nrc.surprise", {0.5, 0, 0, 0, 0}},   {"liwc.achieve", {0, 1, 0, 0, 0}},
      {"liwc.work", {0, 1, 0, 0, 0}},        {"liwc.certain", {0, 1, 0, 0, 0}},
      {"liwc.tentat", {0, -1, 0, 0, 0}},     {"nrc.trust", {0, 0.5, 0, 0.5, 0}},
      {"liwc.social", {0, 0, 1, 0, 0}},      {"liwc.we", {0, 0, 1, 0, 0}},
      {"liwc.posemo", {0, 0, 0.5, 0.5, 0}},  {"emoji.joy", {0, 0, 1, 0, 0}},
      {"nrc.joy", {0, 0, 1, 0, 0}},          {"splice.informal", {0, 0, 0.5, 0, 0}},
      {"liwc.you", {0, 0, 0, 1, 0}},         {"emoji.love", {0, 0, 0, 1, 0}},
      {"emoji.approval", {0, 0, 0, 0.5, 0}}, {"liwc.anger", {0, 0, 0, -1, 0}},
      {"nrc.anger", {0, 0, 0, -0.5, 0}},     {"nrc.disgust", {0, 0, 0, -1, 0}},
      {"liwc.anx", {0, 0, 0, 0, 1}},         {"liwc.negemo", {0, 0, 0, 0, 1}},
      {"liwc.sad", {0, 0, 0, 0, 1}},         {"emoji.sad", {0, 0, 0, 0, 1}},
      {"nrc.fear", {0, 0, 0, 0, 1}},         {"nrc.sadness", {0, 0, 0, 0, 0.5}},
      {"liwc.i", {0, 0, 0, 0, 0.5}}};
  return loads;
}

void SyntheticSpec::validate() const {
  if (num_authors == 0) fail(ErrorCode::argument, "num_authors must be positive");
  if (posts_per_author == 0 || posts_per_author > kMaxPostsPerAuthor) {
    fail(ErrorCode::argument, "posts_per_author must be in [1, " + std::to_string(kMaxPostsPerAuthor) + "]");
  }
  if (occupations < 2) fail(ErrorCode::argument, "at least two occupations are required");
  if (occupations > num_authors) fail(ErrorCode::argument, "more occupations than authors");
  for (double r : {noise, profile_swap, stale_fraction, lexicon_rate, jargon_rate, collocation_rate, emoji_rate, slang_rate,
                   elongation_rate}) {
    if (!(r >= 0 && r <= 1)) fail(ErrorCode::argument, "rates and fractions must lie in [0,1]");
  }
  if (lexicon_rate + jargon_rate > 1) fail(ErrorCode::argument, "lexicon_rate + jargon_rate must not exceed 1");
  if (!(trait_jitter >= 0) || !(coupling >= 0)) fail(ErrorCode::argument, "jitter and coupling must be >= 0");
  if (words_per_post < 3) fail(ErrorCode::argument, "words_per_post must be at least 3");
}

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec, const lessn::LexiconSet& lexicons) {
  spec.validate();
  if (lexicons.empty()) fail(ErrorCode::argument, "the generator needs lexicons");
  Rng rng(spec.seed);
  SyntheticCorpus out;
  const auto banks = category_banks(lexicons);

  std::vector<std::string> filler;
  for (const auto& w : filler_words()) {
    if (!matches_any(lexicons, w)) filler.push_back(w);
  }

  std::vector<std::vector<std::string>> jargon(spec.occupations);
  for (std::size_t o = 0; o < spec.occupations; ++o) {
    out.occupations.push_back(o < occupation_names().size() ? occupation_names()[o]
                                                            : "occupation-" + std::to_string(o + 1));
    out.profiles.push_back(profile_for(o));
    if (o < jargon_banks().size()) {
      for (const auto& w : jargon_banks()[o]) {
        if (!matches_any(lexicons, w)) jargon[o].push_back(w);
      }
    }
    while (jargon[o].size() < 12) {
      auto w = nonce_word(rng, 3);
      if (!matches_any(lexicons, w)) jargon[o].push_back(w);
    }
  }
  for (std::size_t k = 0; k < spec.collocations; ++k) {
    out.collocations.emplace_back(nonce_word(rng, 2), nonce_word(rng, 2));
  }
  static const char* const slang_keys[] = {"b4", "thx", "tmrw", "btw", "bc"};

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> length_jitter(-3, 3);
  std::size_t post_serial = 0;
  for (std::size_t a = 0; a < spec.num_authors; ++a) {
    AuthorTruth truth;
    char id[32];
    std::snprintf(id, sizeof id, "author-%05zu", a + 1);
    truth.author_id = id;
    const std::size_t occ = a % spec.occupations;
    truth.occupation = out.occupations[occ];
    std::size_t trait_source = occ;
    if (unit(rng) < spec.profile_swap) trait_source = (occ + 1 + rng() % (spec.occupations - 1)) % spec.occupations;
    truth.traits = jitter(rng, out.profiles[trait_source], spec.trait_jitter);

    const std::size_t stale_posts =
        static_cast<std::size_t>(std::floor(spec.stale_fraction * static_cast<double>(spec.posts_per_author)));
    const std::size_t stale_occ = (occ + 1 + rng() % (spec.occupations - 1)) % spec.occupations;
    const TraitScores stale_traits = jitter(rng, out.profiles[stale_occ], spec.trait_jitter);

    // Personal word subset per category.
    std::vector<std::vector<std::uint32_t>> personal(banks.size());
    for (std::size_t b = 0; b < banks.size(); ++b) {
      std::vector<std::uint32_t> idx(banks[b].items.size());
      for (std::uint32_t i = 0; i < idx.size(); ++i) idx[i] = i;
      if (spec.idiolect > 0 && spec.idiolect < idx.size()) {
        std::shuffle(idx.begin(), idx.end(), rng);
        idx.resize(spec.idiolect);
      }
      personal[b] = std::move(idx);
    }
    const auto item = [&](std::size_t b) -> const std::string& {
      const auto& own = personal[b];
      return banks[b].items[own[rng() % own.size()]];
    };
    const auto any_word = usage(banks, false, truth.traits, 0.0);
    const auto any_emoji = usage(banks, true, truth.traits, 0.0);
    const auto fresh_words = usage(banks, false, truth.traits, spec.coupling);
    const auto fresh_emoji = usage(banks, true, truth.traits, spec.coupling);
    const auto stale_words = usage(banks, false, stale_traits, spec.coupling);
    const auto stale_emoji = usage(banks, true, stale_traits, spec.coupling);

    std::int64_t clock = spec.start_time + static_cast<std::int64_t>(a) * 17;
    for (std::size_t p = 0; p < spec.posts_per_author; ++p) {
      const bool stale = p < stale_posts;
      const auto& word_cum = stale ? stale_words : fresh_words;
      const auto& emoji_cum = stale ? stale_emoji : fresh_emoji;
      const auto& bank = jargon[stale ? stale_occ : occ];
      const int n = static_cast<int>(spec.words_per_post) + length_jitter(rng);
      std::vector<std::string> words;
      for (int k = 0; k < std::max(n, 3); ++k) {
        const double u = unit(rng);
        if (u < spec.lexicon_rate) {
          words.push_back(item(pick_weighted(rng, unit(rng) < spec.noise ? any_word : word_cum)));
        } else if (u < spec.lexicon_rate + spec.jargon_rate) {
          words.push_back(bank[rng() % bank.size()]);
        } else {
          auto w = filler[rng() % filler.size()];
          const double v = unit(rng);
          if (v < spec.slang_rate) w = slang_keys[rng() % std::size(slang_keys)];
          else if (v < spec.slang_rate + spec.elongation_rate) w = elongate(w);
          words.push_back(std::move(w));
        }
      }
      if (!out.collocations.empty() && unit(rng) < spec.collocation_rate) {
        const auto& [x, y] = out.collocations[rng() % out.collocations.size()];
        const auto at = static_cast<std::ptrdiff_t>(rng() % (words.size() + 1));
        words.insert(words.begin() + at, {x, y});
      }
      std::string text;
      for (const auto& w : words) {
        if (!text.empty()) text.push_back(' ');
        text += w;
      }
      if (unit(rng) < spec.emoji_rate) {
        text += " " + item(pick_weighted(rng, unit(rng) < spec.noise ? any_emoji : emoji_cum));
      }
      corpus::RawPost post;
      char pid[40];
      std::snprintf(pid, sizeof pid, "p%07zu", ++post_serial);
      post.post_id = pid;
      post.author_id = truth.author_id;
      post.text = std::move(text);
      post.occupation = truth.occupation;
      clock += 600 + static_cast<std::int64_t>(rng() % 7200);
      post.timestamp = clock;
      out.posts.push_back(std::move(post));
    }
    out.authors.push_back(std::move(truth));
  }
  return out;
}

SyntheticCorpus generate_collocation_corpus(std::uint64_t seed, std::size_t bigrams, std::size_t posts,
                                            std::size_t authors, const lessn::LexiconSet& lexicons) {
  if (posts == 0 || authors == 0) fail(ErrorCode::argument, "posts and authors must be positive");
  Rng rng(seed);
  SyntheticCorpus out;
  std::vector<std::string> filler;
  for (const auto& w : filler_words()) {
    if (!matches_any(lexicons, w)) filler.push_back(w);
  }
  // Background text: a small Zipf-weighted vocabulary mixing filler and
  // lexicon words, so ordinary word sequences recur and stay loose.
  std::vector<std::string> background;
  {
    std::vector<std::string> lexical;
    for (const auto& w : lexicons.words()) {
      if (w.find('\'') == std::string::npos) lexical.push_back(w);
    }
    std::shuffle(filler.begin(), filler.end(), rng);
    std::shuffle(lexical.begin(), lexical.end(), rng);
    for (std::size_t i = 0; i < std::min<std::size_t>(60, filler.size()); ++i) background.push_back(filler[i]);
    for (std::size_t i = 0; i < std::min<std::size_t>(20, lexical.size()); ++i) background.push_back(lexical[i]);
    std::shuffle(background.begin(), background.end(), rng);
  }
  if (background.empty()) fail(ErrorCode::validation, "no background words available");
  std::vector<double> zipf;
  for (std::size_t r = 0; r < background.size(); ++r) zipf.push_back(1.0 / static_cast<double>(r + 1));
  std::discrete_distribution<std::size_t> pick(zipf.begin(), zipf.end());
  std::vector<std::string> used;
  while (out.collocations.size() < bigrams) {
    auto x = nonce_word(rng, 2), y = nonce_word(rng, 2);
    if (x == y || std::find(used.begin(), used.end(), x) != used.end() ||
        std::find(used.begin(), used.end(), y) != used.end()) {
      continue;
    }
    used.push_back(x);
    used.push_back(y);
    out.collocations.emplace_back(x, y);
  }
  for (std::size_t p = 0; p < posts; ++p) {
    std::vector<std::string> words;
    const std::size_t n = 8 + rng() % 6;
    for (std::size_t k = 0; k < n; ++k) {
      words.push_back(background[pick(rng)]);
    }
    if (bigrams > 0) {
      const auto& [x, y] = out.collocations[p % bigrams];
      const auto at = static_cast<std::ptrdiff_t>(rng() % (words.size() + 1));
      words.insert(words.begin() + at, {x, y});
    }
    corpus::RawPost post;
    post.post_id = "c" + std::to_string(p + 1);
    post.author_id = "author-" + std::to_string(rng() % authors + 1);
    for (const auto& w : words) post.text += (post.text.empty() ? "" : " ") + w;
    post.timestamp = static_cast<std::int64_t>(p);
    out.posts.push_back(std::move(post));
  }
  return out;
}

// ------------------------------------------------------------------ Traits CSV

void write_traits_csv(std::ostream& out, const std::vector<AuthorTruth>& authors) {
  out << "author_id,occupation";
  for (auto name : lessn::kTraitNames) out << ',' << name;
  out << '\n';
  const auto old = out.precision(17);
  for (const auto& a : authors) {
    out << a.author_id << ',' << a.occupation;
    for (double v : a.traits) out << ',' << v;
    out << '\n';
  }
  out.precision(old);
}

void write_traits_csv(const std::filesystem::path& path, const std::vector<AuthorTruth>& authors) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io, "cannot write traits: " + path.string());
  write_traits_csv(out, authors);
}

std::vector<AuthorTruth> parse_traits_csv(std::istream& in, std::string_view source) {
  std::vector<AuthorTruth> out;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  std::map<std::string, std::size_t> column;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    const auto where = std::string(source) + ":" + std::to_string(line_no) + ": ";
    if (!header) {
      for (std::size_t i = 0; i < cells.size(); ++i) column[cells[i]] = i;
      if (!column.count("author_id")) fail(ErrorCode::parse, where + "missing author_id column");
      for (auto name : lessn::kTraitNames) {
        if (!column.count(std::string(name))) fail(ErrorCode::parse, where + "missing column " + std::string(name));
      }
      header = true;
      continue;
    }
    AuthorTruth a;
    auto cell = [&](const std::string& name) -> const std::string& {
      const auto i = column.at(name);
      if (i >= cells.size()) fail(ErrorCode::parse, where + "missing cell " + name);
      return cells[i];
    };
    a.author_id = cell("author_id");
    if (column.count("occupation")) a.occupation = cell("occupation");
    for (std::size_t q = 0; q < lessn::kTraitCount; ++q) {
      const auto& s = cell(std::string(lessn::kTraitNames[q]));
      try {
        a.traits[q] = std::stod(s);
      } catch (const std::exception&) {
        fail(ErrorCode::parse, where + "bad number '" + s + "'");
      }
    }
    out.push_back(std::move(a));
  }
  if (!header) fail(ErrorCode::parse, std::string(source) + ": empty traits file");
  return out;
}

std::vector<AuthorTruth> read_traits_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open traits: " + path.string());
  return parse_traits_csv(in, path.string());
}

}  // namespace cogniprof::synthetic
