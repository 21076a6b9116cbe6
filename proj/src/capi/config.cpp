#include "config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>

#include "cogniprof/error.hpp"

namespace cogniprof::capi {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view want) {
  fail(ErrorCode::argument, "setting " + std::string(key) + ": expected " + std::string(want) + ", got '" +
                                std::string(value) + "'");
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v, "a number");
  return out;
}

template <typename Int>
Int to_int(std::string_view key, std::string_view v) {
  Int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v, "an integer");
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, v, "true or false");
}

using Setter = std::function<void(Settings&, std::string_view, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = [] {
    std::map<std::string, Setter, std::less<>> t;
    auto real = [&](const char* name, auto member) {
      t[name] = [member](Settings& s, std::string_view k, std::string_view v) { member(s) = to_double(k, v); };
    };
    auto count = [&](const char* name, auto member) {
      t[name] = [member](Settings& s, std::string_view k, std::string_view v) {
        member(s) = to_int<std::size_t>(k, v);
      };
    };
    auto flag = [&](const char* name, auto member) {
      t[name] = [member](Settings& s, std::string_view k, std::string_view v) { member(s) = to_bool(k, v); };
    };

    t["seed"] = [](Settings& s, std::string_view k, std::string_view v) {
      s.pipeline.seed = s.synth.seed = to_int<std::uint64_t>(k, v);
    };
    t["data_dir"] = [](Settings& s, std::string_view, std::string_view v) { s.data_dir = std::string(v); };
    t["lexicons"] = [](Settings& s, std::string_view, std::string_view v) { s.lexicons = std::string(v); };
    t["slang"] = [](Settings& s, std::string_view, std::string_view v) { s.slang = std::string(v); };

    real("test_fraction", [](Settings& s) -> double& { return s.pipeline.test_fraction; });
    count("tuning_folds", [](Settings& s) -> std::size_t& { return s.pipeline.tuning_folds; });
    flag("phrases", [](Settings& s) -> bool& { return s.pipeline.use_phrases; });
    real("epsilon", [](Settings& s) -> double& { return s.pipeline.segment_epsilon; });
    count("max_n", [](Settings& s) -> std::size_t& { return s.pipeline.max_phrase_length; });
    count("top_k", [](Settings& s) -> std::size_t& { return s.pipeline.phrase_top_k; });
    real("popularity_cap", [](Settings& s) -> double& { return s.pipeline.popularity_cap; });
    count("tfidf_dims", [](Settings& s) -> std::size_t& { return s.pipeline.tfidf_dims; });
    real("svm_c", [](Settings& s) -> double& { return s.pipeline.svm_c; });
    t["eta"] = [](Settings& s, std::string_view k, std::string_view v) { s.pipeline.eta = to_double(k, v); };
    flag("inverse_variance", [](Settings& s) -> bool& { return s.pipeline.inverse_variance; });
    count("boost_rounds", [](Settings& s) -> std::size_t& { return s.pipeline.boost.rounds; });
    real("learning_rate", [](Settings& s) -> double& { return s.pipeline.boost.learning_rate; });
    count("max_depth", [](Settings& s) -> std::size_t& { return s.pipeline.boost.max_depth; });
    count("min_leaf", [](Settings& s) -> std::size_t& { return s.pipeline.boost.min_leaf; });
    flag("fixed_root", [](Settings& s) -> bool& { return s.pipeline.boost.fixed_root; });
    real("grid_step", [](Settings& s) -> double& { return s.pipeline.grid_step; });
    t["alpha"] = [](Settings& s, std::string_view k, std::string_view v) { s.alpha = to_double(k, v); };
    t["beta"] = [](Settings& s, std::string_view k, std::string_view v) { s.beta = to_double(k, v); };
    count("delta", [](Settings& s) -> std::size_t& { return s.pipeline.delta; });
    count("candidate_k", [](Settings& s) -> std::size_t& { return s.pipeline.candidate_k; });
    flag("coverage_recall", [](Settings& s) -> bool& { return s.pipeline.coverage_recall; });
    t["abstain_floor"] = [](Settings& s, std::string_view k, std::string_view v) {
      s.pipeline.abstain_floor = to_double(k, v);
    };

    count("authors", [](Settings& s) -> std::size_t& { return s.synth.num_authors; });
    count("posts_per_author", [](Settings& s) -> std::size_t& { return s.synth.posts_per_author; });
    count("occupations", [](Settings& s) -> std::size_t& { return s.synth.occupations; });
    real("noise", [](Settings& s) -> double& { return s.synth.noise; });
    real("profile_swap", [](Settings& s) -> double& { return s.synth.profile_swap; });
    real("trait_jitter", [](Settings& s) -> double& { return s.synth.trait_jitter; });
    real("coupling", [](Settings& s) -> double& { return s.synth.coupling; });
    count("collocations", [](Settings& s) -> std::size_t& { return s.synth.collocations; });
    real("stale_fraction", [](Settings& s) -> double& { return s.synth.stale_fraction; });
    count("words_per_post", [](Settings& s) -> std::size_t& { return s.synth.words_per_post; });
    count("idiolect", [](Settings& s) -> std::size_t& { return s.synth.idiolect; });
    real("lexicon_rate", [](Settings& s) -> double& { return s.synth.lexicon_rate; });
    real("jargon_rate", [](Settings& s) -> double& { return s.synth.jargon_rate; });
    real("collocation_rate", [](Settings& s) -> double& { return s.synth.collocation_rate; });
    real("emoji_rate", [](Settings& s) -> double& { return s.synth.emoji_rate; });
    real("slang_rate", [](Settings& s) -> double& { return s.synth.slang_rate; });
    real("elongation_rate", [](Settings& s) -> double& { return s.synth.elongation_rate; });
    t["start_time"] = [](Settings& s, std::string_view k, std::string_view v) {
      s.synth.start_time = to_int<std::int64_t>(k, v);
    };
    return t;
  }();
  return table;
}

}  // namespace

Settings::Settings() : data_dir(harness::Resources::default_dir()) {}

void Settings::set(std::string_view key, std::string_view value) {
  std::string k(trim(key));
  for (auto& c : k) {
    if (c == '-') c = '_';
  }
  const auto it = setters().find(k);
  if (it == setters().end()) fail(ErrorCode::argument, "unknown setting '" + k + "'");
  it->second(*this, k, trim(value));
}

void Settings::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open config " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view v = line;
    if (const auto hash = v.find('#'); hash != std::string_view::npos) v = v.substr(0, hash);
    v = trim(v);
    if (v.empty()) continue;
    const auto eq = v.find('=');
    if (eq == std::string_view::npos) {
      fail(ErrorCode::parse, path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    }
    auto value = trim(v.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    set(v.substr(0, eq), value);
  }
}

void Settings::apply_env() {
  for (const auto& key : setting_keys()) {
    std::string name = "COGNIPROF_";
    for (char c : key) name += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (const char* v = std::getenv(name.c_str())) set(key, v);
  }
}

harness::PipelineConfig Settings::resolved() const {
  auto cfg = pipeline;
  if (alpha || beta) cfg.coherence = coherence::CoherenceParams{alpha.value_or(0), beta.value_or(0)};
  return cfg;
}

harness::Resources Settings::resources() const {
  auto res = harness::Resources::load(data_dir);
  if (lexicons) res.lexicons = lessn::LexiconSet::load_dir(*lexicons);
  if (slang) res.slang = corpus::SlangTable::load(*slang);
  return res;
}

const std::vector<std::string>& setting_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, fn] : setters()) k.push_back(name);
    return k;
  }();
  return keys;
}

}  // namespace cogniprof::capi
