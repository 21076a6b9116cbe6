#include <doctest.h>

#include <random>
#include <sstream>

#include "cogniprof/error.hpp"
#include "cogniprof/harness.hpp"
#include "cogniprof/lessn.hpp"

using namespace cogniprof;
using namespace cogniprof::lessn;

namespace {

corpus::CleanPost post(std::vector<std::string> tokens, std::string author = "a") {
  corpus::CleanPost p;
  p.post_id = "p";
  p.author_id = std::move(author);
  p.tokens = std::move(tokens);
  return p;
}

LinguisticFeatureVector fv(std::initializer_list<std::pair<const char*, double>> e) {
  LinguisticFeatureVector v;
  for (const auto& [k, w] : e) v.entries[k] = w;
  return v;
}

}  // namespace

TEST_SUITE("lessn") {
  TEST_CASE("bundled NRC lexicon has the ten categories") {
    const auto nrc = Lexicon::load(harness::Resources::default_dir() / "lexicons" / "nrc.tsv");
    CHECK(nrc.kind() == LexiconKind::nrc);
    CHECK(nrc.categories().size() == kNrcCategories.size());
    for (auto name : kNrcCategories) CHECK(nrc.category_index(name).has_value());
  }

  TEST_CASE("lexicon rows and kinds") {
    std::istringstream bad("anger\tra.*\tregex\n");
    CHECK_THROWS_AS(Lexicon::parse(bad, LexiconKind::liwc), Error);
    std::istringstream unnamed("anger\tmad\tword\n");
    CHECK_THROWS_AS(Lexicon::parse(unnamed, std::nullopt), Error);
    std::istringstream good("# lexicon: liwc\nwork\tjob\tword\nwork\temploy\tprefix\n");
    const auto lex = Lexicon::parse(good, std::nullopt);
    CHECK(lex.kind() == LexiconKind::liwc);
    std::vector<std::size_t> hits;
    lex.match_term("employee", hits);
    CHECK(hits.size() == 1);
    hits.clear();
    lex.match_term("workers", hits);
    CHECK(hits.empty());
    std::istringstream again(lex.to_tsv());
    CHECK(Lexicon::parse(again, std::nullopt).to_tsv() == lex.to_tsv());
  }

  TEST_CASE("pearson examples") {
    const std::vector<double> x = {1, 2, 3};
    CHECK(pearson(x, std::vector<double>{6, 5, 4}) == doctest::Approx(-1.0));
    CHECK(pearson(x, std::vector<double>{1, 3, 2}) == doctest::Approx(0.5));
    CHECK(pearson(x, x) == doctest::Approx(1.0));
    CHECK_THROWS_AS(pearson(x, std::vector<double>{2, 2, 2}), Error);
    CHECK_THROWS_AS(pearson(x, std::vector<double>{1, 2}), Error);
  }

  TEST_CASE("pearson is invariant under positive affine maps") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-5, 5);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> x(12), y(12), z(12);
      for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = u(rng);
        y[i] = u(rng) + 0.3 * x[i];
      }
      const double a = 0.5 + std::abs(u(rng)), b = u(rng);
      for (std::size_t i = 0; i < x.size(); ++i) z[i] = a * x[i] + b;
      CHECK(pearson(z, y) == doctest::Approx(pearson(x, y)).epsilon(1e-12));
      CHECK(pearson(x, y) >= -1.0);
      CHECK(pearson(x, y) <= 1.0);
    }
  }

  TEST_CASE("mapping onto the cognitive dimensions") {
    CorrelationMatrix m;
    m.rows["f"] = {0.2, -0.4, 0.6, 0.0, 1.0};
    m.rows["g"] = {0.4, 0.4, -0.2, 1.0, -1.0};

    CHECK(map_to_cognitive(LinguisticFeatureVector{}, m) == CognitiveFeatureVector{});
    CHECK(map_to_cognitive(fv({{"f", 0}, {"g", 0}}), m) == CognitiveFeatureVector{});

    const auto one = map_to_cognitive(fv({{"f", 0.7}}), m);
    for (std::size_t q = 0; q < kTraitCount; ++q) CHECK(one[q] == doctest::Approx(m.rows["f"][q]));

    const auto both = map_to_cognitive(fv({{"f", 0.3}, {"g", 0.3}}), m);
    for (std::size_t q = 0; q < kTraitCount; ++q) {
      CHECK(both[q] == doctest::Approx(0.5 * (m.rows["f"][q] + m.rows["g"][q])));
    }
  }

  TEST_CASE("an author identical to the corpus sits at the midpoint") {
    const auto res = harness::Resources::load(harness::Resources::default_dir());
    const std::vector<corpus::CleanPost> posts = {post({"happy", "joy", "work", "office"}),
                                                  post({"angry", "sad", "i", "we", "meeting"})};
    const auto stats = corpus_stats(posts, res.lexicons);
    const auto lv = extract_linguistic(posts, res.lexicons, stats);
    std::size_t seen = 0;
    for (const auto& [name, w] : lv.entries) {
      if (name == kSentiPositive || name == kSentiNegative || w == 0) continue;
      CHECK(w == doctest::Approx(0.5));
      ++seen;
    }
    CHECK(seen > 0);
  }

  TEST_CASE("trained correlation cells are Pearson coefficients") {
    std::vector<TrainingRow> rows;
    for (int i = 0; i < 12; ++i) {
      TrainingRow r;
      const double x = i % 5 + 0.1 * i;
      r.features = fv({{"f", x}, {"flat", 1.0}});
      r.traits = {x, -x, static_cast<double>(i * i % 7), 0.25, static_cast<double>(i)};
      rows.push_back(r);
    }
    const auto m = train_correlation(rows);
    CHECK(m.provenance == MatrixProvenance::trained);
    const auto* f = m.row("f");
    REQUIRE(f != nullptr);
    CHECK((*f)[0] == doctest::Approx(1.0));
    CHECK((*f)[1] == doctest::Approx(-1.0));
    std::vector<double> x, t;
    for (const auto& r : rows) {
      x.push_back(r.features.weight("f"));
      t.push_back(r.traits[2]);
    }
    CHECK((*f)[2] == doctest::Approx(pearson(x, t)));
    CHECK((*f)[3] == 0.0);  // constant trait
    const auto* flat = m.row("flat");
    REQUIRE(flat != nullptr);
    for (double v : *flat) CHECK(v == 0.0);

    rows.resize(kMinCorrelationRows - 1);
    CHECK_THROWS_AS(train_correlation(rows), Error);
  }

  TEST_CASE("matrix csv round trip") {
    CorrelationMatrix m;
    m.rows["liwc.work"] = {0.1, -0.2, 0.3, -0.4, 0.5};
    std::stringstream ss;
    m.save_csv(ss);
    const auto back = CorrelationMatrix::parse_csv(ss);
    REQUIRE(back.row("liwc.work") != nullptr);
    CHECK(*back.row("liwc.work") == m.rows["liwc.work"]);
    std::istringstream broken("feature,openness\nx,0.1\n");
    CHECK_THROWS_AS(CorrelationMatrix::parse_csv(broken), Error);
  }
}
