#include <doctest.h>

#include <functional>
#include <set>
#include <sstream>

#include "cogniprof/error.hpp"
#include "cogniprof/harness.hpp"

using namespace cogniprof;
using namespace cogniprof::harness;

namespace {

const Resources& resources() {
  static const auto res = Resources::load(Resources::default_dir());
  return res;
}

const synthetic::SyntheticCorpus& data() {
  static const auto c = [] {
    synthetic::SyntheticSpec s;
    s.seed = 31;
    s.num_authors = 80;
    s.posts_per_author = 12;
    return synthetic::generate_synthetic(s, resources().lexicons);
  }();
  return c;
}

PipelineConfig small_config() {
  PipelineConfig cfg;
  cfg.seed = 31;
  cfg.tuning_folds = 3;
  cfg.grid_step = 0.1;
  cfg.boost.rounds = 10;
  cfg.phrase_top_k = 200;
  return cfg;
}

const ModelBundle& model() {
  static const auto m = [] {
    const auto cfg = small_config();
    const auto split = split_authors(data().posts, cfg.test_fraction, cfg.seed);
    return train_model(data().posts, data().authors, resources(), cfg, &split);
  }();
  return m;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::state;
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("split is disjoint, complete and seeded") {
    const auto a = split_authors(data().posts, 0.25, 3);
    const auto b = split_authors(data().posts, 0.25, 3);
    const auto c = split_authors(data().posts, 0.25, 4);
    CHECK(a.train == b.train);
    CHECK(a.test == b.test);
    CHECK(a.test != c.test);
    std::set<std::string> train(a.train.begin(), a.train.end());
    for (const auto& id : a.test) CHECK(train.count(id) == 0);
    CHECK(a.train.size() + a.test.size() == data().authors.size());
    CHECK(a.test.size() == 20);
  }

  TEST_CASE("variant names") {
    CHECK(parse_variant("cluster") == Variant::cluster);
    CHECK(parse_variant("conjunct") == Variant::conjunct);
    CHECK(to_string(Variant::curve) == "curve");
    CHECK(code_of([] { parse_variant("forest"); }) == ErrorCode::argument);
  }

  TEST_CASE("corner variants map to fixed mixtures") {
    const auto& m = model();
    CHECK(variant_params(m, Variant::cluster) == coherence::CoherenceParams{0, 0});
    CHECK(variant_params(m, Variant::boost) == coherence::CoherenceParams{1, 0});
    CHECK(variant_params(m, Variant::curve) == coherence::CoherenceParams{0, 1});
    CHECK(variant_params(m, Variant::conjunct) == m.coherence);
  }

  TEST_CASE("evaluation preconditions") {
    const auto& m = model();
    CHECK(code_of([&] { evaluate(m, std::span<const corpus::RawPost>{}); }) == ErrorCode::validation);
    const auto train_posts = posts_of(data().posts, m.train_ids);
    CHECK(code_of([&] { evaluate(m, train_posts); }) == ErrorCode::validation);
  }

  TEST_CASE("report metrics agree with the predictions") {
    const auto& m = model();
    const auto test = posts_of(data().posts, m.test_ids);
    const auto r = evaluate(m, test, Variant::conjunct);
    const auto preds = predict(m, test, Variant::conjunct);
    std::size_t correct = 0, assigned = 0;
    for (const auto& p : preds) {
      assigned += p.occupation.has_value();
      correct += p.occupation && p.occupation == p.truth;
    }
    CHECK(r.correct == correct);
    CHECK(r.assigned == assigned);
    CHECK(r.labeled == m.test_ids.size());
    CHECK(r.precision == doctest::Approx(assigned ? static_cast<double>(correct) / assigned : 0.0));
    CHECK(r.recall == doctest::Approx(static_cast<double>(correct) / r.labeled));
    if (r.precision + r.recall > 0) CHECK(r.f1 == doctest::Approx(2 * r.precision * r.recall / (r.precision + r.recall)));
    std::size_t total = 0;
    for (const auto& row : r.confusion)
      for (auto v : row) total += v;
    CHECK(total == r.labeled);
  }

  TEST_CASE("a conjunct at the origin is the cluster variant") {
    auto m = model();
    m.coherence = {0, 0};
    const auto test = posts_of(data().posts, m.test_ids);
    CHECK(run_variant(m, Variant::conjunct, test).f1 == run_variant(m, Variant::cluster, test).f1);
    const auto a = predict(m, test, Variant::conjunct), b = predict(m, test, Variant::cluster);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].occupation == b[i].occupation);
      CHECK(a[i].fused == b[i].fused);
    }
  }

  TEST_CASE("bundle round trip and damage detection") {
    const auto& m = model();
    std::stringstream ss;
    save_model(m, ss);
    const std::string bytes = ss.str();
    std::istringstream in(bytes);
    const auto back = load_model(in);
    CHECK(back.run_id == m.run_id);
    const auto test = posts_of(data().posts, m.test_ids);
    const auto a = predict(m, test), b = predict(back, test);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].occupation == b[i].occupation);
      CHECK(a[i].fused == b[i].fused);
    }

    std::istringstream truncated(bytes.substr(0, bytes.size() / 2));
    CHECK(code_of([&] { load_model(truncated); }) == ErrorCode::checksum);

    auto flipped = bytes;
    flipped[flipped.size() - 10] ^= 0x01;
    std::istringstream damaged(flipped);
    CHECK(code_of([&] { load_model(damaged); }) == ErrorCode::checksum);

    auto future = bytes;
    future.replace(future.find(" v1 "), 4, " v2 ");
    std::istringstream newer(future);
    CHECK(code_of([&] { load_model(newer); }) == ErrorCode::version);

    std::istringstream junk("hello\n");
    CHECK(code_of([&] { load_model(junk); }) == ErrorCode::parse);
  }

  TEST_CASE("dropping the oldest posts") {
    std::vector<corpus::RawPost> posts;
    for (int i = 0; i < 10; ++i) posts.push_back({"p" + std::to_string(i), "a", "x", std::nullopt, 100 - i});
    posts.push_back({"q", "b", "y", std::nullopt, 5});
    const auto kept = drop_oldest(posts, 0.3);
    CHECK(kept.size() == 8);
    for (const auto& p : kept) {
      if (p.author_id == "a") CHECK(*p.timestamp > 92);
    }
    CHECK(drop_oldest(posts, 0).size() == posts.size());
    CHECK(code_of([&] { drop_oldest(posts, 1.0); }) == ErrorCode::argument);
    posts.push_back({"r", "c", "z", std::nullopt, std::nullopt});
    CHECK(code_of([&] { drop_oldest(posts, 0.2); }) == ErrorCode::validation);
  }

  TEST_CASE("removing stale history helps when early posts are stale") {
    synthetic::SyntheticSpec s;
    s.seed = 12;
    s.num_authors = 80;
    s.posts_per_author = 20;
    s.stale_fraction = 0.3;
    const auto c = synthetic::generate_synthetic(s, resources().lexicons);
    const std::vector<double> fractions = {0.0, 0.3};
    const auto points = history_ablation(small_config(), c.posts, c.authors, resources(), fractions);
    double f0 = -1, f3 = -1;
    for (const auto& p : points) {
      if (p.fraction == 0.0) f0 = p.report.f1;
      if (p.fraction == 0.3) f3 = p.report.f1;
    }
    REQUIRE(f0 >= 0);
    REQUIRE(f3 >= 0);
    CHECK(f3 > f0);
  }

  TEST_CASE("index benchmark rows") {
    const std::vector<std::size_t> sizes = {5, 10};
    BenchOptions o;
    o.repetitions = 3;
    const auto rows = bench_index(sizes, 50, o);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].boundaries == 5);
    CHECK(rows[1].queries == 50);
    for (const auto& r : rows) CHECK(r.ratio == doctest::Approx(r.rwtree_median_us / r.rtree_median_us));
  }
}
