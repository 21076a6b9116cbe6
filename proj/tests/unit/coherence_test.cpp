#include <doctest.h>

#include <random>

#include "cogniprof/coherence.hpp"
#include "cogniprof/error.hpp"

using namespace cogniprof;
using namespace cogniprof::coherence;

namespace {

ModuleScores scores(std::vector<double> c, std::vector<double> b, std::vector<double> v, std::size_t label) {
  ModuleScores s;
  s.cluster = std::move(c);
  s.boost = std::move(b);
  s.curve = std::move(v);
  s.label = label;
  return s;
}

}  // namespace

TEST_SUITE("coherence") {
  TEST_CASE("fused weight examples") {
    CHECK(coherence_weight(0.2, 0.4, 0.6, {0.35, 0.5}) == doctest::Approx(0.15 * 0.2 + 0.35 * 0.4 + 0.5 * 0.6));
    CHECK(coherence_weight(0.2, 0.4, 0.6, {0.35, 0.5}) == doctest::Approx(0.47));
    CHECK(coherence_weight(0.123, 0.9, 0.4, {0, 0}) == 0.123);
    for (double a : {0.0, 0.3, 1.0}) CHECK(coherence_weight(0.7, 0.7, 0.7, {a, 1 - a}) == doctest::Approx(0.7));
    CHECK_THROWS_AS(coherence_weight(0.1, 0.1, 0.1, {0.6, 0.5}), Error);
    CHECK_THROWS_AS(coherence_weight(0.1, 0.1, 0.1, {-0.1, 0.5}), Error);
  }

  TEST_CASE("prediction respects the candidate mask") {
    auto s = scores({0.9, 0.1, 0.5}, {0, 0, 0}, {0, 0, 0}, 0);
    CHECK(fuse_predict(s, {}) == 0);
    s.candidates = {false, true, true};
    CHECK(fuse_predict(s, {}) == 2);
    s.candidates = {false, false, false};
    CHECK(fuse_predict(s, {}) == kNoClass);
    auto tie = scores({0.5, 0.5}, {0, 0}, {0, 0}, 0);
    CHECK(fuse_predict(tie, {}) == 0);
  }

  TEST_CASE("argmax survives adding a constant") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0, 0.5);
    for (int t = 0; t < 50; ++t) {
      auto s = scores({u(rng), u(rng), u(rng)}, {u(rng), u(rng), u(rng)}, {u(rng), u(rng), u(rng)}, 0);
      const CoherenceParams p{0.3, 0.4};
      auto shifted = s;
      for (auto* v : {&shifted.cluster, &shifted.boost, &shifted.curve})
        for (auto& x : *v) x += 0.25;
      CHECK(fuse_predict(s, p) == fuse_predict(shifted, p));
    }
  }

  TEST_CASE("f1 score") {
    const std::vector<std::size_t> truth = {0, 1, 2, 0, 1, 2, 0, 1, 2, 0};
    auto pred = truth;
    pred[0] = 1;
    pred[1] = 0;
    auto s = f1_score(pred, truth);
    CHECK(s.correct == 8);
    CHECK(s.precision == doctest::Approx(0.8));
    CHECK(s.recall == doctest::Approx(0.8));
    CHECK(s.f1 == doctest::Approx(0.8));
    pred = truth;
    pred[0] = kNoClass;
    pred[1] = kNoClass;
    s = f1_score(pred, truth);
    CHECK(s.assigned == 8);
    CHECK(s.precision == doctest::Approx(1.0));
    CHECK(s.recall == doctest::Approx(0.8));
    CHECK(s.f1 == doctest::Approx(2 * 0.8 / 1.8));
    const std::vector<std::size_t> none(3, kNoClass), t3 = {0, 1, 2};
    CHECK(f1_score(none, t3).f1 == 0.0);
  }

  TEST_CASE("flat surface resolves to the origin") {
    std::vector<ModuleScores> val;
    for (std::size_t i = 0; i < 6; ++i) {
      std::vector<double> w = {0.1, 0.2};
      w[i % 2] = 0.9;
      val.push_back(scores(w, w, w, i % 3 == 0 ? 0 : 1));
    }
    const auto r = tune(val);
    CHECK(r.best == CoherenceParams{0, 0});
    CHECK(r.surface.size() == 231);
    for (const auto& c : r.surface) CHECK(c.f1 == r.surface.front().f1);
  }

  TEST_CASE("a perfect curve module pushes beta to the top") {
    // curve ranks the truth first by a hair; cluster and boost both back a
    // wrong class, so only beta = 1 recovers every label
    std::vector<ModuleScores> val;
    for (std::size_t i = 0; i < 30; ++i) {
      const std::size_t y = i % 3, wrong = (y + 1) % 3;
      std::vector<double> curve(3, 0.0), other(3, 0.0);
      curve[y] = 1.0;
      curve[wrong] = 0.99;
      other[wrong] = 1.0;
      val.push_back(scores(other, other, curve, y));
    }
    const auto r = tune(val);
    CHECK(r.best_f1 == doctest::Approx(1.0));
    CHECK(r.best.beta == doctest::Approx(1.0));
    CHECK(r.best.alpha == 0.0);
  }

  TEST_CASE("tuning errors and tie order") {
    CHECK_THROWS_AS(tune(std::span<const ModuleScores>{}), Error);
    const auto r = tune([](const CoherenceParams& p) { return p.alpha + p.beta >= 0.5 ? 1.0 : 0.0; }, 0.25);
    CHECK(r.best.alpha == 0.0);
    CHECK(r.best.beta == 0.5);
    CHECK(r.surface.size() == 15);
  }
}
