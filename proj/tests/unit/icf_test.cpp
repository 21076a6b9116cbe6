#include <doctest.h>

#include <random>

#include "cogniprof/error.hpp"
#include "cogniprof/icf.hpp"
#include "oracles.hpp"

using namespace cogniprof;
using namespace cogniprof::icf;

TEST_SUITE("icf") {
  TEST_CASE("pool adjacent violators examples") {
    const std::vector<double> ones = {1, 1, 1};
    CHECK(pava(std::vector<double>{3, 1, 2}, ones) == std::vector<double>{2, 2, 2});
    CHECK(pava(std::vector<double>{1, 3, 2}, ones) == std::vector<double>{1, 2.5, 2.5});
    CHECK(pava(std::vector<double>{1, 2, 3}, ones) == std::vector<double>{1, 2, 3});
    const auto w = pava(std::vector<double>{2, 0}, std::vector<double>{3, 1});
    CHECK(w[0] == doctest::Approx(1.5));
    CHECK(w[1] == doctest::Approx(1.5));
  }

  TEST_CASE("fit is idempotent") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<WeightedPoint> pts;
    for (int i = 0; i < 30; ++i) pts.push_back({u(rng), u(rng), 0.5 + u(rng)});
    const auto f = pava_fit(pts);
    std::vector<WeightedPoint> again;
    for (std::size_t i = 0; i < f.breakpoints.size(); ++i) again.push_back({f.breakpoints[i], f.values[i], 1});
    const auto g = pava_fit(again);
    CHECK(g.values == f.values);
    for (std::size_t i = 1; i < f.values.size(); ++i) CHECK(f.values[i - 1] <= f.values[i]);
  }

  TEST_CASE("fit matches the exhaustive optimum with tied x") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 40; ++trial) {
      std::vector<WeightedPoint> pts;
      std::vector<oracle::Obs> obs;
      for (int i = 0; i < 7; ++i) {
        const double x = static_cast<double>(rng() % 4);
        const double y = static_cast<double>(rng() % 10) / 3.0;
        const double w = 1.0 + static_cast<double>(rng() % 3);
        pts.push_back({x, y, w});
        obs.push_back({x, y, w});
      }
      const auto f = pava_fit(pts);
      double obj = 0;
      for (const auto& p : pts) obj += p.w * (p.y - f.predict(p.x)) * (p.y - f.predict(p.x));
      CHECK(obj == doctest::Approx(oracle::isotonic_objective(obs)).epsilon(1e-10));
    }
  }

  TEST_CASE("prediction is a clamped left step") {
    const std::vector<WeightedPoint> pts = {{0, 0, 1}, {1, 1, 1}, {2, 3, 1}};
    const auto f = pava_fit(pts);
    CHECK(f.predict(-5) == 0);
    CHECK(f.predict(0.5) == 0);
    CHECK(f.predict(1) == 1);
    CHECK(f.predict(1.99) == 1);
    CHECK(f.predict(9) == 3);
    CHECK_THROWS_AS(pava_fit(std::vector<WeightedPoint>{}), Error);
  }

  TEST_CASE("curve weight") {
    CHECK(curve_weight_raw(std::vector<double>{1, 2, 3}) == doctest::Approx(0.5));
    CHECK(curve_weight_raw(std::vector<double>{4, 4, 4}) == doctest::Approx(1.0 / kVarianceFloor));
    CHECK(curve_weight_raw(std::vector<double>{4, 4}, 0.25) == doctest::Approx(4.0));
  }

  TEST_CASE("curve model prefers the occupation whose trait rises") {
    std::vector<lessn::CognitiveFeatureVector> f;
    std::vector<std::size_t> labels;
    for (int i = 0; i < 40; ++i) {
      lessn::CognitiveFeatureVector c;
      const double x = -1.0 + i / 20.0;
      c.values.fill(x);
      f.push_back(c);
      labels.push_back(x > 0 ? 1 : 0);
    }
    const auto m = CurveModel::train(f, labels, 2);
    lessn::CognitiveFeatureVector hi, lo;
    hi.values.fill(0.9);
    lo.values.fill(-0.9);
    CHECK(m.score(hi, 1) > m.score(hi, 0));
    CHECK(m.score(lo, 0) > m.score(lo, 1));
    for (std::size_t q = 0; q < kTraitCount; ++q) {
      CHECK(m.signs[q][1] == 1);
      CHECK(m.signs[q][0] == -1);
    }
  }
}
