#include <doctest.h>

#include <random>

#include "cogniprof/boost.hpp"
#include "cogniprof/error.hpp"

using namespace cogniprof;
using namespace cogniprof::boost;

TEST_SUITE("boost") {
  TEST_CASE("initial constant is the target mean") {
    CHECK(init_constant(std::vector<double>{1, 2, 3, 6}) == doctest::Approx(3.0));
    CHECK(init_constant(std::vector<double>{-1}) == -1.0);
    CHECK_THROWS_AS(init_constant(std::vector<double>{}), Error);
  }

  TEST_CASE("zero residuals give a zero tree") {
    const std::vector<double> x = {-1, -0.5, 0, 0.5, 1, 1.5};
    const std::vector<double> t = {2, 2, 2, 2, 2, 2};
    BoostParams p;
    p.min_leaf = 1;
    const auto tree = fit_round(t, x, t, p);
    for (double q : x) CHECK(tree.predict(q) == 0.0);
  }

  TEST_CASE("training error never rises") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<double> x(60), t(60);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = u(rng);
      t[i] = x[i] > 0.2 ? 1.0 : 0.0;
    }
    std::vector<double> mse;
    BoostParams p;
    p.rounds = 20;
    const auto e = fit_ensemble(x, t, p, &mse);
    REQUIRE(mse.size() == p.rounds + 1);
    for (std::size_t i = 1; i < mse.size(); ++i) CHECK(mse[i] <= mse[i - 1] + 1e-12);
    CHECK(e.predict(0.9) > e.predict(-0.9));
    CHECK(e.predict(0.9, 0) == e.init);
  }

  TEST_CASE("depth zero predicts the mean") {
    const std::vector<double> x = {0.1, 0.4, -0.3, 0.8};
    const std::vector<double> t = {1, 0, 0, 1};
    BoostParams p;
    p.max_depth = 0;
    const auto e = fit_ensemble(x, t, p);
    for (double q : {-1.0, 0.0, 0.5, 2.0}) CHECK(e.predict(q) == init_constant(t));
  }

  TEST_CASE("points at or above a threshold go left") {
    Tree tree;
    tree.nodes.resize(3);
    tree.nodes[0].leaf = false;
    tree.nodes[0].threshold = 0.0;
    tree.nodes[0].left = 1;
    tree.nodes[0].right = 2;
    tree.nodes[1].value = 5;
    tree.nodes[2].value = -5;
    CHECK(tree.predict(0.0) == 5);
    CHECK(tree.predict(-1e-9) == -5);
    CHECK(tree.leaf_count() == 2);
  }

  TEST_CASE("boost weight examples") {
    const std::vector<double> o1 = {0.3}, h0 = {0.0}, one = {1.0};
    CHECK(boost_weight(o1, h0) == doctest::Approx(0.3));
    CHECK(boost_weight(one, h0) == doctest::Approx(1.0));
    CHECK(boost_weight(h0, one) == 0.0);
    CHECK(boost_weight(one, one) == doctest::Approx(0.5));
    const std::vector<double> far = {7.0}, neg = {-3.0};
    CHECK(boost_weight(far, neg) == doctest::Approx(0.5));
    const std::vector<double> o2 = {1.0, 0.0}, h2 = {0.0, 0.0};
    CHECK(boost_weight(o2, h2) == doctest::Approx(0.5));
  }

  TEST_CASE("majority vote and its tie rule") {
    // three dimensions: class 1 wins two votes
    auto p = majority_vote({{0.1, 0.9, 0.0}, {0.2, 0.7, 0.1}, {0.8, 0.1, 0.0}});
    CHECK(p.occupation == 1);
    CHECK(p.votes == std::vector<std::size_t>{1, 2, 0});
    // one vote each for classes 0 and 2; class 2 has the larger summed score
    p = majority_vote({{0.6, 0.1, 0.5}, {0.0, 0.1, 0.9}});
    CHECK(p.occupation == 2);
    // full tie goes to the lower index
    p = majority_vote({{1.0, 0.0}, {0.0, 1.0}});
    CHECK(p.occupation == 0);
  }

  TEST_CASE("trained ensembles separate occupations along a trait") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0, 0.05);
    std::vector<lessn::CognitiveFeatureVector> f;
    std::vector<std::size_t> labels;
    for (int i = 0; i < 40; ++i) {
      lessn::CognitiveFeatureVector c;
      const std::size_t y = i % 2;
      for (std::size_t q = 0; q < kTraitCount; ++q) c[q] = (y ? 0.5 : -0.5) + g(rng);
      f.push_back(c);
      labels.push_back(y);
    }
    const auto m = BoostModel::train(f, labels, 2);
    lessn::CognitiveFeatureVector hi, lo;
    hi.values.fill(0.5);
    lo.values.fill(-0.5);
    CHECK(m.predict_occupation(hi).occupation == 1);
    CHECK(m.predict_occupation(lo).occupation == 0);
    CHECK(m.weight(hi, 1) > m.weight(hi, 0));
    for (double w : m.weights(hi)) {
      CHECK(w >= 0.0);
      CHECK(w <= 1.0);
    }
  }
}
