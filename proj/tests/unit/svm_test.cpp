#include <doctest.h>

#include <cmath>
#include <random>

#include "cogniprof/error.hpp"
#include "cogniprof/svm.hpp"
#include "oracles.hpp"

using namespace cogniprof;
using namespace cogniprof::svm;

namespace {

KernelParams unit_kernel(double C = 1.0) {
  KernelParams p;
  p.eta = 1.0;
  p.C = C;
  return p;
}

}  // namespace

TEST_SUITE("svm") {
  TEST_CASE("kernel values") {
    const auto p = unit_kernel();
    const std::vector<double> a = {0.3, -0.2, 0.9}, b = {1.3, -0.2, 0.9};
    CHECK(kernel(a, a, p) == 1.0);
    CHECK(kernel(a, b, p) == doctest::Approx(std::exp(-1.0)));
    auto scaled = p;
    scaled.scale = {2.0, 1.0, 1.0};
    CHECK(kernel(a, b, scaled) == doctest::Approx(std::exp(-4.0)));
    scaled.scale = {0.0, 1.0, 1.0};
    CHECK(kernel(a, b, scaled) == 1.0);
    auto bad = p;
    bad.eta = 0;
    CHECK_THROWS_AS(bad.validate(), Error);
  }

  TEST_CASE("idf and tf-idf vectors") {
    const std::vector<std::vector<Term>> docs = {{"the", "cat"}, {"the", "dog"}, {"the"}};
    const auto t = Tfidf::fit(docs, 64);
    CHECK(t.documents == 3);
    CHECK(t.idf("the") == doctest::Approx(1.0));
    CHECK(t.idf("cat") == doctest::Approx(std::log(4.0 / 2.0) + 1.0));
    CHECK(t.idf("unseen") == doctest::Approx(std::log(4.0) + 1.0));
    const auto v = t.transform(docs[0]);
    double norm = 0;
    for (double x : v) norm += x * x;
    CHECK(norm == doctest::Approx(1.0));
    for (double x : t.transform(std::vector<Term>{})) CHECK(x == 0.0);
    CHECK(hash_bucket("cat", 64) == hash_bucket("cat", 64));
    CHECK(hash_bucket("cat", 64) < 64);
  }

  TEST_CASE("two opposite points share one multiplier") {
    for (double gap : {0.2, 1.0, 3.0}) {
      Eigen::MatrixXd K(2, 2);
      const double k = std::exp(-gap * gap);
      K << 1, k, k, 1;
      const std::vector<int> y = {1, -1};
      const auto s = solve_dual(K, y, 10.0);
      CHECK(s.alphas[0] == doctest::Approx(s.alphas[1]).epsilon(1e-6));
      // stationary point of 2a - a^2 (1 - k), clipped to the box
      CHECK(s.alphas[0] == doctest::Approx(std::min(10.0, 1.0 / (1.0 - k))).epsilon(1e-4));
      CHECK(s.objective == doctest::Approx(oracle::svm_dual_optimum(K, y, 10.0)).epsilon(1e-6));
    }
  }

  TEST_CASE("dual solutions are feasible and optimal on random problems") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> g(0, 1);
    const auto p = unit_kernel(0.8);
    for (int trial = 0; trial < 30; ++trial) {
      const std::size_t n = 2 + trial % 3;
      std::vector<std::vector<double>> rows(n, std::vector<double>(3));
      for (auto& r : rows)
        for (auto& v : r) v = g(rng);
      std::vector<int> y(n, 1);
      y[0] = -1;
      for (std::size_t i = 1; i < n; ++i) y[i] = rng() % 2 ? 1 : -1;
      y[1] = 1;
      const auto K = gram_matrix(rows, p);
      const auto s = solve_dual(K, y, p.C);
      double eq = 0;
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(s.alphas[static_cast<Eigen::Index>(i)] >= -1e-12);
        CHECK(s.alphas[static_cast<Eigen::Index>(i)] <= p.C + 1e-12);
        eq += y[i] * s.alphas[static_cast<Eigen::Index>(i)];
      }
      CHECK(std::abs(eq) < 1e-9);
      CHECK(s.objective == doctest::Approx(oracle::svm_dual_optimum(K, y, p.C)).epsilon(1e-5));
    }
  }

  TEST_CASE("one-class labels are rejected") {
    Eigen::MatrixXd K = Eigen::MatrixXd::Identity(2, 2);
    const std::vector<int> same = {1, 1};
    CHECK_THROWS_AS(solve_dual(K, same, 1.0), Error);
  }

  TEST_CASE("gram matrix is symmetric positive semidefinite") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-2, 2);
    std::vector<std::vector<double>> rows(25, std::vector<double>(6));
    for (auto& r : rows)
      for (auto& v : r) v = u(rng);
    auto p = unit_kernel();
    p.eta = 0.3;
    p.scale = inverse_std_scaling(rows);
    const auto K = gram_matrix(rows, p);
    CHECK((K - K.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(oracle::min_eigenvalue(K) >= -1e-10);
    for (Eigen::Index i = 0; i < K.rows(); ++i) CHECK(K(i, i) == 1.0);
  }

  TEST_CASE("enclosing sphere of two points") {
    const double k = std::exp(-0.5);
    Eigen::MatrixXd K(2, 2);
    K << 1, k, k, 1;
    const auto s = solve_sphere(K, 1.0);
    CHECK(s.betas[0] == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(s.betas[1] == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(s.radius_sq == doctest::Approx(0.5 * (1 - k)).epsilon(1e-6));
    CHECK_THROWS_AS(solve_sphere(K, 0.4), Error);
  }

  TEST_CASE("sphere distance of a training point matches the kernel expansion") {
    const std::vector<std::vector<double>> rows = {{0, 0}, {1, 0}, {0, 1}};
    const auto p = unit_kernel();
    const auto K = gram_matrix(rows, p);
    const auto s = solve_sphere(K, 1.0);
    double sum = 0;
    for (double b : s.betas) sum += b;
    CHECK(sum == doctest::Approx(1.0));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      double cross = 0;
      for (std::size_t j = 0; j < rows.size(); ++j) cross += s.betas[static_cast<Eigen::Index>(j)] * K(i, j);
      CHECK(sphere_distance_sq(rows[i], rows, s, p) == doctest::Approx(1.0 - 2 * cross + s.center_sq));
    }
  }

  TEST_CASE("two well separated blobs form two clusters") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g(0, 0.05);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 10; ++i) rows.push_back({g(rng), g(rng)});
    for (int i = 0; i < 10; ++i) rows.push_back({4 + g(rng), 4 + g(rng)});
    auto p = unit_kernel();
    p.eta = 2.0;
    const auto r = svc_spheres(rows, p);
    CHECK(r.clusters == 2);
    for (int i = 1; i < 10; ++i) CHECK(r.assignment[i] == r.assignment[0]);
    for (int i = 11; i < 20; ++i) CHECK(r.assignment[i] == r.assignment[10]);
    CHECK(r.assignment[0] != r.assignment[10]);
  }

  TEST_CASE("a model without support vectors gives flat cluster weights") {
    SvmModel m;
    m.params = unit_kernel();
    m.classes = 3;
    m.vectors = {{0.0}, {1.0}};
    m.coef = {{0, 0}, {0, 0}, {0, 0}};
    m.bias = {0, 0, 0};
    m.norm_sq = {0, 0, 0};
    const std::vector<double> x = {0.5};
    for (double v : m.cluster_raw(x)) CHECK(v == 0.0);
    for (double v : m.cluster_weights(x)) CHECK(v == 0.0);
  }

  TEST_CASE("min-max rescale") {
    const auto r = min_max_rescale(std::vector<double>{2, 4, 3});
    CHECK(r == std::vector<double>{0, 1, 0.5});
    CHECK(min_max_rescale(std::vector<double>{1, 1}) == std::vector<double>{0, 0});
  }

  TEST_CASE("one-vs-rest separates three blobs") {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> g(0, 0.1);
    std::vector<AuthorRepresentation> data;
    const double centers[3][2] = {{0, 0}, {2, 0}, {0, 2}};
    for (std::size_t c = 0; c < 3; ++c) {
      for (int i = 0; i < 8; ++i) {
        AuthorRepresentation a;
        a.cognitive = {centers[c][0] + g(rng), centers[c][1] + g(rng), 0, 0, 0};
        a.label = c;
        data.push_back(a);
      }
    }
    const auto m = SvmModel::train(data, 3, unit_kernel(1.0));
    for (std::size_t c = 0; c < 3; ++c) {
      AuthorRepresentation probe;
      probe.cognitive = {centers[c][0], centers[c][1], 0, 0, 0};
      const auto x = probe.joint();
      CHECK(m.predict(x) == c);
      const auto w = m.cluster_weights(x);
      CHECK(w[c] == doctest::Approx(1.0));
    }
  }
}
