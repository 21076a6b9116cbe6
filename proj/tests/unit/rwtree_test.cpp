#include <doctest.h>

#include <random>

#include "cogniprof/error.hpp"
#include "cogniprof/rwtree.hpp"
#include "oracles.hpp"

using namespace cogniprof;
using namespace cogniprof::rwtree;

namespace {

std::vector<OrientPoint> cloud(const Point& center, std::size_t n, double spread, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-spread, spread);
  std::vector<OrientPoint> out(n);
  for (auto& p : out)
    for (std::size_t d = 0; d < kDims; ++d) p.coords[d] = center[d] + u(rng);
  return out;
}

Point at(double v) {
  Point p;
  p.fill(v);
  return p;
}

Point centroid(const std::vector<OrientPoint>& pts) {
  Point c{};
  for (const auto& p : pts)
    for (std::size_t d = 0; d < kDims; ++d) c[d] += p.coords[d] / static_cast<double>(pts.size());
  return c;
}

}  // namespace

TEST_SUITE("rwtree") {
  TEST_CASE("empty tree answers nothing") {
    const RwTree t;
    CHECK(t.quest(at(0)).empty());
    CHECK(t.top_k(at(0), 3).empty());
    CHECK(t.quest(std::span<const Point>{}).empty());
  }

  TEST_CASE("one occupation makes one rectangle") {
    std::mt19937_64 rng(1);
    RwTree t;
    const auto pts = cloud(at(0.2), 3, 0.05, rng);
    t.insert({"nurse", 0.6, pts, {}});
    CHECK(t.size() == 1);
    CHECK(t.point_count() == 3);
    CHECK(t.quest(centroid(pts)) == std::vector<std::string>{"nurse"});
    CHECK(t.quest(at(0.9)).empty());
  }

  TEST_CASE("too few orients are rejected") {
    std::mt19937_64 rng(2);
    RwTree t;
    t.insert({"pilot", 0.5, cloud(at(0), 3, 0.1, rng), {}});
    const auto before = t.fingerprint();
    const auto two = cloud(at(0.5), 2, 0.1, rng);
    const auto r = t.update(two, "chef", 0.4);
    CHECK_FALSE(r.rectangle.has_value());
    CHECK(r.message == "Minimum δ orientations are required.");
    CHECK(t.fingerprint() == before);
    CHECK_THROWS_AS(t.insert({"chef", 0.4, two, {}}), Error);
    CHECK(t.fingerprint() == before);
    const auto three = cloud(at(0.5), 3, 0.1, rng);
    const auto ok = t.update(three, "chef", 0.4);
    REQUIRE(ok.rectangle.has_value());
    CHECK(ok.rectangle->mbr == Mbr::of(std::span<const OrientPoint>(three)));
  }

  TEST_CASE("single points are enough with delta one") {
    RwTreeOptions o;
    o.delta = 1;
    RwTree t(o);
    const std::vector<OrientPoint> one = {{at(0.3), std::nullopt}};
    REQUIRE(t.update(one, "solo", 0.5).rectangle.has_value());
    CHECK(t.quest(at(0.3)) == std::vector<std::string>{"solo"});
    CHECK(t.find("solo")->mbr.volume() == 0.0);
  }

  TEST_CASE("children become entries under a covering parent") {
    std::mt19937_64 rng(3);
    RwTree t;
    OccupationNode parent{"health", 0.3, {}, {}};
    parent.children.push_back({"nurse", 0.8, cloud(at(-0.5), 4, 0.1, rng), {}});
    parent.children.push_back({"surgeon", 0.9, cloud(at(0.5), 5, 0.1, rng), {}});
    t.insert(parent);
    CHECK(t.size() == 3);
    CHECK(t.point_count() == 9);
    const auto* p = t.find("health");
    REQUIRE(p != nullptr);
    CHECK(p->depth == 2);
    CHECK(p->children == std::vector<std::string>{"nurse", "surgeon"});
    for (auto child : {"nurse", "surgeon"}) {
      const auto* c = t.find(child);
      REQUIRE(c != nullptr);
      CHECK(c->parent == std::optional<std::string>("health"));
      CHECK(p->mbr.contains(c->mbr));
      for (const auto& q : c->points) CHECK(c->mbr.contains(q.coords));
    }
    CHECK(t.quest(centroid(t.find("surgeon")->points)) == std::vector<std::string>{"surgeon", "health"});
  }

  TEST_CASE("layers follow the weight split") {
    std::mt19937_64 rng(4);
    RwTreeOptions o;
    o.tau = 0.5;
    RwTree t(o);
    t.insert({"low", 0.2, cloud(at(0), 3, 0.3, rng), {}});
    t.insert({"high", 0.7, cloud(at(0), 3, 0.3, rng), {}});
    t.insert({"edge", 0.5, cloud(at(0), 3, 0.3, rng), {}});
    CHECK(t.find("low")->layer == Layer::top);
    CHECK(t.find("high")->layer == Layer::middle);
    CHECK(t.find("edge")->layer == Layer::middle);
    CHECK(t.tau() == 0.5);
  }

  TEST_CASE("quest agrees with a linear scan and the baseline") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1, 1), w(0, 1);
    RwTree t;
    for (int i = 0; i < 60; ++i) {
      Point c;
      for (auto& v : c) v = u(rng) * 0.8;
      t.insert({"occ" + std::to_string(i), std::round(w(rng) * 4) / 4, cloud(c, 4, 0.3, rng), {}});
    }
    const auto base = BaselineRTree::from(t);
    CHECK(base.size() == t.size());
    for (int q = 0; q < 300; ++q) {
      std::vector<Point> pts(1 + q % 3);
      for (auto& p : pts)
        for (auto& v : p) v = u(rng) * 0.6;
      const auto got = t.quest(pts);
      CHECK(got == oracle::quest_scan(t.entries(), pts));
      CHECK(got == base.query(pts));
      CHECK(got == linear_scan(t.entries(), pts));
    }
  }

  TEST_CASE("top k ranks by weight then volume") {
    std::mt19937_64 rng(6);
    RwTree t;
    t.insert({"a", 0.9, cloud(at(0.5), 3, 0.05, rng), {}});
    t.insert({"b", 0.4, cloud(at(0.0), 3, 0.05, rng), {}});
    t.insert({"c", 0.7, cloud(at(-0.5), 3, 0.05, rng), {}});
    const auto one = t.top_k(at(0.0), 1);
    REQUIRE(one.size() == 1);
    CHECK(one[0].name == "b");
    const auto all = t.top_k(at(0.0), 3);
    REQUIRE(all.size() == 3);
    CHECK(all[0].name == "a");
    CHECK(all[1].name == "c");
    CHECK(all[2].name == "b");
    const std::unordered_map<std::string, double> s = {{"a", 0.1}, {"b", 0.2}, {"c", 0.3}};
    const auto rescored = t.top_k(at(0.0), 3, &s);
    CHECK(rescored[0].name == "c");
  }

  TEST_CASE("actuator interval") {
    ActuatorConfig cfg;
    cfg.zeta = 0.1;
    cfg.eps = 0.05;
    CHECK(actuator_interval(200, cfg, [](std::size_t n) { return n >= 130 ? 0.5 : 0.9; }) == 30);
    CHECK(actuator_interval(200, cfg, [](std::size_t) { return 0.9; }) == 100);
    cfg.eps = 0;
    CHECK(actuator_interval(200, cfg, [](std::size_t) { return 0.9; }) == 10);
    cfg.zeta = 0;
    CHECK_THROWS_AS(actuator_interval(200, cfg, [](std::size_t) { return 0.9; }), Error);
  }

  TEST_CASE("mbr basics") {
    const std::vector<Point> pts = {at(0), at(1)};
    const auto m = Mbr::of(std::span<const Point>(pts));
    CHECK(m.volume() == doctest::Approx(1.0));
    CHECK(m.contains(at(0.5)));
    CHECK_FALSE(m.contains(at(1.1)));
    CHECK(Mbr::empty().is_empty());
  }
}
