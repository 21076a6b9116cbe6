// Acceptance gate: one line per criterion, non-zero exit if any fails.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cogniprof/boost.hpp"
#include "cogniprof/error.hpp"
#include "cogniprof/harness.hpp"
#include "cogniprof/icf.hpp"
#include "cogniprof/log.hpp"
#include "cogniprof/rwtree.hpp"
#include "cogniprof/segmentation.hpp"
#include "cogniprof/svm.hpp"
#include "cogniprof/synthetic.hpp"
#include "oracles.hpp"

using namespace cogniprof;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

const harness::Resources& resources() {
  static const auto r = harness::Resources::load(harness::Resources::default_dir());
  return r;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome isotonic() {
  std::mt19937_64 rng(1);
  double worst = 0;
  for (int t = 0; t < 500; ++t) {
    const int n = 1 + static_cast<int>(rng() % 6);
    std::vector<icf::WeightedPoint> pts;
    std::vector<oracle::Obs> obs;
    for (int i = 0; i < n; ++i) {
      // values and weights on a grid; x with occasional ties
      const double x = static_cast<double>(rng() % 5);
      const double y = static_cast<double>(rng() % 9) * 0.25 - 1.0;
      const double w = 0.5 * static_cast<double>(1 + rng() % 4);
      pts.push_back({x, y, w});
      obs.push_back({x, y, w});
    }
    const auto fit = icf::pava_fit(pts);
    double obj = 0;
    for (const auto& p : pts) obj += p.w * (p.y - fit.predict(p.x)) * (p.y - fit.predict(p.x));
    worst = std::max(worst, std::abs(obj - oracle::isotonic_objective(obs)));
  }
  std::size_t broken = 0;
  std::uniform_real_distribution<double> u(-3, 3), wu(0.01, 5);
  for (int t = 0; t < 10000; ++t) {
    const auto n = 1 + rng() % 40;
    std::vector<double> y(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = u(rng);
      w[i] = wu(rng);
    }
    const auto f = icf::pava(y, w);
    double sy = 0, sf = 0, sw = 0;
    for (std::size_t i = 0; i < n; ++i) {
      sy += w[i] * y[i];
      sf += w[i] * f[i];
      sw += w[i];
      if (i > 0 && f[i] < f[i - 1]) ++broken;
    }
    if (std::abs(sy - sf) > 1e-9 * std::max(1.0, std::abs(sw))) ++broken;
  }
  return {worst <= 1e-9 && broken == 0,
          fmt("max |objective - oracle| = %.2e over 500; %zu monotonicity/mean violations in 10000", worst, broken)};
}

Outcome svm_dual() {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1, 1);
  double worst = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + rng() % 3;
    std::vector<std::vector<double>> rows(n, std::vector<double>(3));
    for (auto& r : rows)
      for (auto& v : r) v = u(rng);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = i == 0 ? 1 : i == 1 ? -1 : (rng() % 2 ? 1 : -1);
    svm::KernelParams p;
    p.eta = 0.5 + static_cast<double>(rng() % 4);
    p.C = 0.25 * static_cast<double>(1 + rng() % 8);
    const auto K = svm::gram_matrix(rows, p);
    const auto sol = svm::solve_dual(K, labels, p.C);
    worst = std::max(worst, std::abs(sol.objective - oracle::svm_dual_optimum(K, labels, p.C)));
  }
  double min_eig = 0;
  for (int t = 0; t < 100; ++t) {
    std::vector<std::vector<double>> rows(20, std::vector<double>(8));
    for (auto& r : rows)
      for (auto& v : r) v = u(rng);
    svm::KernelParams p;
    p.eta = 0.1 + static_cast<double>(rng() % 20) * 0.5;
    min_eig = std::min(min_eig, oracle::min_eigenvalue(svm::gram_matrix(rows, p)));
  }
  return {worst <= 1e-6 && min_eig >= -1e-8,
          fmt("max |dual - oracle| = %.2e over 200; min Gram eigenvalue %.2e over 100", worst, min_eig)};
}

Outcome boosting() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  std::size_t rises = 0, mismatched = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 20 + rng() % 80;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = u(rng);
      y[i] = std::sin(3 * x[i]) + 0.3 * u(rng);
    }
    boost::BoostParams p;
    p.rounds = 30;
    p.max_depth = 1 + rng() % 4;
    p.min_leaf = 1 + rng() % 5;
    std::vector<double> trace;
    try {
      boost::fit_ensemble(x, y, p, &trace);
    } catch (const Error&) {
      ++rises;
      continue;
    }
    for (std::size_t r = 1; r < trace.size(); ++r) rises += trace[r] > trace[r - 1];
    p.max_depth = 0;
    const auto flat = boost::fit_ensemble(x, y, p);
    const double c = boost::init_constant(y);
    for (double q : {-2.0, -0.5, 0.0, 0.3, 2.0}) mismatched += flat.predict(q) != c;
  }
  return {rises == 0 && mismatched == 0,
          fmt("%zu MSE increases over 100 regressions; %zu single-leaf predictions differ from the init constant",
              rises, mismatched)};
}

Outcome segmentation_check() {
  const auto& res = resources();
  const auto corpus = synthetic::generate_collocation_corpus(4, 20, 200, 20, res.lexicons);
  auto run = [&](const std::vector<corpus::RawPost>& raw) {
    const auto vocab = corpus::build_vocabulary(raw, res.lexicons.words());
    const corpus::NoiseReducer reducer(res.slang, vocab);
    std::vector<corpus::CleanPost> clean;
    for (const auto& p : raw) clean.push_back(reducer.reduce(p));
    const auto g = segmentation::build_term_graph(clean, segmentation::term_profiles(clean, res.lexicons));
    return std::make_pair(segmentation::extract_segments(clean, g, 20), std::move(clean));
  };
  const auto [top, clean] = run(corpus.posts);
  std::size_t found = 0;
  for (const auto& [a, b] : corpus.collocations) {
    for (const auto& ph : top) found += ph.terms == std::vector<std::string>{a, b};
  }
  auto doubled = corpus.posts;
  for (const auto& p : corpus.posts) {
    auto copy = p;
    copy.post_id += "-dup";
    doubled.push_back(copy);
  }
  const auto [top2, clean2] = run(doubled);
  bool same = top.size() == top2.size();
  for (std::size_t i = 0; same && i < top.size(); ++i) same = top[i].terms == top2[i].terms && top[i].scp == top2[i].scp;
  return {found >= 18 && same,
          fmt("%zu/20 planted bigrams in the SCP top-20; duplicated corpus %s", found,
              same ? "gives identical scores" : "changes scores")};
}

rwtree::RwTree random_tree(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1), half(0.05, 0.5), w(0, 1);
  rwtree::RwTree tree;
  const std::size_t groups = 5 + rng() % 20;
  for (std::size_t g = 0; g < groups; ++g) {
    rwtree::OccupationNode node;
    node.name = fmt("occ-%zu", g);
    node.weight = std::round(w(rng) * 8) / 8;  // coarse weights force name tie-breaks
    auto cloud = [&](rwtree::OccupationNode& n) {
      rwtree::Point c;
      for (auto& v : c) v = u(rng);
      const double h = half(rng);
      const std::size_t k = 3 + rng() % 5;
      for (std::size_t i = 0; i < k; ++i) {
        rwtree::OrientPoint p;
        for (std::size_t d = 0; d < rwtree::kDims; ++d) p.coords[d] = c[d] + h * u(rng);
        n.orients.push_back(p);
      }
    };
    if (rng() % 3 == 0) {
      for (int k = 0; k < 2; ++k) {
        rwtree::OccupationNode child;
        child.name = node.name + fmt("-sub%d", k);
        child.weight = std::round(w(rng) * 8) / 8;
        cloud(child);
        node.children.push_back(child);
      }
    } else {
      cloud(node);
    }
    tree.insert(node);
  }
  return tree;
}

Outcome quest() {
  std::size_t wrong = 0, queries = 0, drifted = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    auto tree = random_tree(100 + s);
    std::mt19937_64 rng(s);
    std::uniform_real_distribution<double> u(-1.2, 1.2), unit(0, 1);
    for (int q = 0; q < 1000; ++q, ++queries) {
      std::vector<rwtree::Point> pts(1 + rng() % 3);
      const auto& e = tree.entries()[rng() % tree.size()];
      for (auto& p : pts) {
        for (std::size_t d = 0; d < rwtree::kDims; ++d) {
          p[d] = q % 2 ? u(rng) : e.mbr.lo[d] + unit(rng) * (e.mbr.hi[d] - e.mbr.lo[d]);
        }
      }
      wrong += tree.quest(pts) != oracle::quest_scan(tree.entries(), pts);
    }
    const auto before = tree.fingerprint();
    std::vector<rwtree::OrientPoint> few(2);
    const auto result = tree.update(few, "too-few", 0.5);
    drifted += result.rectangle.has_value() || tree.fingerprint() != before;
    rwtree::OccupationNode bad;
    bad.name = "bad";
    bad.orients.resize(1);
    try {
      tree.insert(bad);
      ++drifted;
    } catch (const Error&) {
    }
    drifted += tree.fingerprint() != before;
  }
  return {wrong == 0 && drifted == 0,
          fmt("%zu/%zu quest answers differ from the linear scan; %zu failed updates changed the tree", wrong, queries,
              drifted)};
}

Outcome speedup() {
  const std::vector<std::size_t> sizes = {10, 20, 50, 100};
  const auto rows = harness::bench_index(sizes, 1000);
  std::ofstream csv("bench_index.csv");
  harness::write_bench_csv(csv, rows);
  bool monotone = true;
  std::string ratios;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0 && rows[i].ratio > rows[i - 1].ratio) monotone = false;
    ratios += fmt("%s%zu:%.3f", i ? " " : "", rows[i].boundaries, rows[i].ratio);
  }
  return {rows.back().ratio <= 0.6 && monotone,
          "ratios " + ratios + (monotone ? " (non-increasing)" : " (not monotone)")};
}

struct SeedRun {
  harness::ModelBundle model;
  std::vector<harness::EvalReport> reports;  // cluster, boost, curve, conjunct
};

SeedRun run_seed(std::uint64_t seed) {
  synthetic::SyntheticSpec spec;
  spec.seed = seed;
  spec.num_authors = 500;
  spec.occupations = 5;
  spec.noise = 0.1;
  const auto corpus = synthetic::generate_synthetic(spec, resources().lexicons);
  harness::PipelineConfig cfg;
  cfg.seed = seed;
  const auto split = harness::split_authors(corpus.posts, cfg.test_fraction, seed);
  SeedRun out;
  out.model = harness::train_model(corpus.posts, corpus.authors, resources(), cfg, &split);
  const auto test = harness::posts_of(corpus.posts, split.test);
  for (auto v : {harness::Variant::cluster, harness::Variant::boost, harness::Variant::curve,
                 harness::Variant::conjunct}) {
    out.reports.push_back(harness::run_variant(out.model, v, test));
  }
  return out;
}

std::vector<SeedRun>& seed_runs() {
  static std::vector<SeedRun> runs;
  return runs;
}

Outcome end_to_end() {
  auto& runs = seed_runs();
  std::size_t ordered = 0;
  std::string detail;
  for (std::uint64_t s = 42; s < 47; ++s) {
    runs.push_back(run_seed(s));
    const auto& r = runs.back().reports;
    const bool o = r[3].f1 > r[2].f1 && r[2].f1 > r[1].f1 && r[1].f1 > r[0].f1;
    ordered += o;
    detail += fmt("%sseed %llu cl=%.3f bo=%.3f cu=%.3f cj=%.3f", s == 42 ? "" : "; ",
                  static_cast<unsigned long long>(s), r[0].f1, r[1].f1, r[2].f1, r[3].f1);
  }
  const auto& r = runs.front().reports;
  const bool headline = r[3].f1 >= 0.85;
  const bool dominates = r[3].f1 >= r[0].f1 && r[3].f1 >= r[1].f1 && r[3].f1 >= r[2].f1;
  return {headline && dominates && ordered >= 4,
          fmt("seed 42 conjunct F1 %.3f (>=0.85 %s, >= singles %s); ordering on %zu/5 seeds [", r[3].f1,
              headline ? "yes" : "no", dominates ? "yes" : "no", ordered) +
              detail + "]"};
}

Outcome tuning() {
  if (seed_runs().empty()) seed_runs().push_back(run_seed(42));
  const auto& t = seed_runs().front().model.tuning;
  std::ofstream csv("tuning_surface.csv");
  harness::write_surface_csv(csv, t);
  auto at = [&](double a, double b) {
    for (const auto& c : t.surface) {
      if (std::abs(c.alpha - a) < 1e-9 && std::abs(c.beta - b) < 1e-9) return c.f1;
    }
    return -1.0;
  };
  const double c00 = at(0, 0), c10 = at(1, 0), c01 = at(0, 1);
  const auto& b = t.best;
  const bool corner = (b.alpha == 0 && b.beta == 0) || (b.alpha == 1 && b.beta == 0) || (b.alpha == 0 && b.beta == 1);
  const bool beats = t.best_f1 > c00 && t.best_f1 > c10 && t.best_f1 > c01;
  return {!t.surface.empty() && !corner && beats,
          fmt("%zu surface cells; tuned (%.2f, %.2f) F1 %.4f vs corners %.4f / %.4f / %.4f", t.surface.size(), b.alpha,
              b.beta, t.best_f1, c00, c10, c01)};
}

Outcome actuator() {
  const rwtree::ActuatorConfig cfg{0.1, 0.05};
  const std::size_t records = 200, d0 = 100, d1 = 100;
  const auto drop = [&](std::size_t n) { return n >= d0 + 30 ? 0.84 : 0.90; };
  const auto flat = [](std::size_t) { return 0.9; };
  const auto got = rwtree::actuator_interval(records, cfg, drop);
  const auto whole = rwtree::actuator_interval(records, cfg, flat);
  return {got == 30 && whole == d1, fmt("degrading stream -> %zu (want 30); flat stream -> %zu (want %zu)", got, whole, d1)};
}

Outcome persistence() {
  synthetic::SyntheticSpec spec;
  spec.seed = 9;
  spec.num_authors = 200;
  const auto corpus = synthetic::generate_synthetic(spec, resources().lexicons);
  harness::PipelineConfig cfg;
  cfg.seed = 9;
  const auto split = harness::split_authors(corpus.posts, cfg.test_fraction, cfg.seed);
  const auto model = harness::train_model(corpus.posts, corpus.authors, resources(), cfg, &split);
  std::stringstream buf;
  harness::save_model(model, buf);
  const auto loaded = harness::load_model(buf);

  synthetic::SyntheticSpec probe_spec = spec;
  probe_spec.seed = 10;
  probe_spec.num_authors = 100;
  const auto probes = synthetic::generate_synthetic(probe_spec, resources().lexicons);
  std::size_t differ = 0;
  for (auto v : {harness::Variant::cluster, harness::Variant::boost, harness::Variant::curve,
                 harness::Variant::conjunct}) {
    const auto a = harness::predict(model, probes.posts, v);
    const auto b = harness::predict(loaded, probes.posts, v);
    if (a.size() != 100 || b.size() != 100) return {false, "probe set is not 100 authors"};
    for (std::size_t i = 0; i < a.size(); ++i) {
      differ += a[i].author_id != b[i].author_id || a[i].occupation != b[i].occupation || a[i].fused != b[i].fused ||
                a[i].weight != b[i].weight;
    }
  }
  return {differ == 0, fmt("%zu of 400 probe predictions differ after save/load", differ)};
}

}  // namespace

int main() {
  log::set_min_level(log::Level::warn);
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "isotonic oracle", 30, isotonic},
      {2, "svm dual oracle", 60, svm_dual},
      {3, "boosting mse", 30, boosting},
      {4, "segmentation", 10, segmentation_check},
      {5, "quest correctness", 30, quest},
      {6, "index speedup", 120, speedup},
      {7, "end-to-end synthetic", 300, end_to_end},
      {8, "alpha/beta tuning", 180, tuning},
      {9, "actuator", 30, actuator},
      {10, "persistence", 600, persistence},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::printf("[%s] criterion %d %s: %s (%.1fs, budget %.0fs%s)\n", pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs, c.budget_s, in_time ? "" : ", over budget");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
