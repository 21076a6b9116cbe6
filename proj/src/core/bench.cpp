#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <random>

#include "cogniprof/error.hpp"
#include "cogniprof/harness.hpp"

namespace cogniprof::harness {
namespace {

volatile std::size_t bench_sink = 0;

double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size())));
  return v[std::clamp<std::size_t>(rank, 1, v.size()) - 1];
}

template <typename Fn>
double time_batch(const std::vector<rwtree::Mbr>& queries, Fn&& search, std::size_t& sink) {
  std::vector<std::uint32_t> out;
  out.reserve(64);
  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& q : queries) {
    out.clear();
    search(q, out);
    sink += out.size();
  }
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::micro>(t1 - t0).count() / static_cast<double>(queries.size());
}

}  // namespace

rwtree::RwTree bench_tree(std::size_t boundaries, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ (boundaries * 0x9e3779b97f4a7c15ull));
  std::uniform_real_distribution<double> centre(-0.9, 0.9), half(0.05, 0.3), unit(0.0, 1.0);
  rwtree::RwTree tree;
  for (std::size_t b = 0; b < boundaries; ++b) {
    rwtree::Point c, h;
    for (std::size_t d = 0; d < rwtree::kDims; ++d) {
      c[d] = centre(rng);
      h[d] = half(rng);
    }
    rwtree::OccupationNode node;
    char name[32];
    std::snprintf(name, sizeof name, "boundary-%04zu", b);
    node.name = name;
    node.weight = unit(rng);
    const std::size_t n = rwtree::kDefaultDelta + rng() % 4;
    for (std::size_t i = 0; i < n; ++i) {
      rwtree::OrientPoint p;
      for (std::size_t d = 0; d < rwtree::kDims; ++d) {
        p.coords[d] = std::clamp(c[d] + (2 * unit(rng) - 1) * h[d], -1.0, 1.0);
      }
      node.orients.push_back(p);
    }
    tree.insert(node);
  }
  return tree;
}

std::vector<rwtree::Point> bench_queries(const rwtree::RwTree& tree, std::size_t queries, std::uint64_t seed) {
  std::mt19937_64 rng(seed + 7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<rwtree::Point> out;
  const auto& entries = tree.entries();
  for (std::size_t q = 0; q < queries; ++q) {
    rwtree::Point p;
    if (q % 2 == 0 && !entries.empty()) {
      const auto& m = entries[rng() % entries.size()].mbr;
      for (std::size_t d = 0; d < rwtree::kDims; ++d) p[d] = m.lo[d] + unit(rng) * (m.hi[d] - m.lo[d]);
    } else {
      for (std::size_t d = 0; d < rwtree::kDims; ++d) p[d] = 2 * unit(rng) - 1;
    }
    out.push_back(p);
  }
  return out;
}

std::vector<BenchRow> bench_index(std::span<const std::size_t> sizes, std::size_t queries,
                                  const BenchOptions& options) {
  if (queries == 0) fail(ErrorCode::argument, "bench needs at least one query");
  if (options.repetitions == 0) fail(ErrorCode::argument, "bench needs at least one repetition");
  std::vector<BenchRow> rows;
  std::size_t sink = 0;
  for (auto size : sizes) {
    if (size == 0) fail(ErrorCode::argument, "boundary counts must be positive");
    const auto tree = bench_tree(size, options.seed);
    const auto baseline = rwtree::BaselineRTree::from(tree);
    const auto points = bench_queries(tree, queries, options.seed);
    std::vector<rwtree::Mbr> boxes;
    for (const auto& p : points) {
      if (tree.quest(p) != baseline.query(p)) {
        fail(ErrorCode::state, "index answers differ at " + std::to_string(size) + " boundaries");
      }
      boxes.push_back(rwtree::Mbr::of(p));
    }
    std::vector<double> rw, rt;
    const auto rw_search = [&](const rwtree::Mbr& q, std::vector<std::uint32_t>& out) { tree.quest_indices(q, out); };
    const auto rt_search = [&](const rwtree::Mbr& q, std::vector<std::uint32_t>& out) {
      baseline.query_indices(q, out);
    };
    time_batch(boxes, rw_search, sink);
    time_batch(boxes, rt_search, sink);
    for (std::size_t r = 0; r < options.repetitions; ++r) {
      rw.push_back(time_batch(boxes, rw_search, sink));
      rt.push_back(time_batch(boxes, rt_search, sink));
    }
    BenchRow row;
    row.boundaries = size;
    row.queries = queries;
    row.rwtree_median_us = percentile(rw, 0.5);
    row.rwtree_p95_us = percentile(rw, 0.95);
    row.rtree_median_us = percentile(rt, 0.5);
    row.rtree_p95_us = percentile(rt, 0.95);
    row.ratio = row.rtree_median_us > 0 ? row.rwtree_median_us / row.rtree_median_us : 1.0;
    rows.push_back(row);
  }
  bench_sink = sink;
  return rows;
}

void write_bench_csv(std::ostream& out, std::span<const BenchRow> rows) {
  out << "boundaries,queries,rwtree_median_us,rwtree_p95_us,rtree_median_us,rtree_p95_us,ratio\n";
  for (const auto& r : rows) {
    out << r.boundaries << ',' << r.queries << ',' << r.rwtree_median_us << ',' << r.rwtree_p95_us << ','
        << r.rtree_median_us << ',' << r.rtree_p95_us << ',' << r.ratio << '\n';
  }
}

}  // namespace cogniprof::harness
