#include "cogniprof/rwtree.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <unordered_set>

#include "cogniprof/error.hpp"
#include "cogniprof/log.hpp"

namespace cogniprof::rwtree {
namespace {

std::string hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double center(const Mbr& m, std::size_t d) { return 0.5 * (m.lo[d] + m.hi[d]); }

Mbr bbox_of(std::span<const Point> r) {
  Mbr q = Mbr::empty();
  for (const auto& p : r) q.expand(p);
  return q;
}

}  // namespace

// ------------------------------------------------------------------------ Mbr

Mbr Mbr::empty() {
  Mbr m;
  m.lo.fill(std::numeric_limits<double>::infinity());
  m.hi.fill(-std::numeric_limits<double>::infinity());
  return m;
}

Mbr Mbr::of(const Point& p) { return Mbr{p, p}; }

Mbr Mbr::of(std::span<const OrientPoint> points) {
  Mbr m = empty();
  for (const auto& p : points) m.expand(p.coords);
  return m;
}

Mbr Mbr::of(std::span<const Point> points) { return bbox_of(points); }

bool Mbr::contains(const Point& p, double tol) const {
  for (std::size_t d = 0; d < kDims; ++d) {
    if (p[d] < lo[d] - tol || p[d] > hi[d] + tol) return false;
  }
  return true;
}

bool Mbr::contains(const Mbr& o, double tol) const {
  if (o.is_empty()) return true;
  for (std::size_t d = 0; d < kDims; ++d) {
    if (o.lo[d] < lo[d] - tol || o.hi[d] > hi[d] + tol) return false;
  }
  return true;
}

bool Mbr::intersects(const Mbr& o) const {
  for (std::size_t d = 0; d < kDims; ++d) {
    if (o.hi[d] < lo[d] || o.lo[d] > hi[d]) return false;
  }
  return true;
}

void Mbr::expand(const Mbr& o) {
  for (std::size_t d = 0; d < kDims; ++d) {
    lo[d] = std::min(lo[d], o.lo[d]);
    hi[d] = std::max(hi[d], o.hi[d]);
  }
}

void Mbr::expand(const Point& p) {
  for (std::size_t d = 0; d < kDims; ++d) {
    lo[d] = std::min(lo[d], p[d]);
    hi[d] = std::max(hi[d], p[d]);
  }
}

double Mbr::volume() const {
  if (is_empty()) return 0.0;
  double v = 1;
  for (std::size_t d = 0; d < kDims; ++d) v *= hi[d] - lo[d];
  return v;
}

// --------------------------------------------------------------------- RwTree

RwTree::RwTree(RwTreeOptions options) : options_(options) {
  if (options_.fanout < 2) fail(ErrorCode::argument, "fanout must be at least 2");
  if (options_.tau) tau_ = *options_.tau;
}

const OccupationRectangle* RwTree::find(std::string_view name) const {
  const auto it = by_name_.find(std::string(name));
  return it == by_name_.end() ? nullptr : &entries_[it->second];
}

std::size_t RwTree::point_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.points.size();
  return n;
}

void RwTree::validate_node(const OccupationNode& occ, std::vector<std::string>& names) const {
  if (occ.name.empty()) fail(ErrorCode::validation, "occupation name must not be empty");
  if (by_name_.count(occ.name) || std::find(names.begin(), names.end(), occ.name) != names.end()) {
    fail(ErrorCode::validation, "occupation already indexed: '" + occ.name + "'");
  }
  if (!(occ.weight >= 0 && occ.weight <= 1)) {
    fail(ErrorCode::validation, "occupation weight must lie in [0,1]: '" + occ.name + "'");
  }
  names.push_back(occ.name);
  if (occ.children.empty() || !occ.orients.empty()) {
    if (occ.orients.size() < options_.delta) {
      fail(ErrorCode::validation, std::string(kMinOrientationsMessage) + " ('" + occ.name + "' has " +
                                      std::to_string(occ.orients.size()) + ")");
    }
  }
  for (const auto& child : occ.children) validate_node(child, names);
}

void RwTree::add_entry(OccupationRectangle rect) {
  by_name_.emplace(rect.name, static_cast<std::uint32_t>(entries_.size()));
  entries_.push_back(std::move(rect));
}

void RwTree::insert(const OccupationNode& occ) {
  std::vector<std::string> names;
  validate_node(occ, names);
  // Children first so the parent can cover them.
  std::function<std::pair<Mbr, std::size_t>(const OccupationNode&, const std::optional<std::string>&)> place =
      [&](const OccupationNode& node, const std::optional<std::string>& parent) {
        OccupationRectangle rect;
        rect.name = node.name;
        rect.weight = node.weight;
        rect.points = node.orients;
        rect.parent = parent;
        rect.mbr = Mbr::of(std::span<const OrientPoint>(node.orients));
        std::size_t depth = 1;
        for (const auto& child : node.children) {
          rect.children.push_back(child.name);
          const auto [mbr, child_depth] = place(child, node.name);
          rect.mbr.expand(mbr);
          depth = std::max(depth, child_depth + 1);
        }
        rect.depth = depth;
        const Mbr mbr = rect.mbr;
        add_entry(std::move(rect));
        return std::make_pair(mbr, depth);
      };
  place(occ, std::nullopt);
  relayer();
}

UpdateResult RwTree::update(std::span<const OrientPoint> r, const std::string& name, double weight) {
  UpdateResult out;
  if (r.size() < options_.delta) {
    out.message = std::string(kMinOrientationsMessage);
    log::info(out.message);
    return out;
  }
  OccupationNode node{name, weight, std::vector<OrientPoint>(r.begin(), r.end()), {}};
  insert(node);
  out.rectangle = *find(name);
  return out;
}

void RwTree::relayer() {
  if (!options_.tau) {
    std::vector<double> w;
    w.reserve(entries_.size());
    for (const auto& e : entries_) w.push_back(e.weight);
    tau_ = median(std::move(w));
  }
  for (auto& e : entries_) e.layer = e.weight >= tau_ ? Layer::middle : Layer::top;
  repack();
}

void RwTree::overhaul() { relayer(); }

void RwTree::pack_layer(Layer layer, Packed& out) const {
  out = Packed{};
  std::vector<std::uint32_t> ids;
  for (std::uint32_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].layer == layer) ids.push_back(i);
  }
  if (ids.empty()) return;
  const auto fan = options_.fanout;
  const auto blocks = (ids.size() + fan - 1) / fan;
  const auto slabs = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(blocks))));
  const auto per_slab = slabs * fan;
  auto by = [&](std::size_t d) {
    return [&, d](std::uint32_t a, std::uint32_t b) {
      const double ca = center(entries_[a].mbr, d), cb = center(entries_[b].mbr, d);
      return ca != cb ? ca < cb : a < b;
    };
  };
  std::sort(ids.begin(), ids.end(), by(0));
  for (std::size_t s = 0; s < ids.size(); s += per_slab) {
    const auto end = std::min(ids.size(), s + per_slab);
    std::sort(ids.begin() + static_cast<std::ptrdiff_t>(s), ids.begin() + static_cast<std::ptrdiff_t>(end), by(1));
  }
  Mbr extent = Mbr::empty();
  for (auto id : ids) {
    extent.expand(entries_[id].mbr);
    for (std::size_t d = 0; d < kDims; ++d) {
      out.lo.push_back(entries_[id].mbr.lo[d] - kContainTolerance);
      out.hi.push_back(entries_[id].mbr.hi[d] + kContainTolerance);
    }
  }
  out.words = (ids.size() + 63) / 64;
  out.slabs.assign(kDims * kSlabs * out.words, 0);
  for (std::size_t d = 0; d < kDims; ++d) {
    const double span = extent.hi[d] - extent.lo[d];
    out.base[d] = extent.lo[d];
    out.scale[d] = span > 0 ? static_cast<double>(kSlabs) / span : 0.0;
  }
  for (std::size_t k = 0; k < ids.size(); ++k) {
    for (std::size_t d = 0; d < kDims; ++d) {
      const auto first = slab_of(out, d, out.lo[k * kDims + d]);
      const auto last = slab_of(out, d, out.hi[k * kDims + d]);
      for (auto c = first; c <= last; ++c) {
        out.slabs[(d * kSlabs + c) * out.words + k / 64] |= std::uint64_t{1} << (k % 64);
      }
    }
  }
  out.ids = std::move(ids);
}

std::size_t RwTree::slab_of(const Packed& p, std::size_t d, double x) {
  const double c = (x - p.base[d]) * p.scale[d];
  if (!(c > 0)) return 0;
  if (c >= static_cast<double>(kSlabs - 1)) return kSlabs - 1;
  return static_cast<std::size_t>(c);
}

void RwTree::repack() {
  pack_layer(Layer::middle, middle_);
  pack_layer(Layer::top, top_);
}

void RwTree::search(const Packed& p, const Mbr& q, std::vector<std::uint32_t>& out) {
  if (p.ids.empty()) return;
  std::array<const std::uint64_t*, 2 * kDims> rows;
  for (std::size_t d = 0; d < kDims; ++d) {
    rows[2 * d] = p.slabs.data() + (d * kSlabs + slab_of(p, d, q.lo[d])) * p.words;
    rows[2 * d + 1] = p.slabs.data() + (d * kSlabs + slab_of(p, d, q.hi[d])) * p.words;
  }
  for (std::size_t w = 0; w < p.words; ++w) {
    std::uint64_t bits = ~std::uint64_t{0};
    for (const auto* row : rows) bits &= row[w];
    while (bits) {
      const auto k = w * 64 + static_cast<std::size_t>(std::countr_zero(bits));
      bits &= bits - 1;
      const double* lo = p.lo.data() + k * kDims;
      const double* hi = p.hi.data() + k * kDims;
      bool hit = true;
      for (std::size_t d = 0; d < kDims; ++d) hit &= (lo[d] <= q.lo[d]) & (q.hi[d] <= hi[d]);
      if (hit) out.push_back(p.ids[k]);
    }
  }
}

void RwTree::quest_indices(const Mbr& query, std::vector<std::uint32_t>& out) const {
  out.clear();
  if (query.is_empty()) return;
  search(middle_, query, out);
  search(top_, query, out);
}

std::vector<std::string> RwTree::names_of(std::vector<std::uint32_t>& ids) const {
  std::sort(ids.begin(), ids.end(), [&](auto a, auto b) {
    const auto& ea = entries_[a];
    const auto& eb = entries_[b];
    return ea.weight != eb.weight ? ea.weight > eb.weight : ea.name < eb.name;
  });
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (auto id : ids) out.push_back(entries_[id].name);
  return out;
}

std::vector<std::string> RwTree::quest(std::span<const Point> r) const {
  if (r.empty()) return {};
  std::vector<std::uint32_t> ids;
  quest_indices(bbox_of(r), ids);
  return names_of(ids);
}

std::vector<std::string> RwTree::quest(const Point& p) const { return quest(std::span<const Point>(&p, 1)); }

std::vector<std::string> RwTree::quest_or_update(std::span<const OrientPoint> r, const std::string& new_name,
                                                 double weight) {
  std::vector<Point> pts;
  for (const auto& p : r) pts.push_back(p.coords);
  auto found = quest(pts);
  if (!found.empty() || !options_.query_updates) return found;
  const auto result = update(r, new_name, weight);
  if (!result.rectangle) return found;
  return quest(pts);
}

std::vector<std::uint32_t> RwTree::candidates(const Point& c, std::size_t k) const {
  std::vector<std::uint32_t> ids;
  if (k == 0 || entries_.empty()) return ids;
  double radius = 0;
  while (true) {
    ids.clear();
    if (radius == 0) {
      quest_indices(Mbr::of(c), ids);
    } else {
      Mbr box = Mbr::of(c);
      for (std::size_t d = 0; d < kDims; ++d) {
        box.lo[d] -= radius;
        box.hi[d] += radius;
      }
      for (std::uint32_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].mbr.intersects(box)) ids.push_back(i);
      }
    }
    if (ids.size() >= k || ids.size() == entries_.size()) break;
    radius = radius == 0 ? 0.01 : radius * 2;
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<Ranked> RwTree::top_k(const Point& c, std::size_t k,
                                  const std::unordered_map<std::string, double>* scores) const {
  const auto ids = candidates(c, k);
  std::vector<Ranked> out;
  for (auto id : ids) {
    const auto& e = entries_[id];
    double s = e.weight;
    if (scores) {
      const auto it = scores->find(e.name);
      if (it != scores->end()) s = it->second;
    }
    out.push_back(Ranked{e.name, s, e.mbr.volume()});
  }
  std::sort(out.begin(), out.end(), [](const Ranked& a, const Ranked& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.volume != b.volume) return a.volume < b.volume;
    return a.name < b.name;
  });
  if (out.size() > k) out.resize(k);
  return out;
}

std::string RwTree::fingerprint() const {
  std::string s = "delta " + std::to_string(options_.delta) + " fanout " + std::to_string(options_.fanout) +
                  " tau " + hex(tau_) + "\n";
  for (const auto& e : entries_) {
    s += e.name + " w " + hex(e.weight) + " depth " + std::to_string(e.depth) + " layer " +
         (e.layer == Layer::middle ? "m" : "t") + " parent " + e.parent.value_or("-") + "\n";
    for (std::size_t d = 0; d < kDims; ++d) s += " " + hex(e.mbr.lo[d]) + ":" + hex(e.mbr.hi[d]);
    s += "\n";
    for (const auto& c : e.children) s += " child " + c;
    for (const auto& p : e.points) {
      s += " p";
      for (double v : p.coords) s += " " + hex(v);
      s += p.author_id ? " @" + *p.author_id : std::string(" @-");
    }
    s += "\n";
  }
  return s;
}

std::vector<std::string> linear_scan(std::span<const OccupationRectangle> entries, std::span<const Point> r) {
  if (r.empty()) return {};
  std::vector<const OccupationRectangle*> hits;
  for (const auto& e : entries) {
    if (std::all_of(r.begin(), r.end(), [&](const Point& p) { return e.mbr.contains(p); })) hits.push_back(&e);
  }
  std::sort(hits.begin(), hits.end(), [](auto a, auto b) {
    return a->weight != b->weight ? a->weight > b->weight : a->name < b->name;
  });
  std::vector<std::string> out;
  for (auto* h : hits) {
    if (out.empty() || out.back() != h->name) out.push_back(h->name);
  }
  return out;
}

// ------------------------------------------------------------- BaselineRTree

struct BaselineRTree::Node {
  bool leaf = true;
  std::vector<Mbr> boxes;
  std::vector<std::unique_ptr<Node>> kids;
  std::vector<std::uint32_t> items;

  std::size_t count() const { return boxes.size(); }
  Mbr cover() const {
    Mbr m = Mbr::empty();
    for (const auto& b : boxes) m.expand(b);
    return m;
  }
};

namespace {

double enlarged_volume(const Mbr& a, const Mbr& b) {
  Mbr u = a;
  u.expand(b);
  return u.volume();
}

// Quadratic split: returns group assignment (0/1) per entry.
std::vector<int> quadratic_split(const std::vector<Mbr>& boxes, std::size_t min_fill) {
  const auto n = boxes.size();
  std::size_t s1 = 0, s2 = 1;
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = enlarged_volume(boxes[i], boxes[j]) - boxes[i].volume() - boxes[j].volume();
      if (d > worst) {
        worst = d;
        s1 = i;
        s2 = j;
      }
    }
  }
  std::vector<int> group(n, -1);
  group[s1] = 0;
  group[s2] = 1;
  Mbr cover[2] = {boxes[s1], boxes[s2]};
  std::size_t size[2] = {1, 1};
  std::size_t left = n - 2;
  while (left > 0) {
    for (int g = 0; g < 2; ++g) {
      if (size[g] + left == min_fill) {
        for (std::size_t i = 0; i < n; ++i) {
          if (group[i] < 0) {
            group[i] = g;
            cover[g].expand(boxes[i]);
            ++size[g];
          }
        }
        return group;
      }
    }
    std::size_t pick = n;
    double best_diff = -1, d0 = 0, d1 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (group[i] >= 0) continue;
      const double e0 = enlarged_volume(cover[0], boxes[i]) - cover[0].volume();
      const double e1 = enlarged_volume(cover[1], boxes[i]) - cover[1].volume();
      if (std::abs(e0 - e1) > best_diff) {
        best_diff = std::abs(e0 - e1);
        pick = i;
        d0 = e0;
        d1 = e1;
      }
    }
    int g;
    if (d0 != d1) g = d0 < d1 ? 0 : 1;
    else if (cover[0].volume() != cover[1].volume()) g = cover[0].volume() < cover[1].volume() ? 0 : 1;
    else g = size[0] <= size[1] ? 0 : 1;
    group[pick] = g;
    cover[g].expand(boxes[pick]);
    ++size[g];
    --left;
  }
  return group;
}

}  // namespace

BaselineRTree::BaselineRTree(std::size_t max_fill, std::size_t min_fill)
    : max_fill_(max_fill), min_fill_(min_fill), root_(std::make_unique<Node>()) {
  if (max_fill < 2 || min_fill < 1 || min_fill > max_fill / 2) {
    fail(ErrorCode::argument, "R-tree fill bounds must satisfy 1 <= min <= max/2");
  }
}

BaselineRTree::~BaselineRTree() = default;
BaselineRTree::BaselineRTree(BaselineRTree&&) noexcept = default;
BaselineRTree& BaselineRTree::operator=(BaselineRTree&&) noexcept = default;

void BaselineRTree::insert(const std::string& name, const Mbr& mbr, double weight) {
  const auto id = static_cast<std::uint32_t>(items_.size());
  items_.push_back(Item{name, mbr, weight});

  // Returns the new sibling when the node split.
  std::function<std::unique_ptr<Node>(Node&)> descend = [&](Node& node) -> std::unique_ptr<Node> {
    if (node.leaf) {
      node.boxes.push_back(mbr);
      node.items.push_back(id);
    } else {
      std::size_t best = 0;
      double best_grow = std::numeric_limits<double>::infinity(), best_vol = best_grow;
      for (std::size_t i = 0; i < node.count(); ++i) {
        const double vol = node.boxes[i].volume();
        const double grow = enlarged_volume(node.boxes[i], mbr) - vol;
        if (grow < best_grow || (grow == best_grow && vol < best_vol)) {
          best = i;
          best_grow = grow;
          best_vol = vol;
        }
      }
      auto sibling = descend(*node.kids[best]);
      node.boxes[best] = node.kids[best]->cover();
      if (sibling) {
        node.boxes.push_back(sibling->cover());
        node.kids.push_back(std::move(sibling));
      }
    }
    if (node.count() <= max_fill_) return nullptr;
    const auto group = quadratic_split(node.boxes, min_fill_);
    auto other = std::make_unique<Node>();
    other->leaf = node.leaf;
    Node keep;
    keep.leaf = node.leaf;
    for (std::size_t i = 0; i < group.size(); ++i) {
      Node& dst = group[i] == 0 ? keep : *other;
      dst.boxes.push_back(node.boxes[i]);
      if (node.leaf) dst.items.push_back(node.items[i]);
      else dst.kids.push_back(std::move(node.kids[i]));
    }
    node = std::move(keep);
    return other;
  };

  auto sibling = descend(*root_);
  if (sibling) {
    auto root = std::make_unique<Node>();
    root->leaf = false;
    root->boxes.push_back(root_->cover());
    root->kids.push_back(std::move(root_));
    root->boxes.push_back(sibling->cover());
    root->kids.push_back(std::move(sibling));
    root_ = std::move(root);
  }
}

void BaselineRTree::query_indices(const Mbr& q, std::vector<std::uint32_t>& out) const {
  out.clear();
  if (q.is_empty()) return;
  visit(*root_, q, out);
}

void BaselineRTree::visit(const Node& node, const Mbr& q, std::vector<std::uint32_t>& out) {
  for (std::size_t i = 0; i < node.count(); ++i) {
    if (!node.boxes[i].contains(q)) continue;
    if (node.leaf) out.push_back(node.items[i]);
    else visit(*node.kids[i], q, out);
  }
}

std::vector<std::string> BaselineRTree::query(std::span<const Point> r) const {
  if (r.empty()) return {};
  std::vector<std::uint32_t> ids;
  query_indices(bbox_of(r), ids);
  std::sort(ids.begin(), ids.end(), [&](auto a, auto b) {
    return items_[a].weight != items_[b].weight ? items_[a].weight > items_[b].weight
                                                : items_[a].name < items_[b].name;
  });
  std::vector<std::string> out;
  for (auto id : ids) {
    if (out.empty() || out.back() != items_[id].name) out.push_back(items_[id].name);
  }
  return out;
}

std::vector<std::string> BaselineRTree::query(const Point& p) const {
  return query(std::span<const Point>(&p, 1));
}

std::size_t BaselineRTree::height() const {
  std::size_t h = 1;
  for (const Node* n = root_.get(); !n->leaf; n = n->kids.front().get()) ++h;
  return h;
}

BaselineRTree BaselineRTree::from(const RwTree& tree, std::size_t max_fill, std::size_t min_fill) {
  BaselineRTree t(max_fill, min_fill);
  for (const auto& e : tree.entries()) t.insert(e.name, e.mbr, e.weight);
  return t;
}

// ------------------------------------------------------------------ Actuator

void ActuatorConfig::validate() const {
  if (!(zeta > 0 && zeta <= 1)) fail(ErrorCode::argument, "zeta must lie in (0,1]");
  if (!(eps >= 0)) fail(ErrorCode::argument, "eps must be non-negative");
}

std::size_t actuator_interval(std::size_t records, const ActuatorConfig& cfg,
                              const std::function<double(std::size_t)>& quality) {
  cfg.validate();
  if (records < 2) fail(ErrorCode::validation, "actuator needs at least two records");
  const std::size_t d0 = records / 2;
  const std::size_t d1 = records - d0;
  const double omega0 = quality(d0);
  const auto steps = static_cast<std::size_t>(std::llround(1.0 / cfg.zeta));
  for (std::size_t i = 1; i <= steps; ++i) {
    const auto grow = std::min(d1, static_cast<std::size_t>(
                                       std::llround(static_cast<double>(i) * cfg.zeta * static_cast<double>(d1))));
    const double omega = quality(d0 + grow);
    if (omega0 - omega >= cfg.eps) return grow;
  }
  return d1;
}

}  // namespace cogniprof::rwtree
