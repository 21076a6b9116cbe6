#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

// Weighted R-tree over occupation rectangles in cognitive space, a classic
// quadratic-split R-tree for comparison, and the overhaul interval estimate.
namespace cogniprof::rwtree {

inline constexpr std::size_t kDims = 5;
inline constexpr std::size_t kDefaultDelta = 3;
inline constexpr std::size_t kDefaultFanout = 8;
inline constexpr std::size_t kDefaultMinFill = 2;
inline constexpr double kContainTolerance = 1e-9;
inline constexpr std::string_view kMinOrientationsMessage = "Minimum δ orientations are required.";

using Point = std::array<double, kDims>;

struct OrientPoint {
  Point coords{};
  std::optional<std::string> author_id;

  bool operator==(const OrientPoint&) const = default;
};

struct Mbr {
  Point lo{};
  Point hi{};

  static Mbr empty();
  static Mbr of(const Point& p);
  static Mbr of(std::span<const OrientPoint> points);
  static Mbr of(std::span<const Point> points);

  bool is_empty() const { return lo[0] > hi[0]; }
  bool contains(const Point& p, double tol = kContainTolerance) const;
  bool contains(const Mbr& other, double tol = kContainTolerance) const;
  bool intersects(const Mbr& other) const;
  void expand(const Mbr& other);
  void expand(const Point& p);
  double volume() const;
  bool operator==(const Mbr&) const = default;
};

enum class Layer { middle, top };

struct OccupationRectangle {
  std::string name;
  Mbr mbr = Mbr::empty();
  double weight = 0;
  std::vector<OrientPoint> points;
  std::optional<std::string> parent;
  std::vector<std::string> children;
  // 1 for leaf-bearing occupations, 2 for parents of other occupations.
  std::size_t depth = 1;
  Layer layer = Layer::middle;

  bool operator==(const OccupationRectangle&) const = default;
};

// Insertion unit: an occupation with its own orients and/or child
// occupations.
struct OccupationNode {
  std::string name;
  double weight = 0;
  std::vector<OrientPoint> orients;
  std::vector<OccupationNode> children;
};

struct RwTreeOptions {
  std::size_t delta = kDefaultDelta;
  std::size_t fanout = kDefaultFanout;
  // Fixed level split; the median entry weight when unset.
  std::optional<double> tau;
  // Let unmatched queries form new rectangles (off by default).
  bool query_updates = false;
};

struct UpdateResult {
  std::optional<OccupationRectangle> rectangle;
  std::string message;
};

struct Ranked {
  std::string name;
  double score = 0;
  double volume = 0;
};

class RwTree {
 public:
  explicit RwTree(RwTreeOptions options = {});

  // Child orients become leaves, children their own rectangles and the
  // parent a covering rectangle. Entire insert is rejected when any
  // occupation holding orients has fewer than delta of them.
  void insert(const OccupationNode& occ);
  // Forms a standalone rectangle from r when |r| >= delta; otherwise returns
  // the rejection message and leaves the tree untouched.
  UpdateResult update(std::span<const OrientPoint> r, const std::string& name, double weight);

  // Names of rectangles whose MBR contains every query point, by weight
  // descending then name. Middle layer is searched before the top layer.
  std::vector<std::string> quest(std::span<const Point> r) const;
  std::vector<std::string> quest(const Point& p) const;
  // quest, then an update with the query points when nothing matched and
  // query updates are enabled.
  std::vector<std::string> quest_or_update(std::span<const OrientPoint> r, const std::string& new_name,
                                           double weight);

  // Grows a box around c until at least k rectangles intersect it; ranks by
  // score (rectangle weight unless overridden) then smaller volume.
  std::vector<Ranked> top_k(const Point& c, std::size_t k,
                            const std::unordered_map<std::string, double>* scores = nullptr) const;

  // The rectangles top_k ranks: those containing c, or intersecting the
  // smallest grown box that reaches k of them. Indices into entries().
  std::vector<std::uint32_t> candidates(const Point& c, std::size_t k) const;

  // Recomputes tau, relayers and repacks.
  void overhaul();

  double tau() const { return tau_; }
  const RwTreeOptions& options() const { return options_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<OccupationRectangle>& entries() const { return entries_; }
  const OccupationRectangle* find(std::string_view name) const;
  std::size_t point_count() const;

  // Canonical dump with exact floating-point encoding; equal dumps mean
  // identical trees.
  std::string fingerprint() const;

  // Low-level packed search, exposed for benchmarking: indices into entries().
  void quest_indices(const Mbr& query, std::vector<std::uint32_t>& out) const;

 private:
  // One layer: entry bounds in packed order plus, per dimension, a bitmap of
  // the entries overlapping each slab of the layer's extent.
  struct Packed {
    std::vector<double> lo, hi;
    std::vector<std::uint32_t> ids;
    std::size_t words = 0;
    Point base{};
    Point scale{};
    std::vector<std::uint64_t> slabs;
  };

  void validate_node(const OccupationNode& occ, std::vector<std::string>& names) const;
  void add_entry(OccupationRectangle rect);
  void relayer();
  void repack();
  void pack_layer(Layer layer, Packed& out) const;
  static void search(const Packed& p, const Mbr& q, std::vector<std::uint32_t>& out);
  static std::size_t slab_of(const Packed& p, std::size_t d, double x);
  static constexpr std::size_t kSlabs = 32;
  std::vector<std::string> names_of(std::vector<std::uint32_t>& ids) const;

  RwTreeOptions options_;
  double tau_ = 0;
  std::vector<OccupationRectangle> entries_;
  std::unordered_map<std::string, std::uint32_t> by_name_;
  Packed middle_, top_;
};

// Guttman R-tree with quadratic split.
class BaselineRTree {
 public:
  explicit BaselineRTree(std::size_t max_fill = kDefaultFanout, std::size_t min_fill = kDefaultMinFill);
  ~BaselineRTree();
  BaselineRTree(BaselineRTree&&) noexcept;
  BaselineRTree& operator=(BaselineRTree&&) noexcept;

  void insert(const std::string& name, const Mbr& mbr, double weight);
  // Same contract and ordering as RwTree::quest.
  std::vector<std::string> query(std::span<const Point> r) const;
  std::vector<std::string> query(const Point& p) const;
  void query_indices(const Mbr& query, std::vector<std::uint32_t>& out) const;
  std::size_t size() const { return items_.size(); }
  std::size_t height() const;

  static BaselineRTree from(const RwTree& tree, std::size_t max_fill = kDefaultFanout,
                            std::size_t min_fill = kDefaultMinFill);

 private:
  struct Node;
  static void visit(const Node& node, const Mbr& q, std::vector<std::uint32_t>& out);
  struct Item {
    std::string name;
    Mbr mbr;
    double weight;
  };

  std::size_t max_fill_;
  std::size_t min_fill_;
  std::vector<Item> items_;
  std::unique_ptr<Node> root_;
};

std::vector<std::string> linear_scan(std::span<const OccupationRectangle> entries, std::span<const Point> r);

struct ActuatorConfig {
  double zeta = 0.1;
  double eps = 0.05;

  void validate() const;
};

// Splits the record stream in half and grows the evaluated prefix by zeta
// steps of the second half; returns the step size in records at the first
// quality drop of at least eps, else the whole second half. `quality(n)`
// evaluates the structure built on the first n records.
std::size_t actuator_interval(std::size_t records, const ActuatorConfig& cfg,
                              const std::function<double(std::size_t)>& quality);

}  // namespace cogniprof::rwtree
