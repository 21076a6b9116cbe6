#include "cogniprof/boost.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cogniprof/error.hpp"

namespace cogniprof::boost {
namespace {

// Neumaier summation. Constant inputs come back bit-exact, so a single-leaf
// tree reproduces the init constant.
double mean_of(std::span<const double> v, std::span<const std::size_t> idx) {
  if (idx.empty()) return 0.0;
  if (std::all_of(idx.begin(), idx.end(), [&](auto i) { return v[i] == v[idx.front()]; })) {
    return v[idx.front()];
  }
  double sum = 0, comp = 0;
  for (auto i : idx) {
    const double t = sum + v[i];
    if (std::abs(sum) >= std::abs(v[i])) comp += (sum - t) + v[i];
    else comp += (v[i] - t) + sum;
    sum = t;
  }
  return (sum + comp) / static_cast<double>(idx.size());
}

struct Builder {
  std::span<const double> x;
  std::span<const double> targets;
  std::span<const double> current;
  std::vector<double> residual;
  const BoostParams& p;
  Tree tree;

  std::size_t make_leaf(const std::vector<std::size_t>& idx) {
    TreeNode node;
    node.count = idx.size();
    node.value = mean_of(targets, idx) - mean_of(current, idx);
    double abs_sum = 0;
    for (auto i : idx) abs_sum += std::abs(residual[i]);
    node.mean_abs_gradient = idx.empty() ? 0.0 : abs_sum / static_cast<double>(idx.size());
    tree.nodes.push_back(node);
    return tree.nodes.size() - 1;
  }

  double sse(const std::vector<std::size_t>& idx) const {
    if (idx.empty()) return 0;
    double m = 0;
    for (auto i : idx) m += residual[i];
    m /= static_cast<double>(idx.size());
    double s = 0;
    for (auto i : idx) s += (residual[i] - m) * (residual[i] - m);
    return s;
  }

  // Best variance-reduction threshold; NaN when no admissible split exists.
  double best_threshold(std::vector<std::size_t> idx) const {
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return x[a] < x[b]; });
    const auto n = idx.size();
    double total = 0, total_sq = 0;
    for (auto i : idx) {
      total += residual[i];
      total_sq += residual[i] * residual[i];
    }
    const double parent = total_sq - total * total / static_cast<double>(n);
    double best_gain = 1e-12 * std::max(1.0, parent), best = std::numeric_limits<double>::quiet_NaN();
    double lsum = 0, lsq = 0;
    // idx sorted ascending; "low" side is the right child (x < threshold).
    for (std::size_t k = 0; k + 1 < n; ++k) {
      lsum += residual[idx[k]];
      lsq += residual[idx[k]] * residual[idx[k]];
      const auto nl = k + 1, nr = n - nl;
      if (x[idx[k]] == x[idx[k + 1]]) continue;
      if (nl < p.min_leaf || nr < p.min_leaf) continue;
      const double rsum = total - lsum, rsq = total_sq - lsq;
      const double child = (lsq - lsum * lsum / nl) + (rsq - rsum * rsum / nr);
      const double gain = parent - child;
      if (gain > best_gain) {
        best_gain = gain;
        best = 0.5 * (x[idx[k]] + x[idx[k + 1]]);
      }
    }
    return best;
  }

  std::size_t grow(const std::vector<std::size_t>& idx, std::size_t depth) {
    if (depth >= p.max_depth || idx.size() < 2 * std::max<std::size_t>(p.min_leaf, 1)) {
      return make_leaf(idx);
    }
    double threshold = std::numeric_limits<double>::quiet_NaN();
    if (depth == 0 && p.fixed_root) {
      std::size_t nonneg = 0;
      for (auto i : idx) nonneg += x[i] >= 0;
      if (nonneg >= p.min_leaf && idx.size() - nonneg >= p.min_leaf) threshold = 0.0;
    }
    if (std::isnan(threshold)) threshold = best_threshold(idx);
    if (std::isnan(threshold)) return make_leaf(idx);
    std::vector<std::size_t> left, right;
    for (auto i : idx) (x[i] >= threshold ? left : right).push_back(i);
    if (left.empty() || right.empty()) return make_leaf(idx);
    const auto self = tree.nodes.size();
    tree.nodes.push_back(TreeNode{false, threshold, 0, 0, 0, 0, idx.size()});
    const auto l = grow(left, depth + 1);
    const auto r = grow(right, depth + 1);
    tree.nodes[self].left = l;
    tree.nodes[self].right = r;
    return self;
  }
};

double mse(std::span<const double> pred, std::span<const double> targets) {
  double s = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += (targets[i] - pred[i]) * (targets[i] - pred[i]);
  return s / static_cast<double>(pred.size());
}

}  // namespace

void BoostParams::validate() const {
  if (!(learning_rate > 0) || learning_rate > 1) fail(ErrorCode::argument, "learning rate must be in (0,1]");
  if (min_leaf == 0) fail(ErrorCode::argument, "min_leaf must be positive");
}

std::size_t Tree::leaf_of(double x) const {
  if (nodes.empty()) fail(ErrorCode::state, "empty tree");
  std::size_t n = 0;
  while (!nodes[n].leaf) n = x >= nodes[n].threshold ? nodes[n].left : nodes[n].right;
  return n;
}

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.leaf; }));
}

double init_constant(std::span<const double> targets) {
  if (targets.empty()) fail(ErrorCode::validation, "init_constant needs at least one target");
  std::vector<std::size_t> idx(targets.size());
  std::iota(idx.begin(), idx.end(), 0);
  return mean_of(targets, idx);
}

Tree fit_round(std::span<const double> current, std::span<const double> x,
               std::span<const double> targets, const BoostParams& p) {
  if (current.size() != x.size() || x.size() != targets.size()) {
    fail(ErrorCode::argument, "fit_round: length mismatch");
  }
  if (x.empty()) fail(ErrorCode::validation, "fit_round needs at least one point");
  Builder b{x, targets, current, std::vector<double>(x.size()), p, {}};
  for (std::size_t i = 0; i < x.size(); ++i) b.residual[i] = targets[i] - current[i];
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  b.grow(idx, 0);
  return std::move(b.tree);
}

double Ensemble::predict(double x) const { return predict(x, trees.size()); }

double Ensemble::predict(double x, std::size_t rounds) const {
  double v = init;
  for (std::size_t t = 0; t < std::min(rounds, trees.size()); ++t) v += learning_rate * trees[t].predict(x);
  return v;
}

double Ensemble::last_gradient(double x) const {
  if (trees.empty()) return 0.0;
  const auto& last = trees.back();
  return last.nodes[last.leaf_of(x)].mean_abs_gradient;
}

Ensemble fit_ensemble(std::span<const double> x, std::span<const double> targets,
                      const BoostParams& p, std::vector<double>* mse_trace) {
  p.validate();
  if (x.size() != targets.size()) fail(ErrorCode::argument, "fit_ensemble: length mismatch");
  Ensemble e;
  e.init = init_constant(targets);
  e.learning_rate = p.learning_rate;
  std::vector<double> pred(x.size(), e.init);
  double last = mse(pred, targets);
  if (mse_trace) mse_trace->assign(1, last);
  for (std::size_t r = 0; r < p.rounds; ++r) {
    auto tree = fit_round(pred, x, targets, p);
    for (std::size_t i = 0; i < x.size(); ++i) pred[i] += p.learning_rate * tree.predict(x[i]);
    const double now = mse(pred, targets);
    if (now > last + 1e-12 * std::max(1.0, last)) {
      fail(ErrorCode::numeric, "boosting round increased the training MSE");
    }
    last = now;
    if (mse_trace) mse_trace->push_back(now);
    e.trees.push_back(std::move(tree));
  }
  return e;
}

BoostModel BoostModel::train(std::span<const CognitiveFeatureVector> features,
                             std::span<const std::size_t> labels, std::size_t classes,
                             const BoostParams& p) {
  p.validate();
  if (features.size() != labels.size()) fail(ErrorCode::argument, "feature/label count mismatch");
  if (features.empty()) fail(ErrorCode::validation, "boosting needs training data");
  if (classes < 2) fail(ErrorCode::validation, "boosting needs at least two classes");
  BoostModel m;
  m.params = p;
  m.classes = classes;
  m.ensembles.assign(kTraitCount, std::vector<Ensemble>(classes));
  std::vector<double> x(features.size()), y(features.size());
  for (std::size_t q = 0; q < kTraitCount; ++q) {
    for (std::size_t i = 0; i < features.size(); ++i) x[i] = features[i][q];
    for (std::size_t c = 0; c < classes; ++c) {
      for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= classes) fail(ErrorCode::validation, "label out of range");
        y[i] = labels[i] == c ? 1.0 : 0.0;
      }
      m.ensembles[q][c] = fit_ensemble(x, y, p);
    }
  }
  return m;
}

double BoostModel::score(const CognitiveFeatureVector& c, std::size_t q, std::size_t occupation) const {
  if (!trained()) fail(ErrorCode::state, "boost model is not trained");
  return ensembles.at(q).at(occupation).predict(c[q]);
}

Prediction majority_vote(const std::vector<std::vector<double>>& scores) {
  if (scores.empty() || scores.front().empty()) fail(ErrorCode::state, "nothing to vote on");
  const auto classes = scores.front().size();
  Prediction p;
  p.votes.assign(classes, 0);
  p.summed.assign(classes, 0.0);
  for (const auto& row : scores) {
    std::size_t best = 0;
    for (std::size_t c = 0; c < classes; ++c) {
      p.summed[c] += row[c];
      if (row[c] > row[best]) best = c;
    }
    ++p.votes[best];
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < classes; ++c) {
    if (p.votes[c] > p.votes[best] || (p.votes[c] == p.votes[best] && p.summed[c] > p.summed[best])) best = c;
  }
  p.occupation = best;
  return p;
}

Prediction BoostModel::predict_occupation(const CognitiveFeatureVector& c) const {
  if (!trained()) fail(ErrorCode::state, "boost model is not trained");
  std::vector<std::vector<double>> scores(kTraitCount, std::vector<double>(classes));
  for (std::size_t q = 0; q < kTraitCount; ++q) {
    for (std::size_t k = 0; k < classes; ++k) scores[q][k] = score(c, q, k);
  }
  return majority_vote(scores);
}

double boost_weight(std::span<const double> o, std::span<const double> h) {
  if (o.size() != h.size() || o.empty()) fail(ErrorCode::argument, "boost_weight: length mismatch");
  double total = 0;
  for (std::size_t q = 0; q < o.size(); ++q) {
    const double oq = std::clamp(std::abs(o[q]), 0.0, 1.0);
    const double hq = std::clamp(std::abs(h[q]), 0.0, 1.0);
    total += oq * (2.0 - hq);
  }
  return total / static_cast<double>(o.size()) / 2.0;
}

double BoostModel::weight(const CognitiveFeatureVector& c, std::size_t occupation) const {
  if (!trained()) fail(ErrorCode::state, "boost model is not trained");
  std::array<double, kTraitCount> o{}, h{};
  for (std::size_t q = 0; q < kTraitCount; ++q) {
    const auto& e = ensembles[q].at(occupation);
    o[q] = std::clamp(e.predict(c[q]), 0.0, 1.0);
    h[q] = e.last_gradient(c[q]);
  }
  return boost_weight(o, h);
}

std::vector<double> BoostModel::weights(const CognitiveFeatureVector& c) const {
  std::vector<double> out(classes);
  for (std::size_t k = 0; k < classes; ++k) out[k] = weight(c, k);
  return out;
}

}  // namespace cogniprof::boost
