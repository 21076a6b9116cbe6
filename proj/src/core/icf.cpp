#include "cogniprof/icf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cogniprof/error.hpp"
#include "cogniprof/svm.hpp"

namespace cogniprof::icf {

std::vector<double> pava(std::span<const double> y, std::span<const double> w) {
  if (y.size() != w.size()) fail(ErrorCode::argument, "pava: length mismatch");
  struct Block {
    double sum_wy;
    double sum_w;
    std::size_t len;
    double mean() const { return sum_wy / sum_w; }
  };
  std::vector<Block> blocks;
  blocks.reserve(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(w[i] > 0)) fail(ErrorCode::validation, "isotonic weights must be positive");
    blocks.push_back(Block{w[i] * y[i], w[i], 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].mean() > blocks.back().mean()) {
      const auto top = blocks.back();
      blocks.pop_back();
      auto& prev = blocks.back();
      prev.sum_wy += top.sum_wy;
      prev.sum_w += top.sum_w;
      prev.len += top.len;
    }
  }
  std::vector<double> out;
  out.reserve(y.size());
  for (const auto& b : blocks) out.insert(out.end(), b.len, b.mean());
  return out;
}

IsotonicFit pava_fit(std::span<const WeightedPoint> points) {
  if (points.empty()) fail(ErrorCode::validation, "isotonic fit needs at least one point");
  std::vector<WeightedPoint> sorted(points.begin(), points.end());
  for (const auto& p : sorted) {
    if (!(p.w > 0)) fail(ErrorCode::validation, "isotonic weights must be positive");
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) fail(ErrorCode::validation, "isotonic input must be finite");
  }
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.x < b.x; });
  std::vector<double> xs, ys, ws;
  for (const auto& p : sorted) {
    if (!xs.empty() && xs.back() == p.x) {
      const double w = ws.back() + p.w;
      ys.back() = (ys.back() * ws.back() + p.y * p.w) / w;
      ws.back() = w;
    } else {
      xs.push_back(p.x);
      ys.push_back(p.y);
      ws.push_back(p.w);
    }
  }
  IsotonicFit fit;
  fit.breakpoints = std::move(xs);
  fit.values = pava(ys, ws);
  double sw = 0, ss = 0;
  for (const auto& p : sorted) {
    const double r = p.y - fit.predict(p.x);
    ss += p.w * r * r;
    sw += p.w;
  }
  fit.residual_variance = ss / sw;
  return fit;
}

double IsotonicFit::predict(double x) const {
  if (breakpoints.empty()) fail(ErrorCode::state, "empty isotonic fit");
  if (x <= breakpoints.front()) return values.front();
  const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), x);
  return values[static_cast<std::size_t>(it - breakpoints.begin()) - 1];
}

double curve_weight_raw(std::span<const double> responses, double floor) {
  if (responses.size() < 2) fail(ErrorCode::validation, "curve weight needs at least two responses");
  const double mean = std::accumulate(responses.begin(), responses.end(), 0.0) /
                      static_cast<double>(responses.size());
  double ss = 0;
  for (double r : responses) ss += (r - mean) * (r - mean);
  return 1.0 / std::max(ss, floor);
}

CurveModel CurveModel::train(std::span<const CognitiveFeatureVector> features,
                             std::span<const std::size_t> labels, std::size_t classes) {
  if (features.size() != labels.size()) fail(ErrorCode::argument, "feature/label count mismatch");
  if (features.size() < 2) fail(ErrorCode::validation, "curve fitting needs at least two authors");
  if (classes < 2) fail(ErrorCode::validation, "curve fitting needs at least two classes");
  CurveModel m;
  m.classes = classes;
  m.fits.assign(kTraitCount, std::vector<IsotonicFit>(classes));
  m.signs.assign(kTraitCount, std::vector<int>(classes, 1));
  m.weights.assign(kTraitCount, std::vector<double>(classes, 0.0));
  std::vector<double> x(features.size()), y(features.size()), residuals(features.size());
  std::vector<WeightedPoint> pts(features.size());
  for (std::size_t q = 0; q < kTraitCount; ++q) {
    for (std::size_t i = 0; i < features.size(); ++i) x[i] = features[i][q];
    std::vector<double> raw(classes);
    for (std::size_t c = 0; c < classes; ++c) {
      for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= classes) fail(ErrorCode::validation, "label out of range");
        y[i] = labels[i] == c ? 1.0 : 0.0;
      }
      int sign = 1;
      try {
        sign = lessn::pearson(x, y) < 0 ? -1 : 1;
      } catch (const Error&) {
        sign = 1;
      }
      for (std::size_t i = 0; i < x.size(); ++i) pts[i] = WeightedPoint{sign * x[i], y[i], 1.0};
      auto fit = pava_fit(pts);
      for (std::size_t i = 0; i < x.size(); ++i) residuals[i] = y[i] - fit.predict(sign * x[i]);
      raw[c] = curve_weight_raw(residuals);
      m.signs[q][c] = sign;
      m.fits[q][c] = std::move(fit);
    }
    m.weights[q] = svm::min_max_rescale(raw);
  }
  return m;
}

double CurveModel::trait_score(const CognitiveFeatureVector& c, std::size_t q, std::size_t occupation) const {
  if (!trained()) fail(ErrorCode::state, "curve model is not trained");
  return fits.at(q).at(occupation).predict(signs[q][occupation] * c[q]);
}

double CurveModel::score(const CognitiveFeatureVector& c, std::size_t occupation) const {
  double num = 0, den = 0, plain = 0;
  for (std::size_t q = 0; q < kTraitCount; ++q) {
    const double s = trait_score(c, q, occupation);
    num += weights[q][occupation] * s;
    den += weights[q][occupation];
    plain += s;
  }
  return den > 0 ? num / den : plain / static_cast<double>(kTraitCount);
}

std::vector<double> CurveModel::scores(const CognitiveFeatureVector& c) const {
  std::vector<double> out(classes);
  for (std::size_t k = 0; k < classes; ++k) out[k] = score(c, k);
  return out;
}

}  // namespace cogniprof::icf
