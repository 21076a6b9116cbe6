#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cogniprof/lessn.hpp"

// Weighted isotonic curve fitting (pool adjacent violators) per
// (cognitive dimension, occupation).
namespace cogniprof::icf {

using lessn::CognitiveFeatureVector;
using lessn::kTraitCount;

inline constexpr double kVarianceFloor = 1e-6;

struct WeightedPoint {
  double x = 0;
  double y = 0;
  double w = 1;
};

struct IsotonicFit {
  // Distinct sorted x values and their non-decreasing fitted values.
  std::vector<double> breakpoints;
  std::vector<double> values;
  // Weighted residual variance of y around the fit.
  double residual_variance = 0;

  // Left-step interpolation, clamped to the end values.
  double predict(double x) const;
};

// Exact minimizer of sum w (y - f)^2 over non-decreasing f. Ties in x are
// pooled first.
IsotonicFit pava_fit(std::span<const WeightedPoint> points);

// Pools non-decreasing values in place (unit-free core of pava_fit).
std::vector<double> pava(std::span<const double> y, std::span<const double> w);

// 1 / max(sum (r - mean r)^2, floor)
double curve_weight_raw(std::span<const double> responses, double floor = kVarianceFloor);

struct CurveModel {
  std::size_t classes = 0;
  // fits[q][c], signs[q][c] in {-1, +1}, weights[q][c] rescaled to [0,1].
  std::vector<std::vector<IsotonicFit>> fits;
  std::vector<std::vector<int>> signs;
  std::vector<std::vector<double>> weights;

  static CurveModel train(std::span<const CognitiveFeatureVector> features,
                          std::span<const std::size_t> labels, std::size_t classes);

  bool trained() const { return classes > 0; }
  // Per-trait fitted occupation indicator for the author.
  double trait_score(const CognitiveFeatureVector& c, std::size_t q, std::size_t occupation) const;
  // Weighted mean of the trait scores by the curve weights; plain mean when
  // all weights are zero.
  double score(const CognitiveFeatureVector& c, std::size_t occupation) const;
  std::vector<double> scores(const CognitiveFeatureVector& c) const;
};

}  // namespace cogniprof::icf
