#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cogniprof/lessn.hpp"

// Boosted behavior trees: 1-D gradient-boosted regression trees on each
// cognitive dimension, one ensemble per (dimension, occupation).
namespace cogniprof::boost {

using lessn::CognitiveFeatureVector;
using lessn::kTraitCount;

struct BoostParams {
  std::size_t rounds = 50;
  double learning_rate = 0.1;
  std::size_t max_depth = 3;
  std::size_t min_leaf = 5;
  // Honor the fixed root split at x = 0 when both sides are large enough.
  bool fixed_root = true;

  void validate() const;
};

struct TreeNode {
  bool leaf = true;
  // Points with x >= threshold go left.
  double threshold = 0;
  std::size_t left = 0;
  std::size_t right = 0;
  double value = 0;
  // Mean |residual| of the training points in this leaf.
  double mean_abs_gradient = 0;
  std::size_t count = 0;
};

struct Tree {
  std::vector<TreeNode> nodes;

  std::size_t leaf_of(double x) const;
  double predict(double x) const { return nodes[leaf_of(x)].value; }
  std::size_t leaf_count() const;
};

// Mean of the targets, the MSE minimizer. Throws on empty input.
double init_constant(std::span<const double> targets);

// Fits one regression tree to the residuals targets - current.
Tree fit_round(std::span<const double> current, std::span<const double> x,
               std::span<const double> targets, const BoostParams& p);

struct Ensemble {
  double init = 0;
  double learning_rate = 0.1;
  std::vector<Tree> trees;

  double predict(double x) const;
  double predict(double x, std::size_t rounds) const;
  // Mean |gradient| of the last tree's leaf containing x; 0 with no trees.
  double last_gradient(double x) const;
};

// Returns the ensemble plus the training MSE after each round (index 0 is
// the init constant). Throws numeric if the MSE ever rises.
Ensemble fit_ensemble(std::span<const double> x, std::span<const double> targets,
                      const BoostParams& p, std::vector<double>* mse_trace = nullptr);

struct Prediction {
  std::size_t occupation = 0;
  std::vector<std::size_t> votes;  // per class
  std::vector<double> summed;      // per class, over dimensions
};

struct BoostModel {
  BoostParams params;
  std::size_t classes = 0;
  // ensembles[q][c]
  std::vector<std::vector<Ensemble>> ensembles;

  static BoostModel train(std::span<const CognitiveFeatureVector> features,
                          std::span<const std::size_t> labels, std::size_t classes,
                          const BoostParams& p = {});

  bool trained() const { return classes > 0; }
  double score(const CognitiveFeatureVector& c, std::size_t q, std::size_t occupation) const;
  Prediction predict_occupation(const CognitiveFeatureVector& c) const;
  // mean_q |o_q| (2 - |h_q|), halved into [0,1].
  double weight(const CognitiveFeatureVector& c, std::size_t occupation) const;
  std::vector<double> weights(const CognitiveFeatureVector& c) const;
};

// w = (1/K) sum |o_q|(2 - |h_q|) / 2 with o, h clamped to [0,1].
double boost_weight(std::span<const double> o, std::span<const double> h);

// Majority vote over per-dimension argmax classes; ties by summed score, then
// lower index.
Prediction majority_vote(const std::vector<std::vector<double>>& scores_by_dimension);

}  // namespace cogniprof::boost
