#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

// Fusion of the cluster, boost and curve weights and the alpha/beta search.
namespace cogniprof::coherence {

inline constexpr double kDefaultGridStep = 0.05;
inline constexpr std::size_t kNoClass = std::numeric_limits<std::size_t>::max();

struct CoherenceParams {
  double alpha = 0;
  double beta = 0;

  void validate() const;
  bool operator==(const CoherenceParams&) const = default;
};

// (1 - alpha - beta) * wc + alpha * wb + beta * wv
double coherence_weight(double wc, double wb, double wv, const CoherenceParams& p);

// Per-author, per-class module weights. An empty candidate mask means every
// class is a candidate.
struct ModuleScores {
  std::vector<double> cluster;
  std::vector<double> boost;
  std::vector<double> curve;
  std::vector<bool> candidates;
  std::size_t label = kNoClass;
};

std::vector<double> fuse(const ModuleScores& s, const CoherenceParams& p);
// Highest fused weight among candidates, lower index on ties; kNoClass when
// there are no candidates.
std::size_t fuse_predict(const ModuleScores& s, const CoherenceParams& p);

struct F1Score {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::size_t correct = 0;
  std::size_t assigned = 0;
  std::size_t labeled = 0;
};

// Precision over assigned predictions (kNoClass abstains), recall over all
// labeled authors.
F1Score f1_score(std::span<const std::size_t> predicted, std::span<const std::size_t> truth);

struct SurfaceCell {
  double alpha = 0;
  double beta = 0;
  double f1 = 0;
};

struct TuneResult {
  CoherenceParams best;
  double best_f1 = 0;
  std::vector<SurfaceCell> surface;
};

// Exhaustive grid over alpha + beta <= 1. Ties go to smaller alpha + beta,
// then smaller alpha.
TuneResult tune(const std::function<double(const CoherenceParams&)>& evaluate,
                double step = kDefaultGridStep);
TuneResult tune(std::span<const ModuleScores> validation, double step = kDefaultGridStep);

}  // namespace cogniprof::coherence
