#include "cogniprof/coherence.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cogniprof/error.hpp"

namespace cogniprof::coherence {

void CoherenceParams::validate() const {
  if (!(alpha >= 0 && alpha <= 1) || !(beta >= 0 && beta <= 1)) {
    fail(ErrorCode::argument, "alpha and beta must lie in [0,1]");
  }
  if (alpha + beta > 1 + 1e-12) fail(ErrorCode::argument, "alpha + beta must not exceed 1");
}

double coherence_weight(double wc, double wb, double wv, const CoherenceParams& p) {
  p.validate();
  const double rest = std::max(0.0, 1.0 - p.alpha - p.beta);
  return rest * wc + p.alpha * wb + p.beta * wv;
}

std::vector<double> fuse(const ModuleScores& s, const CoherenceParams& p) {
  const auto n = s.cluster.size();
  if (s.boost.size() != n || s.curve.size() != n) fail(ErrorCode::argument, "module score length mismatch");
  std::vector<double> out(n);
  for (std::size_t c = 0; c < n; ++c) out[c] = coherence_weight(s.cluster[c], s.boost[c], s.curve[c], p);
  return out;
}

std::size_t fuse_predict(const ModuleScores& s, const CoherenceParams& p) {
  const auto w = fuse(s, p);
  std::size_t best = kNoClass;
  for (std::size_t c = 0; c < w.size(); ++c) {
    if (!s.candidates.empty() && !s.candidates[c]) continue;
    if (best == kNoClass || w[c] > w[best]) best = c;
  }
  return best;
}

F1Score f1_score(std::span<const std::size_t> predicted, std::span<const std::size_t> truth) {
  if (predicted.size() != truth.size()) fail(ErrorCode::argument, "f1: length mismatch");
  F1Score s;
  s.labeled = truth.size();
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] == kNoClass) continue;
    ++s.assigned;
    s.correct += predicted[i] == truth[i];
  }
  s.precision = s.assigned ? static_cast<double>(s.correct) / static_cast<double>(s.assigned) : 0.0;
  s.recall = s.labeled ? static_cast<double>(s.correct) / static_cast<double>(s.labeled) : 0.0;
  s.f1 = s.precision + s.recall > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

TuneResult tune(const std::function<double(const CoherenceParams&)>& evaluate, double step) {
  if (!(step > 0) || step > 1) fail(ErrorCode::argument, "grid step must be in (0,1]");
  const auto n = static_cast<long>(std::lround(1.0 / step));
  if (std::abs(static_cast<double>(n) * step - 1.0) > 1e-9) {
    fail(ErrorCode::argument, "grid step must divide 1 evenly");
  }
  TuneResult r;
  bool first = true;
  for (long s = 0; s <= n; ++s) {
    for (long i = 0; i <= s; ++i) {
      const CoherenceParams p{static_cast<double>(i) / static_cast<double>(n),
                              static_cast<double>(s - i) / static_cast<double>(n)};
      const double f1 = evaluate(p);
      r.surface.push_back(SurfaceCell{p.alpha, p.beta, f1});
      if (first || f1 > r.best_f1) {
        r.best = p;
        r.best_f1 = f1;
        first = false;
      }
    }
  }
  std::sort(r.surface.begin(), r.surface.end(), [](const SurfaceCell& a, const SurfaceCell& b) {
    return a.alpha != b.alpha ? a.alpha < b.alpha : a.beta < b.beta;
  });
  return r;
}

TuneResult tune(std::span<const ModuleScores> validation, double step) {
  if (validation.empty()) fail(ErrorCode::validation, "tuning needs a non-empty validation fold");
  std::vector<std::size_t> truth, predicted(validation.size());
  for (const auto& v : validation) {
    if (v.label == kNoClass) fail(ErrorCode::validation, "validation author without a label");
    truth.push_back(v.label);
  }
  return tune(
      [&](const CoherenceParams& p) {
        for (std::size_t i = 0; i < validation.size(); ++i) predicted[i] = fuse_predict(validation[i], p);
        return f1_score(predicted, truth).f1;
      },
      step);
}

}  // namespace cogniprof::coherence
