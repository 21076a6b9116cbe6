#include "cogniprof/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cogniprof/error.hpp"
#include "cogniprof/log.hpp"

namespace cogniprof::svm {
namespace {

constexpr double kTau = 1e-12;

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

// One SMO pass structure after LIBSVM's two-variable update.
struct Smo {
  const QpProblem& qp;
  Eigen::VectorXd alpha;
  Eigen::VectorXd grad;
  double C;

  Smo(const QpProblem& problem, Eigen::VectorXd start)
      : qp(problem), alpha(std::move(start)), C(problem.C) {
    grad = qp.Q * alpha + qp.p;
  }

  bool in_up(Eigen::Index t) const {
    return (qp.y[t] > 0 && alpha[t] < C) || (qp.y[t] < 0 && alpha[t] > 0);
  }
  bool in_low(Eigen::Index t) const {
    return (qp.y[t] > 0 && alpha[t] > 0) || (qp.y[t] < 0 && alpha[t] < C);
  }

  // Returns the violation m - M and the maximal violating pair.
  double select(Eigen::Index& i, Eigen::Index& j) const {
    double up = -std::numeric_limits<double>::infinity();
    double low = std::numeric_limits<double>::infinity();
    i = j = -1;
    for (Eigen::Index t = 0; t < alpha.size(); ++t) {
      const double v = -qp.y[t] * grad[t];
      if (in_up(t) && v > up) {
        up = v;
        i = t;
      }
      if (in_low(t) && v < low) {
        low = v;
        j = t;
      }
    }
    if (i < 0 || j < 0) return 0.0;
    return up - low;
  }

  void update(Eigen::Index i, Eigen::Index j) {
    const auto& Q = qp.Q;
    const double old_i = alpha[i], old_j = alpha[j];
    double& ai = alpha[i];
    double& aj = alpha[j];
    if (qp.y[i] != qp.y[j]) {
      double quad = Q(i, i) + Q(j, j) + 2 * Q(i, j);
      if (quad <= 0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = ai - aj;
      ai += delta;
      aj += delta;
      if (diff > 0) {
        if (aj < 0) {
          aj = 0;
          ai = diff;
        }
      } else if (ai < 0) {
        ai = 0;
        aj = -diff;
      }
      if (diff > 0) {
        if (ai > C) {
          ai = C;
          aj = C - diff;
        }
      } else if (aj > C) {
        aj = C;
        ai = C + diff;
      }
    } else {
      double quad = Q(i, i) + Q(j, j) - 2 * Q(i, j);
      if (quad <= 0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = ai + aj;
      ai -= delta;
      aj += delta;
      if (sum > C) {
        if (ai > C) {
          ai = C;
          aj = sum - C;
        }
      } else if (aj < 0) {
        aj = 0;
        ai = sum;
      }
      if (sum > C) {
        if (aj > C) {
          aj = C;
          ai = sum - C;
        }
      } else if (ai < 0) {
        ai = 0;
        aj = sum;
      }
    }
    const double di = ai - old_i, dj = aj - old_j;
    if (di != 0) grad += Q.col(i) * di;
    if (dj != 0) grad += Q.col(j) * dj;
  }

  std::size_t run(double tolerance, std::size_t max_iterations, double& violation) {
    std::size_t it = 0;
    Eigen::Index i, j;
    while (true) {
      violation = select(i, j);
      if (violation < tolerance || it >= max_iterations) break;
      update(i, j);
      ++it;
    }
    return it;
  }
};

// Solves the equality-constrained problem on the free set exactly; returns
// false when the result leaves the box.
bool polish(const QpProblem& qp, Eigen::VectorXd& alpha) {
  const auto n = alpha.size();
  const double edge = qp.C * 1e-10;
  std::vector<Eigen::Index> free_set, bound_set;
  for (Eigen::Index t = 0; t < n; ++t) {
    if (alpha[t] > edge && alpha[t] < qp.C - edge) free_set.push_back(t);
    else bound_set.push_back(t);
  }
  if (free_set.empty()) return false;
  Eigen::VectorXd fixed = alpha;
  for (auto t : bound_set) fixed[t] = alpha[t] <= edge ? 0.0 : qp.C;
  for (auto t : free_set) fixed[t] = 0;

  const auto f = static_cast<Eigen::Index>(free_set.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(f + 1, f + 1);
  Eigen::VectorXd b(f + 1);
  const Eigen::VectorXd Qfixed = qp.Q * fixed;
  for (Eigen::Index r = 0; r < f; ++r) {
    for (Eigen::Index c = 0; c < f; ++c) A(r, c) = qp.Q(free_set[r], free_set[c]);
    A(r, f) = qp.y[free_set[r]];
    A(f, r) = qp.y[free_set[r]];
    b[r] = -qp.p[free_set[r]] - Qfixed[free_set[r]];
  }
  b[f] = qp.delta - qp.y.dot(fixed);
  const Eigen::VectorXd sol = A.completeOrthogonalDecomposition().solve(b);
  if (!sol.allFinite() || (A * sol - b).norm() > 1e-8 * (1 + b.norm())) return false;
  Eigen::VectorXd candidate = fixed;
  for (Eigen::Index r = 0; r < f; ++r) {
    double v = sol[r];
    if (v < -1e-12 || v > qp.C + 1e-12) return false;
    candidate[free_set[r]] = std::clamp(v, 0.0, qp.C);
  }
  if (std::abs(qp.y.dot(candidate) - qp.delta) > 1e-10 * (1 + std::abs(qp.delta))) return false;
  if (qp_objective(qp, candidate) > qp_objective(qp, alpha) + 1e-14) return false;
  alpha = candidate;
  return true;
}

}  // namespace

// --------------------------------------------------------------------- TF-IDF

std::size_t hash_bucket(std::string_view term, std::size_t dims) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : term) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return static_cast<std::size_t>(h % dims);
}

Tfidf Tfidf::fit(std::span<const std::vector<Term>> docs, std::size_t dims) {
  if (dims == 0) fail(ErrorCode::argument, "tfidf dimension must be positive");
  Tfidf t;
  t.dims = dims;
  t.documents = docs.size();
  std::vector<Term> uniq;
  for (const auto& doc : docs) {
    uniq.assign(doc.begin(), doc.end());
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    for (const auto& term : uniq) ++t.df[term];
  }
  return t;
}

double Tfidf::idf(const Term& term) const {
  const auto it = df.find(term);
  const double d = it == df.end() ? 0.0 : static_cast<double>(it->second);
  return std::log((1.0 + static_cast<double>(documents)) / (1.0 + d)) + 1.0;
}

std::vector<double> Tfidf::transform(std::span<const Term> doc) const {
  std::vector<double> v(dims, 0.0);
  std::unordered_map<std::string_view, double> tf;
  for (const auto& term : doc) tf[term] += 1;
  for (const auto& [term, count] : tf) v[hash_bucket(term, dims)] += count * idf(std::string(term));
  double norm = 0;
  for (double x : v) norm += x * x;
  if (norm > 0) {
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
  }
  return v;
}

std::vector<double> AuthorRepresentation::joint() const {
  std::vector<double> out(cognitive.begin(), cognitive.end());
  out.insert(out.end(), tfidf.begin(), tfidf.end());
  return out;
}

std::vector<AuthorRepresentation> build_representations(
    std::span<const TraitScores> cognitive, std::span<const std::vector<Term>> docs,
    const Tfidf& tfidf, std::span<const std::optional<std::size_t>> labels) {
  if (cognitive.size() != docs.size()) fail(ErrorCode::argument, "cognitive/document count mismatch");
  if (!labels.empty() && labels.size() != docs.size()) {
    fail(ErrorCode::argument, "label count mismatch");
  }
  std::vector<AuthorRepresentation> out;
  out.reserve(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    AuthorRepresentation r;
    r.cognitive = cognitive[i];
    r.tfidf = tfidf.transform(docs[i]);
    if (!labels.empty()) r.label = labels[i];
    out.push_back(std::move(r));
  }
  return out;
}

// --------------------------------------------------------------------- Kernel

KernelParams KernelParams::defaults(std::size_t joint_dims) {
  KernelParams p;
  p.eta = 1.0 / static_cast<double>(std::max<std::size_t>(joint_dims, 1));
  return p;
}

void KernelParams::validate() const {
  if (!(eta > 0) || !std::isfinite(eta)) fail(ErrorCode::argument, "kernel eta must be positive");
  if (!(C > 0)) fail(ErrorCode::argument, "box constraint C must be positive");
  for (double f : scale) {
    if (!(f >= 0) || !std::isfinite(f)) fail(ErrorCode::argument, "kernel scaling must be finite and >= 0");
  }
}

std::vector<double> inverse_std_scaling(std::span<const std::vector<double>> rows) {
  if (rows.empty()) return {};
  const auto d = rows.front().size();
  std::vector<double> mean(d, 0.0), var(d, 0.0);
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < d; ++k) mean[k] += r[k];
  }
  for (auto& m : mean) m /= static_cast<double>(rows.size());
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < d; ++k) var[k] += (r[k] - mean[k]) * (r[k] - mean[k]);
  }
  std::vector<double> scale(d, 0.0);
  for (std::size_t k = 0; k < d; ++k) {
    const double sd = std::sqrt(var[k] / static_cast<double>(rows.size()));
    scale[k] = sd > 1e-12 ? 1.0 / sd : 0.0;
  }
  return scale;
}

double kernel(std::span<const double> a, std::span<const double> b, const KernelParams& p) {
  if (a.size() != b.size()) fail(ErrorCode::argument, "kernel: dimension mismatch");
  if (!p.scale.empty() && p.scale.size() != a.size()) {
    fail(ErrorCode::argument, "kernel: scaling dimension mismatch");
  }
  double d2 = 0;
  if (p.scale.empty()) {
    for (std::size_t k = 0; k < a.size(); ++k) d2 += (a[k] - b[k]) * (a[k] - b[k]);
  } else {
    for (std::size_t k = 0; k < a.size(); ++k) {
      const double diff = p.scale[k] * (a[k] - b[k]);
      d2 += diff * diff;
    }
  }
  return std::exp(-p.eta * d2);
}

double kernel(const AuthorRepresentation& a, const AuthorRepresentation& b, const KernelParams& p) {
  const auto ja = a.joint();
  const auto jb = b.joint();
  return kernel(ja, jb, p);
}

Eigen::MatrixXd gram_matrix(std::span<const std::vector<double>> rows, const KernelParams& p) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    K(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      K(i, j) = K(j, i) = kernel(rows[static_cast<std::size_t>(i)], rows[static_cast<std::size_t>(j)], p);
    }
  }
  return K;
}

// ------------------------------------------------------------------------ QP

double qp_objective(const QpProblem& qp, const Eigen::VectorXd& alpha) {
  return 0.5 * alpha.dot(qp.Q * alpha) + qp.p.dot(alpha);
}

QpResult solve_qp(const QpProblem& qp, const QpOptions& options) {
  const auto n = qp.p.size();
  if (qp.Q.rows() != n || qp.Q.cols() != n || qp.y.size() != n) {
    fail(ErrorCode::argument, "qp: dimension mismatch");
  }
  if (!(qp.C > 0)) fail(ErrorCode::argument, "qp: C must be positive");
  for (Eigen::Index t = 0; t < n; ++t) {
    if (qp.y[t] != 1.0 && qp.y[t] != -1.0) fail(ErrorCode::argument, "qp: y entries must be +-1");
  }
  Eigen::VectorXd start = qp.start.size() == n ? qp.start : Eigen::VectorXd::Zero(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    if (start[t] < 0 || start[t] > qp.C) fail(ErrorCode::argument, "qp: start outside the box");
  }
  if (std::abs(qp.y.dot(start) - qp.delta) > 1e-9 * (1 + std::abs(qp.delta))) {
    fail(ErrorCode::argument, "qp: start violates the equality constraint");
  }

  Smo smo(qp, std::move(start));
  QpResult r;
  r.iterations = smo.run(options.tolerance, options.max_iterations, r.violation);
  if (options.polish) {
    for (int round = 0; round < 3; ++round) {
      Eigen::VectorXd candidate = smo.alpha;
      if (!polish(qp, candidate)) break;
      smo.alpha = candidate;
      smo.grad = qp.Q * smo.alpha + qp.p;
      const auto before = r.iterations;
      r.iterations += smo.run(std::min(options.tolerance, 1e-9), options.max_iterations, r.violation);
      if (r.iterations == before) break;
    }
    Eigen::Index i, j;
    r.violation = smo.select(i, j);
  }
  r.converged = r.violation < options.tolerance;
  if (!r.converged) {
    log::warn("qp: stopped after " + std::to_string(r.iterations) + " iterations, violation " +
              std::to_string(r.violation));
  }
  r.alpha = std::move(smo.alpha);
  r.gradient = std::move(smo.grad);
  r.objective = qp_objective(qp, r.alpha);
  return r;
}

// ------------------------------------------------------------------- SVM dual

DualSolution solve_dual(const Eigen::MatrixXd& K, std::span<const int> labels, double C,
                        const QpOptions& options) {
  const auto n = static_cast<Eigen::Index>(labels.size());
  if (n < 2) fail(ErrorCode::validation, "svm needs at least two points");
  if (K.rows() != n || K.cols() != n) fail(ErrorCode::argument, "svm: Gram size mismatch");
  bool pos = false, neg = false;
  for (int o : labels) {
    if (o == 1) pos = true;
    else if (o == -1) neg = true;
    else fail(ErrorCode::argument, "svm labels must be +1 or -1");
  }
  if (!pos || !neg) fail(ErrorCode::validation, "svm needs both classes present");

  QpProblem qp;
  qp.y.resize(n);
  for (Eigen::Index t = 0; t < n; ++t) qp.y[t] = labels[static_cast<std::size_t>(t)];
  qp.Q = (qp.y * qp.y.transpose()).cwiseProduct(K);
  qp.p = -Eigen::VectorXd::Ones(n);
  qp.delta = 0;
  qp.C = C;
  const auto r = solve_qp(qp, options);

  DualSolution s;
  s.alphas = r.alpha;
  s.objective = -r.objective;
  s.iterations = r.iterations;
  // Bias from free vectors; midpoint of the feasible interval otherwise.
  double sum = 0;
  std::size_t free_count = 0;
  double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
  const double edge = C * 1e-8;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double b_t = -qp.y[t] * r.gradient[t];
    if (s.alphas[t] > edge && s.alphas[t] < C - edge) {
      sum += b_t;
      ++free_count;
    } else {
      const bool at_upper = s.alphas[t] >= C - edge;
      // y=+1 at 0 or y=-1 at C bound b from below; the rest from above.
      if ((qp.y[t] > 0) != at_upper) lo = std::max(lo, b_t);
      else hi = std::min(hi, b_t);
    }
    if (s.alphas[t] > edge) s.support.push_back(static_cast<std::size_t>(t));
  }
  if (free_count > 0) {
    s.bias = sum / static_cast<double>(free_count);
  } else if (std::isfinite(lo) && std::isfinite(hi)) {
    s.bias = 0.5 * (lo + hi);
  } else {
    s.bias = std::isfinite(lo) ? lo : (std::isfinite(hi) ? hi : 0.0);
  }
  return s;
}

DualSolution solve_dual(std::span<const AuthorRepresentation> data, std::span<const int> labels,
                        const KernelParams& p, const QpOptions& options) {
  p.validate();
  std::vector<std::vector<double>> rows;
  rows.reserve(data.size());
  for (const auto& d : data) rows.push_back(d.joint());
  return solve_dual(gram_matrix(rows, p), labels, p.C, options);
}

// -------------------------------------------------------------------- Sphere

double SphereSolution::radius() const { return std::sqrt(std::max(0.0, radius_sq)); }

SphereSolution solve_sphere(const Eigen::MatrixXd& K, double C, const QpOptions& options) {
  const auto n = K.rows();
  if (n == 0) fail(ErrorCode::validation, "sphere needs at least one point");
  if (!(C > 0)) fail(ErrorCode::argument, "box constraint C must be positive");
  if (C * static_cast<double>(n) < 1.0 - 1e-12) {
    fail(ErrorCode::validation, "sphere infeasible: C * n must be at least 1");
  }
  QpProblem qp;
  qp.Q = 2.0 * K;
  qp.p = -K.diagonal();
  qp.y = Eigen::VectorXd::Ones(n);
  qp.delta = 1.0;
  qp.C = C;
  qp.start = Eigen::VectorXd::Zero(n);
  double left = 1.0;
  for (Eigen::Index t = 0; t < n && left > 0; ++t) {
    qp.start[t] = std::min(C, left);
    left -= qp.start[t];
  }
  qp.start[n - 1] += left;
  const auto r = solve_qp(qp, options);

  SphereSolution s;
  s.betas = r.alpha;
  s.center_sq = s.betas.dot(K * s.betas);
  const Eigen::VectorXd kb = K * s.betas;
  std::vector<double> d2(static_cast<std::size_t>(n));
  for (Eigen::Index t = 0; t < n; ++t) {
    d2[static_cast<std::size_t>(t)] = std::max(0.0, K(t, t) - 2 * kb[t] + s.center_sq);
  }
  const double edge = C * 1e-8;
  double sum = 0;
  std::size_t free_count = 0;
  double inside = 0, outside = std::numeric_limits<double>::infinity();
  for (Eigen::Index t = 0; t < n; ++t) {
    const auto dt = d2[static_cast<std::size_t>(t)];
    if (s.betas[t] > edge && s.betas[t] < C - edge) {
      sum += dt;
      ++free_count;
    } else if (s.betas[t] <= edge) {
      inside = std::max(inside, dt);
    } else {
      outside = std::min(outside, dt);
    }
  }
  if (free_count > 0) s.radius_sq = sum / static_cast<double>(free_count);
  else if (std::isfinite(outside)) s.radius_sq = 0.5 * (inside + outside);
  else s.radius_sq = inside;
  s.slacks.resize(static_cast<std::size_t>(n));
  for (std::size_t t = 0; t < d2.size(); ++t) {
    const double x = d2[t] - s.radius_sq;
    s.slacks[t] = x > 1e-9 ? x : 0.0;
  }
  return s;
}

double sphere_distance_sq(std::span<const double> x, std::span<const std::vector<double>> rows,
                          const SphereSolution& s, const KernelParams& p) {
  double cross = 0;
  for (std::size_t j = 0; j < rows.size(); ++j) {
    const double b = s.betas[static_cast<Eigen::Index>(j)];
    if (b != 0) cross += b * kernel(x, rows[j], p);
  }
  return std::max(0.0, kernel(x, x, p) - 2 * cross + s.center_sq);
}

ClusterResult svc_spheres(std::span<const std::vector<double>> rows, const KernelParams& p,
                          std::size_t line_samples, const QpOptions& options) {
  if (line_samples < 2) fail(ErrorCode::argument, "at least two segment samples are required");
  if (rows.empty()) fail(ErrorCode::validation, "clustering needs at least one point");
  p.validate();
  ClusterResult out;
  out.sphere = solve_sphere(gram_matrix(rows, p), p.C, options);
  const auto n = rows.size();
  DisjointSets sets(n);
  const double limit = out.sphere.radius_sq + 1e-9;
  std::vector<double> sample(rows.front().size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (sets.find(i) == sets.find(j)) continue;
      bool inside = true;
      for (std::size_t k = 0; k < line_samples && inside; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(line_samples - 1);
        for (std::size_t d = 0; d < sample.size(); ++d) sample[d] = rows[i][d] + t * (rows[j][d] - rows[i][d]);
        inside = sphere_distance_sq(sample, rows, out.sphere, p) <= limit;
      }
      if (inside) sets.unite(i, j);
    }
  }
  std::vector<std::size_t> id(n, n);
  out.assignment.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto root = sets.find(i);
    if (id[root] == n) id[root] = out.clusters++;
    out.assignment[i] = id[root];
  }
  return out;
}

// ------------------------------------------------------------------ SvmModel

SvmModel SvmModel::train(std::span<const AuthorRepresentation> data, std::size_t classes,
                         const KernelParams& p, const QpOptions& options) {
  p.validate();
  if (classes < 2) fail(ErrorCode::validation, "svm needs at least two classes");
  if (data.size() < 2) fail(ErrorCode::validation, "svm needs at least two points");
  std::vector<std::vector<double>> rows;
  rows.reserve(data.size());
  for (const auto& d : data) {
    if (!d.label) fail(ErrorCode::validation, "svm training point without a label");
    if (*d.label >= classes) fail(ErrorCode::validation, "svm label out of range");
    rows.push_back(d.joint());
  }
  const Eigen::MatrixXd K = gram_matrix(rows, p);
  SvmModel m;
  m.params = p;
  m.classes = classes;
  std::vector<std::vector<double>> coef(classes, std::vector<double>(rows.size(), 0.0));
  m.bias.assign(classes, 0.0);
  m.norm_sq.assign(classes, 0.0);
  std::vector<int> labels(rows.size());
  for (std::size_t c = 0; c < classes; ++c) {
    std::size_t positives = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      labels[i] = *data[i].label == c ? 1 : -1;
      positives += labels[i] > 0;
    }
    if (positives == 0 || positives == rows.size()) {
      // Degenerate one-vs-rest problem: constant decision, no vectors.
      m.bias[c] = positives == 0 ? -1.0 : 1.0;
      log::warn("svm: class " + std::to_string(c) + " has no one-vs-rest contrast");
      continue;
    }
    const auto sol = solve_dual(K, labels, p.C, options);
    Eigen::VectorXd ya(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      coef[c][i] = sol.alphas[static_cast<Eigen::Index>(i)] * labels[i];
      ya[static_cast<Eigen::Index>(i)] = coef[c][i];
    }
    m.bias[c] = sol.bias;
    m.norm_sq[c] = ya.dot(K * ya);
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    bool used = false;
    for (std::size_t c = 0; c < classes; ++c) used = used || coef[c][i] != 0;
    if (!used) continue;
    m.vectors.push_back(rows[i]);
  }
  m.coef.assign(classes, {});
  for (std::size_t c = 0; c < classes; ++c) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      bool used = false;
      for (std::size_t k = 0; k < classes; ++k) used = used || coef[k][i] != 0;
      if (used) m.coef[c].push_back(coef[c][i]);
    }
  }
  return m;
}

std::vector<double> SvmModel::kernel_row(std::span<const double> x) const {
  std::vector<double> row(vectors.size());
  for (std::size_t j = 0; j < vectors.size(); ++j) row[j] = kernel(x, vectors[j], params);
  return row;
}

std::vector<double> SvmModel::decision_values(std::span<const double> x) const {
  const auto row = kernel_row(x);
  std::vector<double> out(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    double f = bias[c];
    for (std::size_t j = 0; j < row.size(); ++j) f += coef[c][j] * row[j];
    out[c] = f;
  }
  return out;
}

std::size_t SvmModel::predict(std::span<const double> x) const {
  const auto f = decision_values(x);
  std::size_t best = 0;
  for (std::size_t c = 1; c < f.size(); ++c) {
    if (f[c] > f[best]) best = c;
  }
  return best;
}

std::vector<double> SvmModel::cluster_raw(std::span<const double> x) const {
  const auto row = kernel_row(x);
  std::vector<double> out(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    double f = 0, mass = 0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      f += coef[c][j] * row[j];
      mass += std::abs(coef[c][j]);
    }
    out[c] = mass > 0 ? f / mass - norm_sq[c] / (mass * mass) : 0.0;
  }
  return out;
}

std::vector<double> min_max_rescale(std::span<const double> v) {
  std::vector<double> out(v.size(), 0.0);
  if (v.empty()) return out;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double range = *hi - *lo;
  if (!(range > 0)) return out;
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - *lo) / range;
  return out;
}

std::vector<double> SvmModel::cluster_weights(std::span<const double> x) const {
  const auto raw = cluster_raw(x);
  return min_max_rescale(raw);
}

}  // namespace cogniprof::svm
