#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "cogniprof/corpus.hpp"
#include "cogniprof/lessn.hpp"

// Kernel SVM over joint [cognitive | hashed TF-IDF] author vectors, and
// support-vector clustering on the same kernel.
namespace cogniprof::svm {

using corpus::Term;
using lessn::TraitScores;

inline constexpr std::size_t kDefaultTfidfDims = 512;
inline constexpr std::size_t kDefaultLineSamples = 10;

std::size_t hash_bucket(std::string_view term, std::size_t dims);

struct Tfidf {
  std::size_t dims = kDefaultTfidfDims;
  std::size_t documents = 0;
  std::unordered_map<Term, std::size_t> df;

  static Tfidf fit(std::span<const std::vector<Term>> docs, std::size_t dims = kDefaultTfidfDims);
  // ln((1+N)/(1+df)) + 1
  double idf(const Term& term) const;
  // Hashed, L2-normalized; zero vector for an empty document.
  std::vector<double> transform(std::span<const Term> doc) const;
};

struct AuthorRepresentation {
  TraitScores cognitive{};
  std::vector<double> tfidf;
  std::optional<std::size_t> label;

  std::vector<double> joint() const;
};

std::vector<AuthorRepresentation> build_representations(
    std::span<const TraitScores> cognitive, std::span<const std::vector<Term>> docs,
    const Tfidf& tfidf, std::span<const std::optional<std::size_t>> labels = {});

struct KernelParams {
  double eta = 1.0;
  // Diagonal of F; empty means identity.
  std::vector<double> scale;
  double C = 1.0;

  static KernelParams defaults(std::size_t joint_dims);
  void validate() const;
};

// F = diag(1/sigma_d) over the rows; zero for constant dimensions.
std::vector<double> inverse_std_scaling(std::span<const std::vector<double>> rows);

// exp(-eta * ||F(a - b)||^2)
double kernel(std::span<const double> a, std::span<const double> b, const KernelParams& p);
double kernel(const AuthorRepresentation& a, const AuthorRepresentation& b, const KernelParams& p);
Eigen::MatrixXd gram_matrix(std::span<const std::vector<double>> rows, const KernelParams& p);

// ------------------------------------------------------------------- QP core
//
//   min 0.5 a'Qa + p'a   s.t.  y'a = delta,  0 <= a_i <= C,  y_i in {-1, +1}

struct QpProblem {
  Eigen::MatrixXd Q;
  Eigen::VectorXd p;
  Eigen::VectorXd y;
  double delta = 0;
  double C = 1;
  // Feasible starting point; zeros when empty.
  Eigen::VectorXd start;
};

struct QpOptions {
  double tolerance = 1e-3;
  std::size_t max_iterations = 10000;
  bool polish = true;
};

struct QpResult {
  Eigen::VectorXd alpha;
  Eigen::VectorXd gradient;
  double objective = 0;
  // Max KKT violation m(a) - M(a) at exit.
  double violation = 0;
  std::size_t iterations = 0;
  bool converged = false;
};

double qp_objective(const QpProblem& qp, const Eigen::VectorXd& alpha);
QpResult solve_qp(const QpProblem& qp, const QpOptions& options = {});

// ---------------------------------------------------------- Binary SVM dual

struct DualSolution {
  Eigen::VectorXd alphas;
  double bias = 0;
  std::vector<std::size_t> support;
  // Value of the maximized dual: sum a - 0.5 sum a_i a_j o_i o_j K_ij.
  double objective = 0;
  std::size_t iterations = 0;
};

// labels in {-1, +1}; both must occur.
DualSolution solve_dual(const Eigen::MatrixXd& K, std::span<const int> labels, double C,
                        const QpOptions& options = {});
DualSolution solve_dual(std::span<const AuthorRepresentation> data, std::span<const int> labels,
                        const KernelParams& p, const QpOptions& options = {});

// -------------------------------------------------- Support-vector clustering

struct SphereSolution {
  Eigen::VectorXd betas;
  double radius_sq = 0;
  // beta' K beta
  double center_sq = 0;
  std::vector<double> slacks;

  double radius() const;
};

// Minimum enclosing sphere in feature space: max sum b_i K_ii - b'Kb with
// sum b = 1, 0 <= b_i <= C.
SphereSolution solve_sphere(const Eigen::MatrixXd& K, double C, const QpOptions& options = {});

double sphere_distance_sq(std::span<const double> x, std::span<const std::vector<double>> rows,
                          const SphereSolution& s, const KernelParams& p);

struct ClusterResult {
  std::vector<std::size_t> assignment;
  std::size_t clusters = 0;
  SphereSolution sphere;
};

ClusterResult svc_spheres(std::span<const std::vector<double>> rows, const KernelParams& p,
                          std::size_t line_samples = kDefaultLineSamples,
                          const QpOptions& options = {});

// ------------------------------------------------------------ One-vs-rest

struct SvmModel {
  KernelParams params;
  std::size_t classes = 0;
  // Training vectors with a nonzero coefficient in at least one class.
  std::vector<std::vector<double>> vectors;
  // coef[c][j] = alpha_j * o_j for class c's problem.
  std::vector<std::vector<double>> coef;
  std::vector<double> bias;
  // sum_ij a_i a_j o_i o_j K_ij per class.
  std::vector<double> norm_sq;

  static SvmModel train(std::span<const AuthorRepresentation> data, std::size_t classes,
                        const KernelParams& p, const QpOptions& options = {});

  std::vector<double> kernel_row(std::span<const double> x) const;
  std::vector<double> decision_values(std::span<const double> x) const;
  // Larger decision value wins; exact ties go to the lower class index.
  std::size_t predict(std::span<const double> x) const;
  // sum_j a_j o_j k(x, d_j) - sum_ij a_i a_j o_i o_j K_ij per class, with the
  // alphas scaled to unit mass so both terms live on the kernel's scale.
  std::vector<double> cluster_raw(std::span<const double> x) const;
  // cluster_raw min-max rescaled across classes; all zero when flat.
  std::vector<double> cluster_weights(std::span<const double> x) const;
};

std::vector<double> min_max_rescale(std::span<const double> v);

}  // namespace cogniprof::svm
