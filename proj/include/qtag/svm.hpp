#pragma once

// Binary kernel SVC (SMO on the dual), linear SVC (dual coordinate descent,
// hinge or squared hinge) and the Crammer-Singer joint multiclass SVM.
//
// Feature matrices hold one example per row. Labels for binary problems are
// +1/-1; multiclass labels are class indices.

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace qtag {

enum class KernelKind { linear, rbf, polynomial, sigmoid };

struct KernelSpec {
  KernelKind kind = KernelKind::rbf;
  double gamma = 1.0;
  int degree = 3;
  double coef0 = 0.0;

  /// Defaults used when no gamma is given: gamma = 1 / n_features, coef0 = 0.
  static KernelSpec with_defaults(KernelKind kind, std::size_t n_features, int degree = 3);
  void validate() const;
};

std::string_view to_string(KernelKind kind);
KernelKind parse_kernel_kind(std::string_view name);

enum class Loss { hinge, squared_hinge };
std::string_view to_string(Loss loss);
Loss parse_loss(std::string_view name);

struct TrainConfig {
  double c = 1.0;
  /// SMO: working-set (pair) updates. DCD and Crammer-Singer: passes over
  /// the training set.
  int max_iterations = 10000;
  double tolerance = 1e-3;
  Loss loss = Loss::hinge;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainingDiagnostics {
  int iterations_used = 0;
  bool converged = false;
  /// Dual objective in maximization form, so weak duality reads
  /// dual_objective <= primal_objective.
  double dual_objective = 0.0;
  double primal_objective = 0.0;
  std::vector<double> slacks;
  double kkt_violation = 0.0;
};

struct BinarySvmModel {
  std::vector<std::size_t> support_indices;
  std::vector<double> alphas;
  std::vector<int> support_labels;
  Eigen::MatrixXd support_vectors;  // one row per support vector
  double intercept = 0.0;           // rho in f(x) = sum y_i a_i K(x_i, x) + rho
  KernelSpec kernel;

  std::size_t dim() const { return static_cast<std::size_t>(support_vectors.cols()); }
};

struct LinearModel {
  Eigen::VectorXd weights;
  double bias = 0.0;
};

struct CsModel {
  Eigen::MatrixXd class_weights;  // n_classes x dim
  Eigen::VectorXd class_bias;     // n_classes

  std::size_t n_classes() const { return static_cast<std::size_t>(class_weights.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(class_weights.cols()); }
};

double kernel_eval(const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& z, const KernelSpec& spec);

/// Kernel matrix over the rows of a feature matrix, shared by every binary
/// problem trained on the same features (one-vs-rest trains all classes
/// against one Gram matrix). Up to `full_limit` rows the matrix is stored;
/// beyond that rows are recomputed on demand.
class GramMatrix {
 public:
  static constexpr std::size_t kDefaultFullLimit = 8192;

  GramMatrix(const Eigen::MatrixXd& features, const KernelSpec& spec,
             std::size_t full_limit = kDefaultFullLimit);
  GramMatrix(Eigen::MatrixXd&&, const KernelSpec&, std::size_t = kDefaultFullLimit) = delete;

  const Eigen::MatrixXd& features() const { return *features_; }
  const KernelSpec& kernel() const { return spec_; }
  std::size_t size() const { return static_cast<std::size_t>(features_->rows()); }
  bool stored() const { return values_.size() > 0; }
  double diagonal(std::size_t i) const { return diagonal_(static_cast<Eigen::Index>(i)); }
  /// K(x_i, x_k) for every k.
  void row(std::size_t i, Eigen::VectorXd& out) const;

 private:
  const Eigen::MatrixXd* features_;
  KernelSpec spec_;
  Eigen::MatrixXd values_;
  Eigen::VectorXd diagonal_;
  Eigen::VectorXd sq_norms_;
};

struct SmoResult {
  BinarySvmModel model;
  TrainingDiagnostics diagnostics;
};

/// Solves min 1/2 a'Qa - e'a s.t. y'a = 0, 0 <= a_i <= C with maximal
/// violating pair selection. Stops when the pair's violation drops below
/// config.tolerance or after config.max_iterations pair updates.
SmoResult train_svc_smo(const Eigen::MatrixXd& features, std::span<const int> labels,
                        const KernelSpec& kernel, const TrainConfig& config);
SmoResult train_svc_smo(const GramMatrix& gram, std::span<const int> labels,
                        const TrainConfig& config);

double decision_value(const Eigen::Ref<const Eigen::VectorXd>& x, const BinarySvmModel& model);

struct LinearResult {
  LinearModel model;
  TrainingDiagnostics diagnostics;
};

/// Dual coordinate descent for the linear SVM. The bias is learned as the
/// weight of an appended constant feature, so it is regularized with w.
LinearResult train_linear_dcd(const Eigen::MatrixXd& features, std::span<const int> labels,
                              const TrainConfig& config);

double decision_value(const Eigen::Ref<const Eigen::VectorXd>& x, const LinearModel& model);

struct CsResult {
  CsModel model;
  TrainingDiagnostics diagnostics;
};

/// Crammer-Singer multiclass SVM solved one example sub-problem at a time.
/// config.loss is ignored: the joint formulation has a single loss.
CsResult train_crammer_singer(const Eigen::MatrixXd& features, std::span<const int> labels,
                              std::size_t n_classes, const TrainConfig& config);

Eigen::VectorXd cs_scores(const Eigen::Ref<const Eigen::VectorXd>& x, const CsModel& model);
/// argmax of cs_scores; the lowest class index wins ties.
std::size_t cs_predict(const Eigen::Ref<const Eigen::VectorXd>& x, const CsModel& model);

}  // namespace qtag
