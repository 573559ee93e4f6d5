#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "qtag/common.hpp"
#include "qtag/svm.hpp"

namespace qtag {
namespace {

// Exact minimizer of the per-example sub-problem
//   min 1/2 A ||a||^2 + B'a  s.t.  sum_m a_m = 0,  a_m <= C [m == y]
// by the sorting-based projection.
void solve_sub_problem(double a, std::size_t y, double c, const Eigen::VectorXd& b,
                       std::vector<double>& scratch, Eigen::VectorXd& alpha_new) {
  const auto k = static_cast<std::size_t>(b.size());
  scratch.assign(b.data(), b.data() + k);
  scratch[y] += a * c;
  std::sort(scratch.begin(), scratch.end(), std::greater<>());
  double beta = scratch[0] - a * c;
  std::size_t r = 1;
  for (; r < k && beta < static_cast<double>(r) * scratch[r]; ++r) beta += scratch[r];
  beta /= static_cast<double>(r);
  for (std::size_t m = 0; m < k; ++m) {
    auto mi = static_cast<Eigen::Index>(m);
    double v = (beta - b(mi)) / a;
    alpha_new(mi) = m == y ? std::min(c, v) : std::min(0.0, v);
  }
}

}  // namespace

CsResult train_crammer_singer(const Eigen::MatrixXd& features, std::span<const int> labels,
                              std::size_t n_classes, const TrainConfig& config) {
  config.validate();
  const auto n = static_cast<std::size_t>(features.rows());
  if (labels.size() != n) {
    throw InvalidArgument(fmt::format("{} labels for {} training examples", labels.size(), n));
  }
  if (n_classes < 2) throw InvalidArgument("Crammer-Singer needs at least two classes");
  if (n == 0) throw InvalidArgument("no training examples");
  if (!features.allFinite()) throw InvalidArgument("features contain non-finite values");
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= n_classes) {
      throw InvalidArgument(fmt::format("class index {} outside [0, {})", y, n_classes));
    }
  }
  // config.loss is deliberately not read below.

  const Eigen::Index d = features.cols();
  const auto k = static_cast<Eigen::Index>(n_classes);
  const double c = config.c;
  // Column d of w is the weight of the constant feature, i.e. the class bias.
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(k, d + 1);
  Eigen::MatrixXd alpha = Eigen::MatrixXd::Zero(k, static_cast<Eigen::Index>(n));
  Eigen::VectorXd sq(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    sq(static_cast<Eigen::Index>(i)) =
        features.row(static_cast<Eigen::Index>(i)).squaredNorm() + 1.0;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(config.seed);
  Eigen::VectorXd g(k);
  Eigen::VectorXd b(k);
  Eigen::VectorXd alpha_new(k);
  std::vector<double> scratch;
  TrainingDiagnostics diag;

  while (diag.iterations_used < config.max_iterations) {
    rng.shuffle(std::span<std::size_t>(order));
    double stopping = 0.0;
    for (std::size_t s : order) {
      const auto i = static_cast<Eigen::Index>(s);
      const auto y = static_cast<Eigen::Index>(labels[s]);
      const double a = sq(i);
      g.noalias() = w.leftCols(d) * features.row(i).transpose();
      g += w.col(d);
      g.array() += 1.0;
      g(y) -= 1.0;

      double min_g = std::numeric_limits<double>::infinity();
      double max_g = -std::numeric_limits<double>::infinity();
      for (Eigen::Index m = 0; m < k; ++m) {
        if (alpha(m, i) < 0.0 && g(m) < min_g) min_g = g(m);
        max_g = std::max(max_g, g(m));
      }
      if (alpha(y, i) < c && g(y) < min_g) min_g = g(y);
      if (max_g - min_g <= 1e-12) continue;
      stopping = std::max(stopping, max_g - min_g);

      b = g - a * alpha.col(i);
      solve_sub_problem(a, static_cast<std::size_t>(y), c, b, scratch, alpha_new);
      for (Eigen::Index m = 0; m < k; ++m) {
        double delta = alpha_new(m) - alpha(m, i);
        if (std::abs(delta) < 1e-12) continue;
        alpha(m, i) = alpha_new(m);
        w.row(m).head(d) += delta * features.row(i);
        w(m, d) += delta;
      }
    }
    ++diag.iterations_used;
    diag.kkt_violation = stopping;
    if (stopping < config.tolerance) {
      diag.converged = true;
      break;
    }
  }

  // Dual (maximization form): -(1/2 ||W||^2 + sum_i sum_{m != y_i} alpha_i^m).
  double linear = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    auto ii = static_cast<Eigen::Index>(i);
    linear += alpha.col(ii).sum() - alpha(labels[i], ii);
  }
  const double w_norm2 = w.squaredNorm();
  diag.dual_objective = -(0.5 * w_norm2 + linear);
  diag.slacks.resize(n);
  double slack_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    auto ii = static_cast<Eigen::Index>(i);
    Eigen::VectorXd scores = w.leftCols(d) * features.row(ii).transpose() + w.col(d);
    double worst = 0.0;
    for (Eigen::Index m = 0; m < k; ++m) {
      if (m == labels[i]) continue;
      worst = std::max(worst, 1.0 + scores(m) - scores(labels[i]));
    }
    diag.slacks[i] = worst;
    slack_sum += worst;
  }
  diag.primal_objective = 0.5 * w_norm2 + c * slack_sum;

  CsResult result;
  result.model.class_weights = w.leftCols(d);
  result.model.class_bias = w.col(d);
  result.diagnostics = std::move(diag);
  return result;
}

Eigen::VectorXd cs_scores(const Eigen::Ref<const Eigen::VectorXd>& x, const CsModel& model) {
  if (static_cast<std::size_t>(x.size()) != model.dim()) {
    throw InvalidArgument(fmt::format("cs_scores: input dimension {} but model expects {}",
                                      x.size(), model.dim()));
  }
  return model.class_weights * x + model.class_bias;
}

std::size_t cs_predict(const Eigen::Ref<const Eigen::VectorXd>& x, const CsModel& model) {
  Eigen::VectorXd scores = cs_scores(x, model);
  std::size_t best = 0;
  for (Eigen::Index m = 1; m < scores.size(); ++m) {
    if (scores(m) > scores(static_cast<Eigen::Index>(best))) best = static_cast<std::size_t>(m);
  }
  return best;
}

}  // namespace qtag
