#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "qtag/common.hpp"
#include "qtag/svm.hpp"

namespace qtag {

LinearResult train_linear_dcd(const Eigen::MatrixXd& features, std::span<const int> labels,
                              const TrainConfig& config) {
  config.validate();
  const auto n = static_cast<std::size_t>(features.rows());
  if (labels.size() != n) {
    throw InvalidArgument(fmt::format("{} labels for {} training examples", labels.size(), n));
  }
  if (!features.allFinite()) throw InvalidArgument("features contain non-finite values");
  bool pos = false;
  bool neg = false;
  for (int y : labels) {
    if (y != 1 && y != -1) {
      throw InvalidArgument(fmt::format("binary labels must be +1/-1, got {}", y));
    }
    (y > 0 ? pos : neg) = true;
  }
  if (!pos || !neg) throw InvalidArgument("training labels contain a single class");

  const Eigen::Index d = features.cols();
  const bool hinge = config.loss == Loss::hinge;
  const double diag = hinge ? 0.0 : 0.5 / config.c;
  const double upper = hinge ? config.c : std::numeric_limits<double>::infinity();

  // w holds the feature weights followed by the bias (constant feature 1).
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d + 1);
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  Eigen::VectorXd qd(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    qd(static_cast<Eigen::Index>(i)) =
        features.row(static_cast<Eigen::Index>(i)).squaredNorm() + 1.0 + diag;
  }
  auto margin = [&](Eigen::Index i) {
    return features.row(i).dot(w.head(d)) + w(d);
  };

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(config.seed);
  TrainingDiagnostics diag_out;
  while (diag_out.iterations_used < config.max_iterations) {
    rng.shuffle(std::span<std::size_t>(order));
    double pg_max = -std::numeric_limits<double>::infinity();
    double pg_min = std::numeric_limits<double>::infinity();
    for (std::size_t s : order) {
      auto i = static_cast<Eigen::Index>(s);
      const double y = labels[s];
      const double g = y * margin(i) - 1.0 + diag * alpha(i);
      double pg = 0.0;
      if (alpha(i) == 0.0) {
        pg = std::min(g, 0.0);
      } else if (alpha(i) == upper) {
        pg = std::max(g, 0.0);
      } else {
        pg = g;
      }
      pg_max = std::max(pg_max, pg);
      pg_min = std::min(pg_min, pg);
      if (std::abs(pg) > 1e-12) {
        const double old = alpha(i);
        alpha(i) = std::min(std::max(old - g / qd(i), 0.0), upper);
        const double step = (alpha(i) - old) * y;
        w.head(d) += step * features.row(i).transpose();
        w(d) += step;
      }
    }
    ++diag_out.iterations_used;
    // No equality constraint here: a uniform nonzero gradient is a violation.
    diag_out.kkt_violation = std::max(pg_max, 0.0) - std::min(pg_min, 0.0);
    if (diag_out.kkt_violation <= config.tolerance) {
      diag_out.converged = true;
      break;
    }
  }

  const double w_norm2 = w.squaredNorm();
  diag_out.dual_objective = alpha.sum() - 0.5 * w_norm2 - 0.5 * diag * alpha.squaredNorm();
  diag_out.slacks.resize(n);
  double loss_sum = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    double xi = std::max(0.0, 1.0 - labels[s] * margin(static_cast<Eigen::Index>(s)));
    diag_out.slacks[s] = xi;
    loss_sum += hinge ? xi : xi * xi;
  }
  diag_out.primal_objective = 0.5 * w_norm2 + config.c * loss_sum;

  LinearResult result;
  result.model.weights = w.head(d);
  result.model.bias = w(d);
  result.diagnostics = std::move(diag_out);
  return result;
}

double decision_value(const Eigen::Ref<const Eigen::VectorXd>& x, const LinearModel& model) {
  if (x.size() != model.weights.size()) {
    throw InvalidArgument(fmt::format("decision_value: input dimension {} but model expects {}",
                                      x.size(), model.weights.size()));
  }
  return model.weights.dot(x) + model.bias;
}

}  // namespace qtag
