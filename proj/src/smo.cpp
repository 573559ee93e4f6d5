#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "qtag/common.hpp"
#include "qtag/svm.hpp"

namespace qtag {
namespace {

constexpr double kTau = 1e-12;  // curvature floor for non-PSD pairs (sigmoid)

void check_binary_labels(std::span<const int> labels, std::size_t n) {
  if (labels.size() != n) {
    throw InvalidArgument(
        fmt::format("{} labels for {} training examples", labels.size(), n));
  }
  if (n < 2) throw InvalidArgument("need at least two training examples");
  bool pos = false;
  bool neg = false;
  for (int y : labels) {
    if (y == 1) {
      pos = true;
    } else if (y == -1) {
      neg = true;
    } else {
      throw InvalidArgument(fmt::format("binary labels must be +1/-1, got {}", y));
    }
  }
  if (!pos || !neg) throw InvalidArgument("training labels contain a single class");
}

class SmoSolver {
 public:
  SmoSolver(const GramMatrix& gram, std::span<const int> labels, const TrainConfig& config)
      : gram_(gram),
        n_(gram.size()),
        c_(config.c),
        y_(static_cast<Eigen::Index>(n_)),
        alpha_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_))),
        grad_(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n_), -1.0)) {
    for (std::size_t i = 0; i < n_; ++i) y_(idx(i)) = labels[i];
  }

  SmoResult solve(const TrainConfig& config) {
    TrainingDiagnostics diag;
    Eigen::VectorXd k_i;
    Eigen::VectorXd k_j;
    while (true) {
      auto [i, j, gap] = select_pair();
      diag.kkt_violation = gap;
      if (i < 0 || gap < config.tolerance) {
        diag.converged = true;
        break;
      }
      if (diag.iterations_used >= config.max_iterations) break;
      gram_.row(static_cast<std::size_t>(i), k_i);
      gram_.row(static_cast<std::size_t>(j), k_j);
      update_pair(i, j, k_i, k_j);
      ++diag.iterations_used;
    }
    return finish(std::move(diag));
  }

 private:
  const GramMatrix& gram_;
  std::size_t n_;
  double c_;
  Eigen::VectorXd y_;
  Eigen::VectorXd alpha_;
  Eigen::VectorXd grad_;  // Q alpha - e

  static Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

  bool at_upper(Eigen::Index t) const { return alpha_(t) >= c_; }
  bool at_lower(Eigen::Index t) const { return alpha_(t) <= 0.0; }
  bool in_up(Eigen::Index t) const {
    return y_(t) > 0 ? !at_upper(t) : !at_lower(t);
  }
  bool in_low(Eigen::Index t) const {
    return y_(t) > 0 ? !at_lower(t) : !at_upper(t);
  }

  // Maximal violating pair: i maximizes -y G over I_up, j minimizes it over
  // I_low. Returns i = -1 when either set is empty.
  std::tuple<Eigen::Index, Eigen::Index, double> select_pair() const {
    double gmax = -std::numeric_limits<double>::infinity();
    double gmin = std::numeric_limits<double>::infinity();
    Eigen::Index i = -1;
    Eigen::Index j = -1;
    for (Eigen::Index t = 0; t < idx(n_); ++t) {
      double v = -y_(t) * grad_(t);
      if (in_up(t) && v > gmax) {
        gmax = v;
        i = t;
      }
      if (in_low(t) && v < gmin) {
        gmin = v;
        j = t;
      }
    }
    if (i < 0 || j < 0) return {-1, -1, 0.0};
    return {i, j, gmax - gmin};
  }

  void update_pair(Eigen::Index i, Eigen::Index j, const Eigen::VectorXd& k_i,
                   const Eigen::VectorXd& k_j) {
    const double old_i = alpha_(i);
    const double old_j = alpha_(j);
    const double kii = gram_.diagonal(static_cast<std::size_t>(i));
    const double kjj = gram_.diagonal(static_cast<std::size_t>(j));
    const double kij = k_i(j);
    double& ai = alpha_(i);
    double& aj = alpha_(j);

    if (y_(i) != y_(j)) {
      double quad = kii + kjj - 2.0 * kij;
      if (quad <= 0.0) quad = kTau;
      double delta = (-grad_(i) - grad_(j)) / quad;
      double diff = ai - aj;
      ai += delta;
      aj += delta;
      if (diff > 0.0) {
        if (aj < 0.0) {
          aj = 0.0;
          ai = diff;
        }
      } else if (ai < 0.0) {
        ai = 0.0;
        aj = -diff;
      }
      if (diff > 0.0) {
        if (ai > c_) {
          ai = c_;
          aj = c_ - diff;
        }
      } else if (aj > c_) {
        aj = c_;
        ai = c_ + diff;
      }
    } else {
      double quad = kii + kjj - 2.0 * kij;
      if (quad <= 0.0) quad = kTau;
      double delta = (grad_(i) - grad_(j)) / quad;
      double sum = ai + aj;
      ai -= delta;
      aj += delta;
      if (sum > c_) {
        if (ai > c_) {
          ai = c_;
          aj = sum - c_;
        }
      } else if (aj < 0.0) {
        aj = 0.0;
        ai = sum;
      }
      if (sum > c_) {
        if (aj > c_) {
          aj = c_;
          ai = sum - c_;
        }
      } else if (ai < 0.0) {
        ai = 0.0;
        aj = sum;
      }
    }

    // G_t += Q_ti dA_i + Q_tj dA_j with Q_ts = y_t y_s K_ts.
    const double di = (ai - old_i) * y_(i);
    const double dj = (aj - old_j) * y_(j);
    grad_.array() += y_.array() * (k_i.array() * di + k_j.array() * dj);
  }

  double compute_intercept() const {
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double sum_free = 0.0;
    int n_free = 0;
    for (Eigen::Index t = 0; t < idx(n_); ++t) {
      double yg = y_(t) * grad_(t);
      if (at_upper(t)) {
        if (y_(t) < 0) {
          ub = std::min(ub, yg);
        } else {
          lb = std::max(lb, yg);
        }
      } else if (at_lower(t)) {
        if (y_(t) > 0) {
          ub = std::min(ub, yg);
        } else {
          lb = std::max(lb, yg);
        }
      } else {
        ++n_free;
        sum_free += yg;
      }
    }
    double r = n_free > 0 ? sum_free / n_free : (ub + lb) / 2.0;
    return -r;
  }

  SmoResult finish(TrainingDiagnostics diag) const {
    SmoResult result;
    const double b = compute_intercept();
    // alpha' Q alpha = alpha' (G + e)
    const double quad = alpha_.dot(grad_ + Eigen::VectorXd::Ones(idx(n_)));
    diag.dual_objective = alpha_.sum() - 0.5 * quad;
    diag.slacks.resize(n_);
    double slack_sum = 0.0;
    for (std::size_t t = 0; t < n_; ++t) {
      double xi = std::max(0.0, -grad_(idx(t)) - y_(idx(t)) * b);
      diag.slacks[t] = xi;
      slack_sum += xi;
    }
    diag.primal_objective = 0.5 * quad + c_ * slack_sum;
    result.diagnostics = std::move(diag);

    BinarySvmModel& model = result.model;
    model.kernel = gram_.kernel();
    model.intercept = b;
    const Eigen::MatrixXd& x = gram_.features();
    for (std::size_t t = 0; t < n_; ++t) {
      if (alpha_(idx(t)) > 0.0) {
        model.support_indices.push_back(t);
        model.alphas.push_back(alpha_(idx(t)));
        model.support_labels.push_back(static_cast<int>(y_(idx(t))));
      }
    }
    model.support_vectors.resize(static_cast<Eigen::Index>(model.support_indices.size()),
                                 x.cols());
    for (std::size_t s = 0; s < model.support_indices.size(); ++s) {
      model.support_vectors.row(idx(s)) = x.row(idx(model.support_indices[s]));
    }
    return result;
  }
};

}  // namespace

SmoResult train_svc_smo(const Eigen::MatrixXd& features, std::span<const int> labels,
                        const KernelSpec& kernel, const TrainConfig& config) {
  check_binary_labels(labels, static_cast<std::size_t>(features.rows()));
  GramMatrix gram(features, kernel);
  return train_svc_smo(gram, labels, config);
}

SmoResult train_svc_smo(const GramMatrix& gram, std::span<const int> labels,
                        const TrainConfig& config) {
  config.validate();
  check_binary_labels(labels, gram.size());
  SmoSolver solver(gram, labels, config);
  return solver.solve(config);
}

double decision_value(const Eigen::Ref<const Eigen::VectorXd>& x, const BinarySvmModel& model) {
  if (static_cast<std::size_t>(x.size()) != model.dim()) {
    throw InvalidArgument(fmt::format("decision_value: input dimension {} but model expects {}",
                                      x.size(), model.dim()));
  }
  double sum = model.intercept;
  for (std::size_t s = 0; s < model.alphas.size(); ++s) {
    sum += model.support_labels[s] * model.alphas[s] *
           kernel_eval(model.support_vectors.row(static_cast<Eigen::Index>(s)).transpose(), x,
                       model.kernel);
  }
  return sum;
}

}  // namespace qtag
