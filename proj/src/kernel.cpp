#include <cmath>

#include <fmt/format.h>

#include "qtag/common.hpp"
#include "qtag/svm.hpp"

namespace qtag {

KernelSpec KernelSpec::with_defaults(KernelKind kind, std::size_t n_features, int degree) {
  KernelSpec spec;
  spec.kind = kind;
  spec.gamma = n_features > 0 ? 1.0 / static_cast<double>(n_features) : 1.0;
  spec.degree = degree;
  spec.coef0 = 0.0;
  return spec;
}

void KernelSpec::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw InvalidArgument(fmt::format("kernel gamma must be positive, got {}", gamma));
  }
  if (kind == KernelKind::polynomial && degree < 1) {
    throw InvalidArgument(fmt::format("polynomial degree must be >= 1, got {}", degree));
  }
  if (!std::isfinite(coef0)) throw InvalidArgument("kernel coef0 must be finite");
}

std::string_view to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::linear: return "linear";
    case KernelKind::rbf: return "rbf";
    case KernelKind::polynomial: return "polynomial";
    case KernelKind::sigmoid: return "sigmoid";
  }
  return "?";
}

KernelKind parse_kernel_kind(std::string_view name) {
  if (name == "linear") return KernelKind::linear;
  if (name == "rbf") return KernelKind::rbf;
  if (name == "polynomial" || name == "poly") return KernelKind::polynomial;
  if (name == "sigmoid") return KernelKind::sigmoid;
  throw InvalidArgument(fmt::format("unknown kernel '{}'", name));
}

std::string_view to_string(Loss loss) {
  return loss == Loss::hinge ? "hinge" : "squared_hinge";
}

Loss parse_loss(std::string_view name) {
  if (name == "hinge") return Loss::hinge;
  if (name == "squared_hinge") return Loss::squared_hinge;
  throw InvalidArgument(fmt::format("unknown loss '{}'", name));
}

void TrainConfig::validate() const {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw InvalidArgument(fmt::format("C must be positive, got {}", c));
  }
  if (!(tolerance > 0.0)) throw InvalidArgument("tolerance must be positive");
  if (max_iterations < 1) throw InvalidArgument("max_iterations must be positive");
}

double kernel_eval(const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& z, const KernelSpec& spec) {
  if (x.size() != z.size()) {
    throw InvalidArgument(
        fmt::format("kernel_eval: dimensions {} and {} differ", x.size(), z.size()));
  }
  switch (spec.kind) {
    case KernelKind::linear:
      return x.dot(z);
    case KernelKind::rbf:
      return std::exp(-spec.gamma * (x - z).squaredNorm());
    case KernelKind::polynomial:
      return std::pow(spec.gamma * x.dot(z) + spec.coef0, spec.degree);
    case KernelKind::sigmoid:
      return std::tanh(spec.gamma * x.dot(z) + spec.coef0);
  }
  return 0.0;
}

namespace {

// Kernel values of row i against all rows, given precomputed squared norms.
void kernel_row(const Eigen::MatrixXd& x, const Eigen::VectorXd& sq_norms,
                const KernelSpec& spec, Eigen::Index i, Eigen::VectorXd& out) {
  out.noalias() = x * x.row(i).transpose();
  switch (spec.kind) {
    case KernelKind::linear:
      break;
    case KernelKind::rbf:
      for (Eigen::Index k = 0; k < out.size(); ++k) {
        double d2 = std::max(0.0, sq_norms(i) + sq_norms(k) - 2.0 * out(k));
        out(k) = std::exp(-spec.gamma * d2);
      }
      out(i) = 1.0;
      break;
    case KernelKind::polynomial:
      for (Eigen::Index k = 0; k < out.size(); ++k) {
        out(k) = std::pow(spec.gamma * out(k) + spec.coef0, spec.degree);
      }
      break;
    case KernelKind::sigmoid:
      for (Eigen::Index k = 0; k < out.size(); ++k) {
        out(k) = std::tanh(spec.gamma * out(k) + spec.coef0);
      }
      break;
  }
}

}  // namespace

GramMatrix::GramMatrix(const Eigen::MatrixXd& features, const KernelSpec& spec,
                       std::size_t full_limit)
    : features_(&features), spec_(spec) {
  spec_.validate();
  if (!features.allFinite()) throw InvalidArgument("features contain non-finite values");
  const Eigen::Index n = features.rows();
  sq_norms_ = features.rowwise().squaredNorm();
  const Eigen::VectorXd& sq = sq_norms_;
  diagonal_.resize(n);
  if (static_cast<std::size_t>(n) <= full_limit) {
    values_.resize(n, n);
    Eigen::VectorXd r;
    for (Eigen::Index i = 0; i < n; ++i) {
      kernel_row(features, sq, spec_, i, r);
      values_.col(i) = r;
    }
    // Exact symmetry keeps SMO results independent of pair orientation.
    values_ = (0.5 * (values_ + values_.transpose())).eval();
    diagonal_ = values_.diagonal();
  } else {
    for (Eigen::Index i = 0; i < n; ++i) {
      diagonal_(i) = kernel_eval(features.row(i).transpose(), features.row(i).transpose(), spec_);
    }
  }
}

void GramMatrix::row(std::size_t i, Eigen::VectorXd& out) const {
  auto ii = static_cast<Eigen::Index>(i);
  if (stored()) {
    out = values_.col(ii);
    return;
  }
  kernel_row(*features_, sq_norms_, spec_, ii, out);
}

}  // namespace qtag
