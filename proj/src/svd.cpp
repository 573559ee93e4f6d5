#include "qtag/svd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SVD>
#include <Eigen/SparseCore>
#include <fmt/format.h>

#include "qtag/common.hpp"

namespace qtag {
namespace {

using SparseRowMajor = Eigen::SparseMatrix<double, Eigen::RowMajor>;

SparseRowMajor to_eigen(const TermDocMatrix& matrix) {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(matrix.nnz());
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    for (const auto& e : matrix.row(r)) {
      triplets.emplace_back(static_cast<int>(r), static_cast<int>(e.col), e.value);
    }
  }
  SparseRowMajor m(static_cast<Eigen::Index>(matrix.rows()),
                   static_cast<Eigen::Index>(matrix.cols()));
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& y) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
  return qr.householderQ() * Eigen::MatrixXd::Identity(y.rows(), y.cols());
}

// Flips each column so its largest-magnitude entry is positive; the first
// index wins ties.
void fix_signs(Eigen::MatrixXd& v) {
  for (Eigen::Index c = 0; c < v.cols(); ++c) {
    Eigen::Index best = 0;
    double best_abs = -1.0;
    for (Eigen::Index r = 0; r < v.rows(); ++r) {
      double a = std::abs(v(r, c));
      if (a > best_abs) {
        best_abs = a;
        best = r;
      }
    }
    if (v(best, c) < 0.0) v.col(c) = -v.col(c);
  }
}

// Number of leading values above the numerical-rank cutoff, capped at limit.
Eigen::Index numerical_rank(const Eigen::VectorXd& s, std::size_t m, std::size_t n,
                            std::size_t limit) {
  if (s.size() == 0 || !(s(0) > 0.0)) return 0;
  double cutoff = s(0) * static_cast<double>(std::max(m, n)) *
                  std::numeric_limits<double>::epsilon();
  Eigen::Index k = 0;
  while (k < s.size() && static_cast<std::size_t>(k) < limit && s(k) > cutoff) ++k;
  return k;
}

SvdModel finish(const Eigen::VectorXd& s, const Eigen::MatrixXd& v, Eigen::Index k,
                const TermDocMatrix& matrix) {
  SvdModel model;
  model.source_rows = matrix.rows();
  model.source_cols = matrix.cols();
  model.singular_values = s.head(k);
  model.right_vectors = v.leftCols(k);
  fix_signs(model.right_vectors);
  model.retained_variance = model.singular_values.squaredNorm() / matrix.frobenius_squared();
  model.retained_variance = std::min(model.retained_variance, 1.0);
  return model;
}

SvdModel dense_svd(const TermDocMatrix& matrix, std::size_t max_rank) {
  Eigen::MatrixXd dense = Eigen::MatrixXd(to_eigen(matrix));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(dense, Eigen::ComputeThinV);
  Eigen::VectorXd s = svd.singularValues();
  Eigen::Index k = numerical_rank(s, matrix.rows(), matrix.cols(), max_rank);
  return finish(s, svd.matrixV(), k, matrix);
}

SvdModel randomized_svd(const TermDocMatrix& matrix, std::size_t max_rank,
                        std::uint64_t seed, const SvdOptions& options) {
  const SparseRowMajor m = to_eigen(matrix);
  const Eigen::Index rows = m.rows();
  const Eigen::Index cols = m.cols();
  const Eigen::Index width = std::min<Eigen::Index>(
      static_cast<Eigen::Index>(max_rank) + options.oversampling, std::min(rows, cols));

  Rng rng(seed);
  Eigen::MatrixXd omega(cols, width);
  for (Eigen::Index c = 0; c < width; ++c) {
    for (Eigen::Index r = 0; r < cols; ++r) omega(r, c) = rng.normal();
  }

  Eigen::MatrixXd q = orthonormal_basis(m * omega);
  auto subspace_step = [&] {
    Eigen::MatrixXd z = orthonormal_basis(m.transpose() * q);
    q = orthonormal_basis(m * z);
  };
  for (int i = 0; i < options.power_iterations; ++i) subspace_step();

  double residual = std::numeric_limits<double>::infinity();
  for (int extra = 0;; ++extra) {
    // B = Q^T M, factored through its transpose: B^T = U S W^T gives M's
    // right vectors U and left vectors Q W.
    Eigen::MatrixXd bt = m.transpose() * q;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(bt, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& s = svd.singularValues();
    Eigen::Index k = numerical_rank(s, matrix.rows(), matrix.cols(), max_rank);
    if (k == 0) throw DataError("truncated_svd: matrix is numerically zero");

    Eigen::MatrixXd v = svd.matrixU().leftCols(k);
    Eigen::MatrixXd u = q * svd.matrixV().leftCols(k);
    Eigen::MatrixXd mv = m * v;
    residual = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) {
      residual = std::max(residual, (mv.col(i) - s(i) * u.col(i)).norm() / s(0));
    }
    if (residual <= options.residual_tolerance) return finish(s, svd.matrixU(), k, matrix);
    if (extra >= options.max_refinement_iterations) break;
    subspace_step();
  }
  throw ConvergenceError(
      fmt::format("truncated_svd: residual {:.3e} above tolerance {:.1e} after {} iterations",
                  residual, options.residual_tolerance,
                  options.power_iterations + options.max_refinement_iterations),
      residual);
}

}  // namespace

SvdModel truncated_svd(const TermDocMatrix& matrix, std::size_t max_rank, std::uint64_t seed,
                       const SvdOptions& options) {
  const std::size_t min_dim = std::min(matrix.rows(), matrix.cols());
  if (max_rank < 1 || max_rank > min_dim) {
    throw InvalidArgument(fmt::format("truncated_svd: max_rank {} outside [1, {}]", max_rank,
                                      min_dim));
  }
  if (matrix.frobenius_squared() == 0.0) {
    throw DataError("truncated_svd: matrix is all zero");
  }
  bool dense = options.method == SvdOptions::Method::dense ||
               (options.method == SvdOptions::Method::automatic &&
                min_dim <= options.dense_threshold);
  SvdModel model = dense ? dense_svd(matrix, max_rank)
                         : randomized_svd(matrix, max_rank, seed, options);
  if (model.rank() == 0) throw DataError("truncated_svd: matrix is numerically zero");
  return model;
}

std::size_t choose_rank(std::span<const double> singular_values, double target_variance,
                        double total_energy) {
  if (singular_values.empty()) throw InvalidArgument("choose_rank: no singular values");
  if (!(target_variance > 0.0 && target_variance <= 1.0)) {
    throw InvalidArgument("choose_rank: target variance must be in (0, 1]");
  }
  double listed = 0.0;
  for (double s : singular_values) listed += s * s;
  double total = total_energy > 0.0 ? std::max(total_energy, listed) : listed;
  // At target 1.0 every positive value is needed, which exact comparison
  // against a rounded total may miss.
  if (target_variance >= 1.0 && total == listed) {
    std::size_t positive = 0;
    for (double s : singular_values) positive += s > 0.0 ? 1 : 0;
    return std::max<std::size_t>(positive, 1);
  }
  double running = 0.0;
  for (std::size_t k = 0; k < singular_values.size(); ++k) {
    running += singular_values[k] * singular_values[k];
    if (running / total >= target_variance) return k + 1;
  }
  return singular_values.size();
}

SvdModel truncate(const SvdModel& model, std::size_t k, double total_energy) {
  if (k < 1 || k > model.rank()) {
    throw InvalidArgument(fmt::format("truncate: rank {} outside [1, {}]", k, model.rank()));
  }
  SvdModel out = model;
  auto kk = static_cast<Eigen::Index>(k);
  out.singular_values = model.singular_values.head(kk);
  out.right_vectors = model.right_vectors.leftCols(kk);
  if (total_energy > 0.0) {
    out.retained_variance = std::min(1.0, out.singular_values.squaredNorm() / total_energy);
  }
  return out;
}

Eigen::VectorXd project(const SparseVector& row, const SvdModel& model) {
  if (row.dim != model.n_terms()) {
    throw InvalidArgument(fmt::format("project: row dimension {} but model expects {}",
                                      row.dim, model.n_terms()));
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(model.right_vectors.cols());
  for (const auto& e : row.entries) {
    out += e.value * model.right_vectors.row(static_cast<Eigen::Index>(e.col)).transpose();
  }
  return out;
}

Eigen::MatrixXd project_rows(const TermDocMatrix& matrix, const SvdModel& model) {
  if (matrix.cols() != model.n_terms()) {
    throw InvalidArgument(fmt::format("project_rows: matrix width {} but model expects {}",
                                      matrix.cols(), model.n_terms()));
  }
  Eigen::MatrixXd out =
      Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(matrix.rows()), model.right_vectors.cols());
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    for (const auto& e : matrix.row(r)) {
      out.row(static_cast<Eigen::Index>(r)) +=
          e.value * model.right_vectors.row(static_cast<Eigen::Index>(e.col));
    }
  }
  return out;
}

}  // namespace qtag
