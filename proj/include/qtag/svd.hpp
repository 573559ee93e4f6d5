#pragma once

// Truncated SVD of the document-term matrix and projection into concept
// space (x -> x * V_k).

#include <cstdint>
#include <span>

#include <Eigen/Dense>

#include "qtag/vectorize.hpp"

namespace qtag {

struct SvdModel {
  Eigen::VectorXd singular_values;  // descending, strictly positive
  Eigen::MatrixXd right_vectors;    // n_terms x rank, orthonormal columns
  std::size_t source_rows = 0;
  std::size_t source_cols = 0;
  double retained_variance = 1.0;

  std::size_t rank() const { return static_cast<std::size_t>(singular_values.size()); }
  std::size_t n_terms() const { return source_cols; }
};

struct SvdOptions {
  enum class Method { automatic, dense, randomized };
  Method method = Method::automatic;
  /// automatic uses the dense solver when min(m, n) is at most this.
  std::size_t dense_threshold = 64;
  int power_iterations = 4;
  int oversampling = 10;
  /// Extra subspace iterations allowed when the residual check fails.
  int max_refinement_iterations = 300;
  /// Accepted residual max_i ||M v_i - s_i u_i|| / s_1.
  double residual_tolerance = 1e-10;
};

/// Top-`max_rank` singular triplets of `matrix`. Singular values below
/// numerical rank (s_i <= s_1 * max(m, n) * eps) are not returned, so the
/// model rank can be smaller than `max_rank`. Right vectors are sign-fixed
/// so that each column's largest-magnitude entry is positive.
SvdModel truncated_svd(const TermDocMatrix& matrix, std::size_t max_rank, std::uint64_t seed,
                       const SvdOptions& options = {});

/// Smallest k whose energy sum_{i<=k} s_i^2 reaches `target_variance` of the
/// total. The total defaults to the sum over `singular_values`; pass the
/// squared Frobenius norm of the source matrix when the list is truncated.
std::size_t choose_rank(std::span<const double> singular_values, double target_variance,
                        double total_energy = 0.0);

/// Keeps the leading k triplets; retained_variance is recomputed against
/// `total_energy`.
SvdModel truncate(const SvdModel& model, std::size_t k, double total_energy);

Eigen::VectorXd project(const SparseVector& row, const SvdModel& model);
/// Projects every row of `matrix`; result is rows x rank.
Eigen::MatrixXd project_rows(const TermDocMatrix& matrix, const SvdModel& model);

}  // namespace qtag
