#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "qtag/model_io.hpp"
#include "qtag/svd.hpp"
#include "support/matrices.hpp"

using namespace qtag;
using testutil::gaussian;
using testutil::to_term_doc;

namespace {

SvdOptions randomized() {
  SvdOptions o;
  o.method = SvdOptions::Method::randomized;
  return o;
}

void check_invariants(const SvdModel& model, const Eigen::MatrixXd& dense) {
  const auto k = static_cast<Eigen::Index>(model.rank());
  Eigen::MatrixXd gram = model.right_vectors.transpose() * model.right_vectors;
  EXPECT_LE((gram - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff(), 1e-8);
  for (Eigen::Index i = 0; i + 1 < k; ++i) {
    EXPECT_GE(model.singular_values(i), model.singular_values(i + 1));
  }
  EXPECT_GT(model.singular_values(k - 1), 0.0);
  Eigen::MatrixXd proj = project_rows(to_term_doc(dense), model);
  EXPECT_NEAR(proj.norm(), model.singular_values.norm(), 1e-6 * model.singular_values.norm());
}

}  // namespace

TEST(Svd, Identity) {
  auto model = truncated_svd(to_term_doc(Eigen::MatrixXd::Identity(2, 2)), 2, 1);
  ASSERT_EQ(model.rank(), 2u);
  EXPECT_NEAR(model.singular_values(0), 1.0, 1e-14);
  EXPECT_NEAR(model.singular_values(1), 1.0, 1e-14);
}

TEST(Svd, DiagonalIsSorted) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
  d(0, 0) = 3.0;
  d(1, 1) = 4.0;
  auto model = truncated_svd(to_term_doc(d), 2, 1);
  EXPECT_NEAR(model.singular_values(0), 4.0, 1e-14);
  EXPECT_NEAR(model.singular_values(1), 3.0, 1e-14);
  // Sign fix: the largest-magnitude entry of each column is positive.
  EXPECT_NEAR(model.right_vectors(1, 0), 1.0, 1e-14);
  EXPECT_NEAR(model.right_vectors(0, 1), 1.0, 1e-14);
}

TEST(Svd, LowRankProductAgainstOracle) {
  Rng rng(17);
  Eigen::MatrixXd a = gaussian(6, 2, rng) * gaussian(2, 5, rng);
  auto model = truncated_svd(to_term_doc(a), 5, 3);
  ASSERT_EQ(model.rank(), 2u);  // numerical rank drop
  Eigen::VectorXd oracle = oracle::singular_values_via_gram(a);
  for (Eigen::Index i = 0; i < 2; ++i) {
    EXPECT_NEAR(model.singular_values(i), oracle(i), 1e-8 * oracle(0));
  }
  Eigen::MatrixXd v = model.right_vectors;
  Eigen::MatrixXd recon = a * v * v.transpose();
  EXPECT_LE((recon - a).norm(), 1e-8 * model.singular_values(0));
  check_invariants(model, a);
}

TEST(Svd, RandomizedMatchesOracle) {
  Rng rng(23);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::MatrixXd a = gaussian(90, 70, rng);
    auto model = truncated_svd(to_term_doc(a), 20, 100 + trial, randomized());
    Eigen::VectorXd oracle = oracle::singular_values_via_gram(a);
    ASSERT_EQ(model.rank(), 20u);
    for (Eigen::Index i = 0; i < 20; ++i) {
      EXPECT_NEAR(model.singular_values(i), oracle(i), 1e-8 * oracle(i)) << i;
    }
    check_invariants(model, a);
  }
}

TEST(Svd, RandomizedExactLowRank) {
  Rng rng(29);
  Eigen::MatrixXd a = gaussian(120, 8, rng) * gaussian(8, 100, rng);
  auto model = truncated_svd(to_term_doc(a), 30, 5, randomized());
  EXPECT_EQ(model.rank(), 8u);
  Eigen::MatrixXd v = model.right_vectors;
  EXPECT_LE((a * v * v.transpose() - a).norm(), 1e-8 * model.singular_values(0));
  EXPECT_NEAR(model.retained_variance, 1.0, 1e-12);
}

TEST(Svd, Deterministic) {
  Rng rng(31);
  Eigen::MatrixXd a = gaussian(80, 75, rng);
  auto m = to_term_doc(a);
  auto x = truncated_svd(m, 10, 9, randomized());
  auto y = truncated_svd(m, 10, 9, randomized());
  EXPECT_EQ(to_text(x, write_svd), to_text(y, write_svd));
}

TEST(Svd, Errors) {
  EXPECT_THROW(truncated_svd(to_term_doc(Eigen::MatrixXd::Zero(3, 3)), 2, 1), DataError);
  EXPECT_THROW(truncated_svd(to_term_doc(Eigen::MatrixXd::Identity(3, 3)), 4, 1),
               InvalidArgument);
  EXPECT_THROW(truncated_svd(to_term_doc(Eigen::MatrixXd::Identity(3, 3)), 0, 1),
               InvalidArgument);
}

TEST(Svd, ConvergenceFailureCarriesResidual) {
  Rng rng(37);
  Eigen::MatrixXd a = gaussian(100, 90, rng);
  SvdOptions o = randomized();
  o.power_iterations = 0;
  o.oversampling = 0;
  o.max_refinement_iterations = 0;
  o.residual_tolerance = 1e-15;
  try {
    truncated_svd(to_term_doc(a), 20, 1, o);
    FAIL();
  } catch (const ConvergenceError& e) {
    EXPECT_GT(e.residual(), 1e-15);
  }
}

TEST(ChooseRank, Examples) {
  std::vector<double> s{4.0, 3.0};
  EXPECT_EQ(choose_rank(s, 0.9), 2u);
  EXPECT_EQ(choose_rank(s, 0.64), 1u);
  EXPECT_EQ(choose_rank(s, 0.65), 2u);
  EXPECT_EQ(choose_rank(s, 1.0), 2u);
  std::vector<double> one{2.5};
  EXPECT_EQ(choose_rank(one, 0.1), 1u);
  EXPECT_EQ(choose_rank(one, 1.0), 1u);
  std::vector<double> with_zero{2.0, 1.0, 0.0};
  EXPECT_EQ(choose_rank(with_zero, 1.0), 2u);
  EXPECT_THROW(choose_rank(std::vector<double>{}, 0.9), InvalidArgument);
  EXPECT_THROW(choose_rank(s, 0.0), InvalidArgument);
}

TEST(ChooseRank, AgainstExternalTotal) {
  // Listed energy 25 out of 50: even every listed value reaches only half.
  std::vector<double> s{4.0, 3.0};
  EXPECT_EQ(choose_rank(s, 0.3, 50.0), 1u);
  EXPECT_EQ(choose_rank(s, 0.4, 50.0), 2u);
  EXPECT_EQ(choose_rank(s, 0.9, 50.0), 2u);
}

TEST(Truncate, KeepsLeadingTriplets) {
  Rng rng(41);
  Eigen::MatrixXd a = gaussian(10, 8, rng);
  auto m = to_term_doc(a);
  auto full = truncated_svd(m, 8, 1);
  auto t = truncate(full, 3, m.frobenius_squared());
  EXPECT_EQ(t.rank(), 3u);
  EXPECT_EQ(t.right_vectors, full.right_vectors.leftCols(3));
  EXPECT_NEAR(t.retained_variance, full.singular_values.head(3).squaredNorm() / a.squaredNorm(),
              1e-14);
  EXPECT_THROW(truncate(full, 9, 1.0), InvalidArgument);
}

TEST(Project, Examples) {
  Rng rng(43);
  Eigen::MatrixXd a = gaussian(12, 7, rng);
  auto m = to_term_doc(a);
  auto model = truncated_svd(m, 5, 1);
  auto z = project(SparseVector{7, {}}, model);
  EXPECT_EQ(z, Eigen::VectorXd::Zero(5));
  for (Eigen::Index j = 0; j < 5; ++j) {
    SparseVector v{7, {}};
    for (Eigen::Index i = 0; i < 7; ++i) v.entries.push_back({static_cast<std::size_t>(i), model.right_vectors(i, j)});
    auto e = project(v, model);
    for (Eigen::Index i = 0; i < 5; ++i) EXPECT_NEAR(e(i), i == j ? 1.0 : 0.0, 1e-8);
  }
  // Against U_k S_k from an independent dense factorization.
  Eigen::JacobiSVD<Eigen::MatrixXd> ref(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::MatrixXd proj = project_rows(m, model);
  for (Eigen::Index j = 0; j < 5; ++j) {
    Eigen::VectorXd us = ref.matrixU().col(j) * ref.singularValues()(j);
    double sign = us.dot(proj.col(j)) < 0 ? -1.0 : 1.0;
    EXPECT_LE((proj.col(j) - sign * us).cwiseAbs().maxCoeff(), 1e-6);
  }
  EXPECT_THROW(project(SparseVector{6, {}}, model), InvalidArgument);
  EXPECT_THROW(project_rows(TermDocMatrix(6), model), InvalidArgument);
}
