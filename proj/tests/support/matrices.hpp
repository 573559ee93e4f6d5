#pragma once

// Small helpers shared by the test binaries for building inputs.

#include <Eigen/Dense>

#include "qtag/common.hpp"
#include "qtag/vectorize.hpp"

namespace testutil {

inline qtag::TermDocMatrix to_term_doc(const Eigen::MatrixXd& dense) {
  qtag::TermDocMatrix m(static_cast<std::size_t>(dense.cols()));
  for (Eigen::Index r = 0; r < dense.rows(); ++r) {
    qtag::SparseVector row{static_cast<std::size_t>(dense.cols()), {}};
    for (Eigen::Index c = 0; c < dense.cols(); ++c) {
      if (dense(r, c) != 0.0) row.entries.push_back({static_cast<std::size_t>(c), dense(r, c)});
    }
    m.append_row(row);
  }
  return m;
}

inline Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, qtag::Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.normal();
  return m;
}

}  // namespace testutil
