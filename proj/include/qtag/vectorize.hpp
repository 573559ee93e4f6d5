#pragma once

// Vocabulary, augmented-tf / log-idf weighting and the sparse document-term
// matrix.

#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "qtag/textpipe.hpp"

namespace qtag {

/// Document-frequency bounds deciding which terms enter the vocabulary.
struct FilterPolicy {
  std::size_t min_doc_freq = 2;
  double max_doc_ratio = 0.95;  // in (0, 1]

  void validate() const;
};

class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<std::string> terms, std::vector<std::size_t> doc_freq,
             std::size_t n_docs);

  std::size_t size() const { return terms_.size(); }
  std::size_t n_docs() const { return n_docs_; }
  const std::vector<std::string>& terms() const { return terms_; }
  const std::vector<std::size_t>& doc_freq() const { return doc_freq_; }
  /// Column index of `term`, or -1 when out of vocabulary.
  std::ptrdiff_t index_of(std::string_view term) const;

 private:
  std::vector<std::string> terms_;
  std::vector<std::size_t> doc_freq_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t n_docs_ = 0;
};

struct TfIdfModel {
  Vocabulary vocabulary;
  std::vector<double> idf;
  FilterPolicy policy;
};

struct SparseEntry {
  std::size_t col = 0;
  double value = 0.0;

  friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

/// Sparse row vector with an explicit dimension; entries sorted by column.
struct SparseVector {
  std::size_t dim = 0;
  std::vector<SparseEntry> entries;
};

/// Row-compressed document-term matrix.
class TermDocMatrix {
 public:
  explicit TermDocMatrix(std::size_t n_cols = 0) : n_cols_(n_cols), row_start_{0} {}

  /// Appends a row; its dimension must equal cols().
  void append_row(const SparseVector& row);

  std::size_t rows() const { return row_start_.size() - 1; }
  std::size_t cols() const { return n_cols_; }
  std::size_t nnz() const { return entries_.size(); }
  std::span<const SparseEntry> row(std::size_t i) const;
  /// Sum of squared entries.
  double frobenius_squared() const;

 private:
  std::size_t n_cols_;
  std::vector<std::size_t> row_start_;
  std::vector<SparseEntry> entries_;
};

/// Builds the vocabulary (columns in first-occurrence order) and idf =
/// ln(N / df). Throws DataError when the filter leaves no terms.
TfIdfModel fit_tfidf(std::span<const TokenDoc> corpus, const FilterPolicy& policy = {});

/// Augmented term frequency 0.5 + 0.5 f / max_f, or 0 when the term is
/// absent. Throws InvalidArgument for an empty document.
double term_frequency(std::string_view term, const TokenDoc& doc);

/// tf * idf for every in-vocabulary term of `doc`; zero weights are omitted.
SparseVector transform(const TokenDoc& doc, const TfIdfModel& model);

TermDocMatrix build_matrix(std::span<const TokenDoc> corpus, const TfIdfModel& model);

/// `n_rows n_cols nnz` header then one `row col weight` triple per line.
void write_matrix(std::ostream& out, const TermDocMatrix& matrix);

}  // namespace qtag
