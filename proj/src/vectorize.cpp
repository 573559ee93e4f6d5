#include "qtag/vectorize.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_set>

#include <fmt/format.h>

#include "qtag/common.hpp"

namespace qtag {

void FilterPolicy::validate() const {
  if (!(max_doc_ratio > 0.0 && max_doc_ratio <= 1.0)) {
    throw InvalidArgument(fmt::format("max_doc_ratio must be in (0, 1], got {}", max_doc_ratio));
  }
}

Vocabulary::Vocabulary(std::vector<std::string> terms, std::vector<std::size_t> doc_freq,
                       std::size_t n_docs)
    : terms_(std::move(terms)), doc_freq_(std::move(doc_freq)), n_docs_(n_docs) {
  if (terms_.size() != doc_freq_.size()) {
    throw InvalidArgument("vocabulary: terms and doc_freq differ in length");
  }
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (doc_freq_[i] == 0 || doc_freq_[i] > n_docs_) {
      throw DataError(fmt::format("vocabulary: doc_freq of '{}' out of range", terms_[i]));
    }
    if (!index_.emplace(terms_[i], i).second) {
      throw DataError(fmt::format("vocabulary: duplicate term '{}'", terms_[i]));
    }
  }
}

std::ptrdiff_t Vocabulary::index_of(std::string_view term) const {
  auto it = index_.find(std::string(term));
  return it == index_.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
}

void TermDocMatrix::append_row(const SparseVector& row) {
  if (row.dim != n_cols_) {
    throw InvalidArgument(
        fmt::format("row dimension {} does not match matrix width {}", row.dim, n_cols_));
  }
  entries_.insert(entries_.end(), row.entries.begin(), row.entries.end());
  row_start_.push_back(entries_.size());
}

std::span<const SparseEntry> TermDocMatrix::row(std::size_t i) const {
  return std::span<const SparseEntry>(entries_).subspan(row_start_[i],
                                                        row_start_[i + 1] - row_start_[i]);
}

double TermDocMatrix::frobenius_squared() const {
  double sum = 0.0;
  for (const auto& e : entries_) sum += e.value * e.value;
  return sum;
}

TfIdfModel fit_tfidf(std::span<const TokenDoc> corpus, const FilterPolicy& policy) {
  policy.validate();
  if (corpus.empty()) throw InvalidArgument("fit_tfidf: empty corpus");

  std::vector<std::string> order;  // first-occurrence order
  std::unordered_map<std::string, std::size_t> df;
  for (const auto& doc : corpus) {
    std::unordered_set<std::string_view> seen;
    for (const auto& token : doc.tokens) {
      if (!seen.insert(token).second) continue;
      auto [it, inserted] = df.emplace(token, 0);
      if (inserted) order.push_back(token);
      ++it->second;
    }
  }

  const auto n = static_cast<double>(corpus.size());
  std::vector<std::string> terms;
  std::vector<std::size_t> freqs;
  for (auto& term : order) {
    std::size_t f = df[term];
    if (f < policy.min_doc_freq) continue;
    if (static_cast<double>(f) / n > policy.max_doc_ratio) continue;
    terms.push_back(std::move(term));
    freqs.push_back(f);
  }
  if (terms.empty()) {
    throw DataError(fmt::format(
        "tf-idf filter (min_doc_freq={}, max_doc_ratio={}) left an empty vocabulary",
        policy.min_doc_freq, policy.max_doc_ratio));
  }

  TfIdfModel model;
  model.policy = policy;
  model.idf.reserve(terms.size());
  for (std::size_t f : freqs) model.idf.push_back(std::log(n / static_cast<double>(f)));
  model.vocabulary = Vocabulary(std::move(terms), std::move(freqs), corpus.size());
  return model;
}

double term_frequency(std::string_view term, const TokenDoc& doc) {
  if (doc.tokens.empty()) throw InvalidArgument("term_frequency: empty document");
  std::map<std::string_view, std::size_t> counts;
  for (const auto& t : doc.tokens) ++counts[t];
  std::size_t max_f = 0;
  for (const auto& [t, c] : counts) max_f = std::max(max_f, c);
  auto it = counts.find(term);
  if (it == counts.end()) return 0.0;
  return 0.5 + 0.5 * static_cast<double>(it->second) / static_cast<double>(max_f);
}

SparseVector transform(const TokenDoc& doc, const TfIdfModel& model) {
  const auto& vocab = model.vocabulary;
  SparseVector row{vocab.size(), {}};
  if (doc.tokens.empty()) return row;

  // max_f runs over every token of the document, in vocabulary or not.
  std::map<std::string_view, std::size_t> counts;
  for (const auto& t : doc.tokens) ++counts[t];
  std::size_t max_f = 0;
  for (const auto& [t, c] : counts) max_f = std::max(max_f, c);

  for (const auto& [term, f] : counts) {
    auto col = vocab.index_of(term);
    if (col < 0) continue;
    double tf = 0.5 + 0.5 * static_cast<double>(f) / static_cast<double>(max_f);
    double w = tf * model.idf[static_cast<std::size_t>(col)];
    if (w != 0.0) row.entries.push_back({static_cast<std::size_t>(col), w});
  }
  std::sort(row.entries.begin(), row.entries.end(),
            [](const SparseEntry& a, const SparseEntry& b) { return a.col < b.col; });
  return row;
}

TermDocMatrix build_matrix(std::span<const TokenDoc> corpus, const TfIdfModel& model) {
  TermDocMatrix m(model.vocabulary.size());
  for (const auto& doc : corpus) m.append_row(transform(doc, model));
  return m;
}

void write_matrix(std::ostream& out, const TermDocMatrix& matrix) {
  out << matrix.rows() << ' ' << matrix.cols() << ' ' << matrix.nnz() << '\n';
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    for (const auto& e : matrix.row(r)) {
      out << r << ' ' << e.col << ' ' << format_real(e.value) << '\n';
    }
  }
}

}  // namespace qtag
