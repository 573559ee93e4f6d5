#pragma once

// Plain-text persistence of fitted models. Every real is written with 17
// significant digits so a save/load round trip reproduces the model exactly.
// Each block starts with a `qtag-<kind> 1` header line; readers throw
// DataError on anything unexpected.

#include <filesystem>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>

#include "qtag/multilabel.hpp"
#include "qtag/svd.hpp"
#include "qtag/svm.hpp"
#include "qtag/textpipe.hpp"
#include "qtag/vectorize.hpp"

namespace qtag {

void write_tfidf(std::ostream& out, const TfIdfModel& model);
TfIdfModel read_tfidf(std::istream& in);

void write_svd(std::ostream& out, const SvdModel& model);
SvdModel read_svd(std::istream& in);

void write_binary_svm(std::ostream& out, const BinarySvmModel& model);
BinarySvmModel read_binary_svm(std::istream& in);

void write_linear(std::ostream& out, const LinearModel& model);
LinearModel read_linear(std::istream& in);

void write_cs(std::ostream& out, const CsModel& model);
CsModel read_cs(std::istream& in);

void write_ovr(std::ostream& out, const OvrModel& model);
OvrModel read_ovr(std::istream& in);

void write_cs_labels(std::ostream& out, const CsLabelModel& model);
CsLabelModel read_cs_labels(std::istream& in);

/// Stopwords, preserve terms, switches and the lemmatizer exception table.
void write_pipeline(std::ostream& out, const PipelineConfig& config);
PipelineConfig read_pipeline(std::istream& in);

/// Everything `predict` needs to tag new text.
struct ModelBundle {
  PipelineConfig pipeline;
  TfIdfModel tfidf;
  SvdModel svd;
  std::variant<OvrModel, CsLabelModel> classifier;
};

/// Writes pipeline.txt, tfidf.txt, svd.txt and classifier.txt into `dir`
/// (created if missing).
void save_bundle(const std::filesystem::path& dir, const ModelBundle& bundle);
ModelBundle load_bundle(const std::filesystem::path& dir);

/// Full text pipeline for one post: tokens -> tf-idf -> concept space ->
/// label set.
LabelSet predict_post(const CleanPost& post, const ModelBundle& bundle);

/// Serialized form as a string (used to compare fitted models byte for
/// byte).
template <typename Model, typename Writer>
std::string to_text(const Model& model, Writer writer) {
  std::ostringstream out;
  writer(out, model);
  return out.str();
}

}  // namespace qtag
