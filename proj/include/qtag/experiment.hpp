#pragma once

// Experiment harness: seeded train/test split and k-fold partitions,
// train-only fitting of tf-idf and SVD, the three sweep tables (iterations x
// C, kernel x C, technique x loss), and report emission.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "qtag/ingest.hpp"
#include "qtag/multilabel.hpp"
#include "qtag/svd.hpp"
#include "qtag/svm.hpp"
#include "qtag/textpipe.hpp"
#include "qtag/vectorize.hpp"

namespace qtag {

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Seeded shuffle of 0..n-1; the first floor(ratio * n) indices train.
SplitIndices split(std::size_t n, double ratio, std::uint64_t seed);

/// Seeded shuffle then k contiguous validation folds whose sizes differ by
/// at most one (larger folds first).
std::vector<SplitIndices> kfold(std::size_t n, std::size_t k, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Representation: tf-idf + SVD fitted on a subset of documents.

struct RepresentationConfig {
  FilterPolicy policy;
  double variance_target = 0.9;
  std::size_t svd_rank_cap = 3000;
  SvdOptions svd;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Representation {
  TfIdfModel tfidf;
  SvdModel svd;
};

/// Fits the vocabulary, idf and V_k on `docs[rows]` only.
Representation fit_representation(std::span<const TokenDoc> docs,
                                  std::span<const std::size_t> rows,
                                  const RepresentationConfig& config);

/// Concept-space features of `docs[rows]`, one row per document.
Eigen::MatrixXd featurize(std::span<const TokenDoc> docs, std::span<const std::size_t> rows,
                          const Representation& rep);

// ---------------------------------------------------------------------------
// Classifier choice shared by the train verb and the sweeps.

enum class Technique { ovr, crammer_singer };
std::string_view to_string(Technique t);
Technique parse_technique(std::string_view name);

/// "linear", "rbf", "sigmoid", or "polyN" (polynomial of degree N).
KernelSpec parse_kernel_choice(std::string_view name, std::size_t n_features);

struct ClassifierSpec {
  Technique technique = Technique::ovr;
  /// ovr only: true trains each class with linear DCD, false with kernel SMO.
  bool linear_solver = false;
  std::string kernel = "rbf";
  double c = 1.0;
  int iterations = 10000;
  Loss loss = Loss::hinge;
  double tolerance = 1e-3;
  double cs_margin = 0.0;
  std::uint64_t seed = 0;
};

using Classifier = std::variant<OvrModel, CsLabelModel>;

struct TrainedClassifier {
  Classifier model;
  std::vector<TrainingDiagnostics> diagnostics;
  bool converged() const;
};

TrainedClassifier train_classifier(const Eigen::MatrixXd& features,
                                   std::span<const LabelSet> label_sets,
                                   const LabelCatalog& catalog, const ClassifierSpec& spec);

std::vector<LabelSet> predict_all(const Eigen::MatrixXd& features, const Classifier& model);

// ---------------------------------------------------------------------------
// Corpus loading shared by every verb.

struct CorpusOptions {
  std::filesystem::path posts_path;
  std::optional<std::filesystem::path> tags_path;
  std::size_t n_posts = 0;  // 0 keeps every post
  std::size_t k_top_tags = 10;
  bool strict = false;
};

struct PreparedCorpus {
  std::size_t n_parsed = 0;
  std::vector<RecordError> record_errors;
  LabelCatalog catalog;
  std::vector<TokenDoc> docs;
  std::vector<LabelSet> labels;
};

PreparedCorpus prepare_corpus(const CorpusOptions& options, const PipelineConfig& pipeline);

// ---------------------------------------------------------------------------
// Experiment.

struct ExperimentConfig {
  CorpusOptions corpus;
  std::filesystem::path output_dir = "experiment_out";
  std::optional<std::filesystem::path> stopwords_path;
  std::vector<std::string> preserve_terms;
  bool enable_stemming = true;
  bool enable_lemmatization = false;

  double split_ratio = 0.8;
  std::size_t kfold_k = 5;
  bool cross_validate = true;
  double variance_target = 0.9;
  std::size_t svd_rank_cap = 3000;
  std::size_t min_doc_freq = 2;
  double max_doc_ratio = 0.95;
  double svd_tolerance = 1e-8;

  /// iterations x C table (kernel SVC, one-vs-rest).
  std::string sweep_kernel = "rbf";
  std::vector<int> iteration_grid = {200, 400, 600, 800, 1000};
  /// kernel x C table at fixed_iterations.
  std::vector<std::string> kernel_grid = {"rbf", "linear", "poly2", "poly3", "sigmoid"};
  std::vector<double> c_grid = {1000.0, 0.001};
  int fixed_iterations = 10000;
  /// technique x loss table (linear SVC) at technique_c and fixed_iterations.
  std::vector<Technique> technique_grid = {Technique::ovr, Technique::crammer_singer};
  std::vector<Loss> loss_grid = {Loss::hinge, Loss::squared_hinge};
  double technique_c = 0.001;

  double tolerance = 1e-3;
  double cs_margin = 0.0;
  std::uint64_t seed = 42;

  void validate() const;
  PipelineConfig pipeline() const;
  RepresentationConfig representation(std::uint64_t seed) const;
};

enum class SweepTable { iterations, kernel, technique };
std::string_view to_string(SweepTable t);

struct CellSpec {
  SweepTable table = SweepTable::iterations;
  ClassifierSpec classifier;

  /// Row and column keys as printed in the table.
  std::string row_key() const;
  std::string column_key() const;
};

struct CellResult {
  CellSpec spec;
  bool ok = false;
  std::string error;
  EvalReport train;
  EvalReport test;
  std::vector<double> fold_accuracy;
  double cv_accuracy = 0.0;
  bool converged = false;
  int max_iterations_used = 0;
  double wall_seconds = 0.0;  // not part of the deterministic record
};

struct RunRecord {
  ExperimentConfig config;
  std::size_t n_parsed = 0;
  std::size_t n_record_errors = 0;
  std::size_t n_posts = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  LabelCatalog catalog;
  std::size_t vocabulary_size = 0;
  std::size_t svd_rank = 0;
  double retained_variance = 0.0;
  Representation representation;
  std::vector<CellResult> cells;
  std::vector<std::string> notes;
  /// Output file names, relative to the output directory.
  std::vector<std::string> artifacts;

  bool all_converged() const;
};

/// Every grid cell in enumeration order: iterations table (iteration-major),
/// kernel table (kernel-major), technique table (technique-major).
std::vector<CellSpec> enumerate_cells(const ExperimentConfig& config);

/// Loads and preprocesses the corpus, fits tf-idf/SVD on the training split
/// (and per fold on the fold's training part), then trains and evaluates
/// every cell. A failing cell is recorded and the rest continue.
RunRecord run_experiment(const ExperimentConfig& config);

/// Writes the sweep tables (`<table>_train.csv`, `<table>_test.csv`),
/// `cells.csv`, `run_record.json`, `tfidf.txt`, `svd.txt` and the
/// non-deterministic `timings.log` into `dir`; fills record.artifacts.
void emit_tables(RunRecord& record, const std::filesystem::path& dir);

/// Deterministic JSON form of the record (no wall times, no output path).
void write_run_record(std::ostream& out, const RunRecord& record);

/// RFC-4180 field quoting.
std::string csv_field(std::string_view value);

}  // namespace qtag
