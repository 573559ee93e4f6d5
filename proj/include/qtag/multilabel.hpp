#pragma once

// One-vs-rest and Crammer-Singer label-set prediction, plus the multi-label
// evaluation metrics (Jaccard accuracy, set precision/recall, exact match).

#include <ostream>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "qtag/ingest.hpp"
#include "qtag/svm.hpp"

namespace qtag {

using LabelSet = std::set<std::string>;

enum class BinaryTrainer { kernel_svc, linear_svc };

struct OvrTrainer {
  BinaryTrainer kind = BinaryTrainer::linear_svc;
  KernelSpec kernel;  // kernel_svc only
  TrainConfig config;
};

struct DecisionRule {
  double threshold = 0.0;
  bool fallback_top1 = true;
};

using BinaryMember = std::variant<BinarySvmModel, LinearModel>;

struct OvrModel {
  std::vector<std::string> classes;
  std::vector<BinaryMember> members;
  DecisionRule rule;

  std::size_t dim() const;
  /// One decision value per class, catalog order.
  Eigen::VectorXd decision_values(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

struct OvrTraining {
  OvrModel model;
  std::vector<TrainingDiagnostics> diagnostics;  // per class
};

/// Trains one binary member per catalog class (y = +1 iff the class is in
/// the example's label set). Throws DataError naming a class that has no
/// positive or no negative example.
OvrTraining train_ovr(const Eigen::MatrixXd& features, std::span<const LabelSet> label_sets,
                      const LabelCatalog& catalog, const OvrTrainer& trainer,
                      const DecisionRule& rule = {});

/// {c : f_c(x) > threshold}; if empty and the fallback is on, the single
/// best class (first in catalog order on ties).
LabelSet predict_labels(const Eigen::Ref<const Eigen::VectorXd>& x, const OvrModel& model);

struct CsLabelModel {
  std::vector<std::string> classes;
  CsModel model;
  double margin = 0.0;
};

struct CsTraining {
  CsLabelModel model;
  TrainingDiagnostics diagnostics;
};

/// Crammer-Singer on multi-label data: each (example, tag) pair becomes one
/// single-label training example.
CsTraining train_cs_multilabel(const Eigen::MatrixXd& features,
                               std::span<const LabelSet> label_sets, const LabelCatalog& catalog,
                               const TrainConfig& config, double margin = 0.0);

/// {c : score_c >= max_score - margin}.
LabelSet predict_labels_cs(const Eigen::Ref<const Eigen::VectorXd>& x, const CsLabelModel& model);

struct EvalReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double percentage_error = 0.0;
  double subset_accuracy = 0.0;
  std::size_t n_examples = 0;
};

/// Example-averaged Jaccard accuracy, precision (|Y^Z|/|Z|, 0 for empty Z)
/// and recall (|Y^Z|/|Y|); percentage_error = (1 - accuracy) * 100.
EvalReport evaluate(std::span<const LabelSet> truths, std::span<const LabelSet> predictions);

/// CSV with header `metric,value`.
void write_report_csv(std::ostream& out, const EvalReport& report);

}  // namespace qtag
