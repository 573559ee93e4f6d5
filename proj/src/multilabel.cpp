#include "qtag/multilabel.hpp"

#include <algorithm>
#include <optional>

#include <fmt/format.h>

#include "qtag/common.hpp"

namespace qtag {

std::size_t OvrModel::dim() const {
  if (members.empty()) return 0;
  return std::visit(
      [](const auto& m) -> std::size_t {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, LinearModel>) {
          return static_cast<std::size_t>(m.weights.size());
        } else {
          return m.dim();
        }
      },
      members.front());
}

Eigen::VectorXd OvrModel::decision_values(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  Eigen::VectorXd values(static_cast<Eigen::Index>(members.size()));
  for (std::size_t c = 0; c < members.size(); ++c) {
    values(static_cast<Eigen::Index>(c)) =
        std::visit([&](const auto& m) { return decision_value(x, m); }, members[c]);
  }
  return values;
}

OvrTraining train_ovr(const Eigen::MatrixXd& features, std::span<const LabelSet> label_sets,
                      const LabelCatalog& catalog, const OvrTrainer& trainer,
                      const DecisionRule& rule) {
  if (catalog.size() < 2) {
    throw InvalidArgument("one-vs-rest needs a catalog of at least two classes");
  }
  const auto n = static_cast<std::size_t>(features.rows());
  if (label_sets.size() != n) {
    throw InvalidArgument(
        fmt::format("{} label sets for {} training examples", label_sets.size(), n));
  }
  for (const auto& set : label_sets) {
    for (const auto& tag : set) {
      if (!catalog.index_of(tag)) {
        throw InvalidArgument(fmt::format("label '{}' is not in the catalog", tag));
      }
    }
  }

  std::vector<std::vector<int>> targets;
  for (const auto& cls : catalog.labels) {
    std::vector<int> y(n);
    std::size_t positives = 0;
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = label_sets[i].contains(cls) ? 1 : -1;
      positives += y[i] > 0 ? 1 : 0;
    }
    if (positives == 0 || positives == n) {
      throw DataError(fmt::format("class '{}' has no {} training examples", cls,
                                  positives == 0 ? "positive" : "negative"));
    }
    targets.push_back(std::move(y));
  }

  OvrTraining out;
  out.model.classes = catalog.labels;
  out.model.rule = rule;
  std::optional<GramMatrix> gram;
  if (trainer.kind == BinaryTrainer::kernel_svc) gram.emplace(features, trainer.kernel);
  for (const auto& y : targets) {
    if (gram) {
      auto r = train_svc_smo(*gram, y, trainer.config);
      out.model.members.emplace_back(std::move(r.model));
      out.diagnostics.push_back(std::move(r.diagnostics));
    } else {
      auto r = train_linear_dcd(features, y, trainer.config);
      out.model.members.emplace_back(std::move(r.model));
      out.diagnostics.push_back(std::move(r.diagnostics));
    }
  }
  return out;
}

LabelSet predict_labels(const Eigen::Ref<const Eigen::VectorXd>& x, const OvrModel& model) {
  if (static_cast<std::size_t>(x.size()) != model.dim()) {
    throw InvalidArgument(fmt::format("predict_labels: input dimension {} but model expects {}",
                                      x.size(), model.dim()));
  }
  Eigen::VectorXd values = model.decision_values(x);
  LabelSet out;
  for (std::size_t c = 0; c < model.classes.size(); ++c) {
    if (values(static_cast<Eigen::Index>(c)) > model.rule.threshold) out.insert(model.classes[c]);
  }
  if (out.empty() && model.rule.fallback_top1 && values.size() > 0) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < values.size(); ++c) {
      if (values(c) > values(best)) best = c;
    }
    out.insert(model.classes[static_cast<std::size_t>(best)]);
  }
  return out;
}

CsTraining train_cs_multilabel(const Eigen::MatrixXd& features,
                               std::span<const LabelSet> label_sets, const LabelCatalog& catalog,
                               const TrainConfig& config, double margin) {
  const auto n = static_cast<std::size_t>(features.rows());
  if (label_sets.size() != n) {
    throw InvalidArgument(
        fmt::format("{} label sets for {} training examples", label_sets.size(), n));
  }
  if (catalog.size() < 2) {
    throw InvalidArgument("Crammer-Singer needs a catalog of at least two classes");
  }
  std::vector<Eigen::Index> rows;
  std::vector<int> labels;
  for (std::size_t i = 0; i < n; ++i) {
    // std::set iterates in lexicographic order, so expansion is deterministic.
    for (const auto& tag : label_sets[i]) {
      auto c = catalog.index_of(tag);
      if (!c) throw InvalidArgument(fmt::format("label '{}' is not in the catalog", tag));
      rows.push_back(static_cast<Eigen::Index>(i));
      labels.push_back(static_cast<int>(*c));
    }
  }
  Eigen::MatrixXd expanded(static_cast<Eigen::Index>(rows.size()), features.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    expanded.row(static_cast<Eigen::Index>(r)) = features.row(rows[r]);
  }
  auto result = train_crammer_singer(expanded, labels, catalog.size(), config);
  CsTraining out;
  out.model.classes = catalog.labels;
  out.model.model = std::move(result.model);
  out.model.margin = margin;
  out.diagnostics = std::move(result.diagnostics);
  return out;
}

LabelSet predict_labels_cs(const Eigen::Ref<const Eigen::VectorXd>& x,
                           const CsLabelModel& model) {
  Eigen::VectorXd scores = cs_scores(x, model.model);
  LabelSet out;
  if (scores.size() == 0) return out;
  const double cutoff = scores.maxCoeff() - model.margin;
  for (Eigen::Index c = 0; c < scores.size(); ++c) {
    if (scores(c) >= cutoff) out.insert(model.classes[static_cast<std::size_t>(c)]);
  }
  return out;
}

EvalReport evaluate(std::span<const LabelSet> truths, std::span<const LabelSet> predictions) {
  if (truths.size() != predictions.size()) {
    throw InvalidArgument(fmt::format("evaluate: {} truths but {} predictions", truths.size(),
                                      predictions.size()));
  }
  if (truths.empty()) throw InvalidArgument("evaluate: no examples");
  double acc = 0.0;
  double prec = 0.0;
  double rec = 0.0;
  std::size_t exact = 0;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    const auto& y = truths[i];
    const auto& z = predictions[i];
    if (y.empty()) throw InvalidArgument(fmt::format("evaluate: truth set {} is empty", i));
    std::size_t inter = 0;
    for (const auto& label : z) inter += y.contains(label) ? 1 : 0;
    const std::size_t uni = y.size() + z.size() - inter;
    acc += static_cast<double>(inter) / static_cast<double>(uni);
    if (!z.empty()) prec += static_cast<double>(inter) / static_cast<double>(z.size());
    rec += static_cast<double>(inter) / static_cast<double>(y.size());
    exact += y == z ? 1 : 0;
  }
  const auto n = static_cast<double>(truths.size());
  EvalReport report;
  report.n_examples = truths.size();
  report.accuracy = acc / n;
  report.precision = prec / n;
  report.recall = rec / n;
  report.subset_accuracy = static_cast<double>(exact) / n;
  report.percentage_error = (1.0 - report.accuracy) * 100.0;
  return report;
}

void write_report_csv(std::ostream& out, const EvalReport& report) {
  out << "metric,value\n";
  out << "accuracy," << format_real(report.accuracy) << '\n';
  out << "precision," << format_real(report.precision) << '\n';
  out << "recall," << format_real(report.recall) << '\n';
  out << "percentage_error," << format_real(report.percentage_error) << '\n';
  out << "subset_accuracy," << format_real(report.subset_accuracy) << '\n';
}

}  // namespace qtag
