#include "qtag/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

#include <fmt/format.h>

#include "json.hpp"
#include "qtag/common.hpp"
#include "qtag/model_io.hpp"

namespace qtag {
namespace {

std::vector<std::size_t> shuffled_range(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  return order;
}

std::vector<TokenDoc> gather(std::span<const TokenDoc> docs, std::span<const std::size_t> rows) {
  std::vector<TokenDoc> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(docs[r]);
  return out;
}

std::vector<LabelSet> gather(std::span<const LabelSet> sets, std::span<const std::size_t> rows) {
  std::vector<LabelSet> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(sets[r]);
  return out;
}

std::string format_c(double c) { return fmt::format("C={}", c); }

std::string format_percent(double v) { return fmt::format("{:.2f}", v); }

// Features and labels for one train/evaluate pair.
struct Fold {
  Eigen::MatrixXd train_x;
  std::vector<LabelSet> train_y;
  Eigen::MatrixXd eval_x;
  std::vector<LabelSet> eval_y;
};

Fold make_fold(const PreparedCorpus& corpus, std::span<const std::size_t> train_rows,
               std::span<const std::size_t> eval_rows, const RepresentationConfig& config,
               Representation* keep = nullptr) {
  Representation rep = fit_representation(corpus.docs, train_rows, config);
  Fold fold;
  fold.train_x = featurize(corpus.docs, train_rows, rep);
  fold.eval_x = featurize(corpus.docs, eval_rows, rep);
  fold.train_y = gather(std::span<const LabelSet>(corpus.labels), train_rows);
  fold.eval_y = gather(std::span<const LabelSet>(corpus.labels), eval_rows);
  if (keep) *keep = std::move(rep);
  return fold;
}

int max_iterations_used(const TrainedClassifier& trained) {
  int most = 0;
  for (const auto& d : trained.diagnostics) most = std::max(most, d.iterations_used);
  return most;
}

std::string_view table_row_header(SweepTable t) {
  switch (t) {
    case SweepTable::iterations:
      return "iterations";
    case SweepTable::kernel:
      return "kernel";
    case SweepTable::technique:
      return "technique";
  }
  return "";
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(fmt::format("cannot write {}", path.string()));
  out << text;
  if (!out) throw DataError(fmt::format("write failed for {}", path.string()));
}

std::string table_csv(const RunRecord& record, SweepTable table, bool train_side) {
  std::vector<std::string> rows;
  std::vector<std::string> cols;
  for (const auto& cell : record.cells) {
    if (cell.spec.table != table) continue;
    if (std::find(rows.begin(), rows.end(), cell.spec.row_key()) == rows.end()) {
      rows.push_back(cell.spec.row_key());
    }
    if (std::find(cols.begin(), cols.end(), cell.spec.column_key()) == cols.end()) {
      cols.push_back(cell.spec.column_key());
    }
  }
  std::string out = csv_field(table_row_header(table));
  for (const auto& c : cols) out += ',' + csv_field(c);
  out += "\r\n";
  for (const auto& r : rows) {
    out += csv_field(r);
    for (const auto& c : cols) {
      std::string value = "NA";
      for (const auto& cell : record.cells) {
        if (cell.spec.table == table && cell.spec.row_key() == r && cell.spec.column_key() == c &&
            cell.ok) {
          value = format_percent(train_side ? cell.train.percentage_error
                                            : cell.test.percentage_error);
        }
      }
      out += ',' + value;
    }
    out += "\r\n";
  }
  return out;
}

std::string cells_csv(const RunRecord& record) {
  std::string out =
      "table,technique,solver,kernel,C,iterations,loss,status,train_error,test_error,"
      "test_accuracy,test_precision,test_recall,test_subset_accuracy,train_subset_accuracy,"
      "cv_accuracy,converged,max_iterations_used,error\r\n";
  for (const auto& cell : record.cells) {
    const auto& s = cell.spec.classifier;
    std::vector<std::string> f = {
        std::string(to_string(cell.spec.table)),
        std::string(to_string(s.technique)),
        s.technique == Technique::crammer_singer ? "crammer_singer"
                                                 : (s.linear_solver ? "linear_dcd" : "smo"),
        s.technique == Technique::ovr && !s.linear_solver ? s.kernel : "",
        fmt::format("{}", s.c),
        std::to_string(s.iterations),
        std::string(to_string(s.loss)),
        cell.ok ? "ok" : "failed"};
    if (cell.ok) {
      for (double v : {cell.train.percentage_error, cell.test.percentage_error,
                       cell.test.accuracy, cell.test.precision, cell.test.recall,
                       cell.test.subset_accuracy, cell.train.subset_accuracy}) {
        f.push_back(format_real(v));
      }
      f.push_back(cell.fold_accuracy.empty() ? "" : format_real(cell.cv_accuracy));
      f.push_back(cell.converged ? "true" : "false");
      f.push_back(std::to_string(cell.max_iterations_used));
    } else {
      for (int i = 0; i < 10; ++i) f.emplace_back();
    }
    f.push_back(cell.error);
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (i > 0) out += ',';
      out += csv_field(f[i]);
    }
    out += "\r\n";
  }
  return out;
}

nlohmann::ordered_json report_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["accuracy"] = r.accuracy;
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["percentage_error"] = r.percentage_error;
  j["subset_accuracy"] = r.subset_accuracy;
  j["n_examples"] = r.n_examples;
  return j;
}

}  // namespace

SplitIndices split(std::size_t n, double ratio, std::uint64_t seed) {
  if (n < 2) throw InvalidArgument(fmt::format("split: need at least 2 items, got {}", n));
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw InvalidArgument(fmt::format("split: ratio {} outside (0, 1)", ratio));
  }
  auto n_train = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n)));
  if (n_train == 0 || n_train == n) {
    throw InvalidArgument(
        fmt::format("split: ratio {} of {} items leaves one side empty", ratio, n));
  }
  auto order = shuffled_range(n, seed);
  SplitIndices out;
  out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  return out;
}

std::vector<SplitIndices> kfold(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw InvalidArgument(fmt::format("kfold: k = {} but must be at least 2", k));
  if (k > n) throw InvalidArgument(fmt::format("kfold: k = {} exceeds n = {}", k, n));
  auto order = shuffled_range(n, seed);
  std::vector<SplitIndices> folds(k);
  std::size_t start = 0;
  for (std::size_t f = 0; f < k; ++f) {
    std::size_t size = n / k + (f < n % k ? 1 : 0);
    for (std::size_t i = 0; i < n; ++i) {
      bool in_fold = i >= start && i < start + size;
      (in_fold ? folds[f].test : folds[f].train).push_back(order[i]);
    }
    start += size;
  }
  return folds;
}

void RepresentationConfig::validate() const {
  policy.validate();
  if (!(variance_target > 0.0 && variance_target <= 1.0)) {
    throw InvalidArgument(fmt::format("variance target {} outside (0, 1]", variance_target));
  }
  if (svd_rank_cap < 1) throw InvalidArgument("svd rank cap must be at least 1");
}

Representation fit_representation(std::span<const TokenDoc> docs,
                                  std::span<const std::size_t> rows,
                                  const RepresentationConfig& config) {
  config.validate();
  std::vector<TokenDoc> subset = gather(docs, rows);
  Representation rep;
  rep.tfidf = fit_tfidf(subset, config.policy);
  TermDocMatrix matrix = build_matrix(subset, rep.tfidf);
  const std::size_t max_rank =
      std::min({config.svd_rank_cap, matrix.rows(), matrix.cols()});
  SvdModel full = truncated_svd(matrix, max_rank, config.seed, config.svd);
  const double total = matrix.frobenius_squared();
  std::vector<double> values(full.singular_values.data(),
                             full.singular_values.data() + full.singular_values.size());
  rep.svd = truncate(full, choose_rank(values, config.variance_target, total), total);
  return rep;
}

Eigen::MatrixXd featurize(std::span<const TokenDoc> docs, std::span<const std::size_t> rows,
                          const Representation& rep) {
  TermDocMatrix matrix(rep.tfidf.vocabulary.size());
  for (std::size_t r : rows) matrix.append_row(transform(docs[r], rep.tfidf));
  return project_rows(matrix, rep.svd);
}

std::string_view to_string(Technique t) {
  return t == Technique::ovr ? "ovr" : "crammer_singer";
}

Technique parse_technique(std::string_view name) {
  std::string n = to_lower_ascii(trim(name));
  if (n == "ovr" || n == "one-vs-rest") return Technique::ovr;
  if (n == "crammer_singer" || n == "cs" || n == "crammer-singer") {
    return Technique::crammer_singer;
  }
  throw InvalidArgument(fmt::format("unknown technique '{}'", name));
}

KernelSpec parse_kernel_choice(std::string_view name, std::size_t n_features) {
  std::string n = to_lower_ascii(trim(name));
  if (n.starts_with("poly") && n.size() > 4) {
    auto degree = parse_int(std::string_view(n).substr(4));
    if (degree < 1 || degree > 10) {
      throw InvalidArgument(fmt::format("polynomial degree {} outside [1, 10]", degree));
    }
    return KernelSpec::with_defaults(KernelKind::polynomial, n_features, static_cast<int>(degree));
  }
  return KernelSpec::with_defaults(parse_kernel_kind(n), n_features);
}

bool TrainedClassifier::converged() const {
  return std::all_of(diagnostics.begin(), diagnostics.end(),
                     [](const auto& d) { return d.converged; });
}

TrainedClassifier train_classifier(const Eigen::MatrixXd& features,
                                   std::span<const LabelSet> label_sets,
                                   const LabelCatalog& catalog, const ClassifierSpec& spec) {
  TrainConfig config;
  config.c = spec.c;
  config.max_iterations = spec.iterations;
  config.tolerance = spec.tolerance;
  config.loss = spec.loss;
  config.seed = spec.seed;
  TrainedClassifier out;
  if (spec.technique == Technique::crammer_singer) {
    auto r = train_cs_multilabel(features, label_sets, catalog, config, spec.cs_margin);
    out.model = std::move(r.model);
    out.diagnostics.push_back(std::move(r.diagnostics));
    return out;
  }
  OvrTrainer trainer;
  trainer.config = config;
  if (spec.linear_solver) {
    trainer.kind = BinaryTrainer::linear_svc;
  } else {
    if (spec.loss != Loss::hinge) {
      throw InvalidArgument("kernel SVC supports the hinge loss only");
    }
    trainer.kind = BinaryTrainer::kernel_svc;
    trainer.kernel = parse_kernel_choice(spec.kernel, static_cast<std::size_t>(features.cols()));
  }
  auto r = train_ovr(features, label_sets, catalog, trainer);
  out.model = std::move(r.model);
  out.diagnostics = std::move(r.diagnostics);
  return out;
}

std::vector<LabelSet> predict_all(const Eigen::MatrixXd& features, const Classifier& model) {
  std::vector<LabelSet> out;
  out.reserve(static_cast<std::size_t>(features.rows()));
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    Eigen::VectorXd x = features.row(i).transpose();
    out.push_back(std::visit(
        [&](const auto& m) {
          if constexpr (std::is_same_v<std::decay_t<decltype(m)>, OvrModel>) {
            return predict_labels(x, m);
          } else {
            return predict_labels_cs(x, m);
          }
        },
        model));
  }
  return out;
}

PreparedCorpus prepare_corpus(const CorpusOptions& options, const PipelineConfig& pipeline) {
  pipeline.validate();
  ParseOptions parse;
  parse.strict = options.strict;
  ParseResult parsed = load_posts(options.posts_path, options.tags_path, parse);
  PreparedCorpus out;
  out.n_parsed = parsed.posts.size();
  out.record_errors = std::move(parsed.errors);
  if (options.n_posts > 0 && parsed.posts.size() > options.n_posts) {
    parsed.posts.resize(options.n_posts);
  }
  if (parsed.posts.empty()) {
    throw DataError(fmt::format("no usable question posts in {}", options.posts_path.string()));
  }
  std::vector<CleanPost> clean;
  clean.reserve(parsed.posts.size());
  for (const auto& p : parsed.posts) clean.push_back(strip_html_code(p));
  auto [catalog, kept] = select_labels(clean, options.k_top_tags);
  out.catalog = std::move(catalog);
  for (const auto& post : kept) {
    out.docs.push_back(run_pipeline(post, pipeline));
    out.labels.emplace_back(post.tags.begin(), post.tags.end());
  }
  return out;
}

void ExperimentConfig::validate() const {
  if (!(split_ratio > 0.0 && split_ratio < 1.0)) {
    throw InvalidArgument(fmt::format("split_ratio {} outside (0, 1)", split_ratio));
  }
  if (kfold_k < 2) throw InvalidArgument("kfold_k must be at least 2");
  if (corpus.k_top_tags < 2) throw InvalidArgument("k_top_tags must be at least 2");
  if (c_grid.empty()) throw InvalidArgument("c_grid must not be empty");
  for (double c : c_grid) {
    if (!(c > 0.0 && std::isfinite(c))) throw InvalidArgument(fmt::format("bad C value {}", c));
  }
  if (!(technique_c > 0.0 && std::isfinite(technique_c))) {
    throw InvalidArgument(fmt::format("bad technique_c {}", technique_c));
  }
  for (int it : iteration_grid) {
    if (it < 1) throw InvalidArgument(fmt::format("bad iteration count {}", it));
  }
  if (fixed_iterations < 1) throw InvalidArgument("fixed_iterations must be positive");
  if (!(tolerance > 0.0)) throw InvalidArgument("tolerance must be positive");
  if (!(cs_margin >= 0.0)) throw InvalidArgument("cs_margin must be non-negative");
  parse_kernel_choice(sweep_kernel, 1);
  for (const auto& k : kernel_grid) parse_kernel_choice(k, 1);
  if (iteration_grid.empty() && kernel_grid.empty() &&
      (technique_grid.empty() || loss_grid.empty())) {
    throw InvalidArgument("every sweep grid is empty; nothing to run");
  }
  representation(seed).validate();
}

PipelineConfig ExperimentConfig::pipeline() const {
  PipelineConfig p = PipelineConfig::defaults();
  if (stopwords_path) p.stopwords = load_word_list(*stopwords_path);
  for (const auto& t : preserve_terms) p.preserve_terms.insert(to_lower_ascii(t));
  p.enable_stemming = enable_stemming;
  p.enable_lemmatization = enable_lemmatization;
  p.validate();
  return p;
}

RepresentationConfig ExperimentConfig::representation(std::uint64_t rep_seed) const {
  RepresentationConfig r;
  r.policy.min_doc_freq = min_doc_freq;
  r.policy.max_doc_ratio = max_doc_ratio;
  r.variance_target = variance_target;
  r.svd_rank_cap = svd_rank_cap;
  r.svd.residual_tolerance = svd_tolerance;
  r.seed = rep_seed;
  return r;
}

std::string_view to_string(SweepTable t) {
  switch (t) {
    case SweepTable::iterations:
      return "iterations";
    case SweepTable::kernel:
      return "kernel";
    case SweepTable::technique:
      return "technique";
  }
  return "";
}

std::string CellSpec::row_key() const {
  switch (table) {
    case SweepTable::iterations:
      return std::to_string(classifier.iterations);
    case SweepTable::kernel:
      return classifier.kernel;
    case SweepTable::technique:
      return std::string(to_string(classifier.technique));
  }
  return "";
}

std::string CellSpec::column_key() const {
  if (table == SweepTable::technique) return std::string(to_string(classifier.loss));
  return format_c(classifier.c);
}

bool RunRecord::all_converged() const {
  return std::all_of(cells.begin(), cells.end(),
                     [](const CellResult& c) { return c.ok && c.converged; });
}

std::vector<CellSpec> enumerate_cells(const ExperimentConfig& config) {
  std::vector<CellSpec> cells;
  ClassifierSpec base;
  base.tolerance = config.tolerance;
  base.cs_margin = config.cs_margin;
  base.seed = config.seed;
  for (int it : config.iteration_grid) {
    for (double c : config.c_grid) {
      CellSpec cell{SweepTable::iterations, base};
      cell.classifier.kernel = config.sweep_kernel;
      cell.classifier.c = c;
      cell.classifier.iterations = it;
      cells.push_back(cell);
    }
  }
  for (const auto& kernel : config.kernel_grid) {
    for (double c : config.c_grid) {
      CellSpec cell{SweepTable::kernel, base};
      cell.classifier.kernel = kernel;
      cell.classifier.c = c;
      cell.classifier.iterations = config.fixed_iterations;
      cells.push_back(cell);
    }
  }
  for (Technique t : config.technique_grid) {
    for (Loss loss : config.loss_grid) {
      CellSpec cell{SweepTable::technique, base};
      cell.classifier.technique = t;
      cell.classifier.linear_solver = true;
      cell.classifier.c = config.technique_c;
      cell.classifier.iterations = config.fixed_iterations;
      cell.classifier.loss = loss;
      cells.push_back(cell);
    }
  }
  return cells;
}

RunRecord run_experiment(const ExperimentConfig& config) {
  config.validate();
  RunRecord record;
  record.config = config;
  PreparedCorpus corpus = prepare_corpus(config.corpus, config.pipeline());
  record.n_parsed = corpus.n_parsed;
  record.n_record_errors = corpus.record_errors.size();
  record.n_posts = corpus.docs.size();
  record.catalog = corpus.catalog;

  SplitIndices main_split = split(corpus.docs.size(), config.split_ratio, config.seed);
  record.n_train = main_split.train.size();
  record.n_test = main_split.test.size();
  Fold main = make_fold(corpus, main_split.train, main_split.test,
                        config.representation(config.seed), &record.representation);
  record.vocabulary_size = record.representation.tfidf.vocabulary.size();
  record.svd_rank = record.representation.svd.rank();
  record.retained_variance = record.representation.svd.retained_variance;

  // Folds partition the training split only; every fold refits tf-idf and
  // SVD on its own training part.
  std::vector<Fold> folds;
  if (config.cross_validate) {
    auto parts = kfold(main_split.train.size(), config.kfold_k, config.seed + 1);
    for (std::size_t f = 0; f < parts.size(); ++f) {
      std::vector<std::size_t> fit_rows;
      std::vector<std::size_t> val_rows;
      for (std::size_t i : parts[f].train) fit_rows.push_back(main_split.train[i]);
      for (std::size_t i : parts[f].test) val_rows.push_back(main_split.train[i]);
      folds.push_back(
          make_fold(corpus, fit_rows, val_rows, config.representation(config.seed + 2 + f)));
    }
  }

  if (config.iteration_grid.empty()) {
    record.notes.push_back("iterations table omitted: iteration grid is empty");
  }
  if (config.kernel_grid.empty()) {
    record.notes.push_back("kernel table omitted: kernel grid is empty");
  }
  if (config.technique_grid.empty() || config.loss_grid.empty()) {
    record.notes.push_back("technique table omitted: technique or loss grid is empty");
  }

  for (const auto& spec : enumerate_cells(config)) {
    CellResult cell;
    cell.spec = spec;
    auto start = std::chrono::steady_clock::now();
    try {
      TrainedClassifier trained =
          train_classifier(main.train_x, main.train_y, corpus.catalog, spec.classifier);
      cell.train = evaluate(main.train_y, predict_all(main.train_x, trained.model));
      cell.test = evaluate(main.eval_y, predict_all(main.eval_x, trained.model));
      cell.converged = trained.converged();
      cell.max_iterations_used = max_iterations_used(trained);
      for (const auto& fold : folds) {
        TrainedClassifier f =
            train_classifier(fold.train_x, fold.train_y, corpus.catalog, spec.classifier);
        cell.fold_accuracy.push_back(
            evaluate(fold.eval_y, predict_all(fold.eval_x, f.model)).accuracy);
      }
      if (!cell.fold_accuracy.empty()) {
        cell.cv_accuracy =
            std::accumulate(cell.fold_accuracy.begin(), cell.fold_accuracy.end(), 0.0) /
            static_cast<double>(cell.fold_accuracy.size());
      }
      cell.ok = true;
    } catch (const Error& e) {
      cell.ok = false;
      cell.error = e.what();
    }
    cell.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    record.cells.push_back(std::move(cell));
  }
  return record;
}

std::string csv_field(std::string_view value) {
  if (value.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(value);
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void emit_tables(RunRecord& record, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError(fmt::format("cannot create {}: {}", dir.string(), ec.message()));
  record.artifacts.clear();
  auto emit = [&](const std::string& name, const std::string& text) {
    write_text_file(dir / name, text);
    record.artifacts.push_back(name);
  };
  for (SweepTable t : {SweepTable::iterations, SweepTable::kernel, SweepTable::technique}) {
    bool present = std::any_of(record.cells.begin(), record.cells.end(),
                               [&](const CellResult& c) { return c.spec.table == t; });
    if (!present) continue;
    emit(fmt::format("{}_train.csv", to_string(t)), table_csv(record, t, true));
    emit(fmt::format("{}_test.csv", to_string(t)), table_csv(record, t, false));
  }
  emit("cells.csv", cells_csv(record));
  emit("tfidf.txt", to_text(record.representation.tfidf, write_tfidf));
  emit("svd.txt", to_text(record.representation.svd, write_svd));

  std::string timings = "# wall-clock seconds per cell; varies between runs\n";
  for (std::size_t i = 0; i < record.cells.size(); ++i) {
    const auto& c = record.cells[i];
    timings += fmt::format("{} {} {} {} {:.3f}\n", i, to_string(c.spec.table), c.spec.row_key(),
                           c.spec.column_key(), c.wall_seconds);
  }
  emit("timings.log", timings);
  record.artifacts.push_back("run_record.json");
  std::ostringstream json;
  write_run_record(json, record);
  write_text_file(dir / "run_record.json", json.str());
}

void write_run_record(std::ostream& out, const RunRecord& record) {
  using nlohmann::ordered_json;
  const auto& c = record.config;
  ordered_json cfg;
  cfg["posts_path"] = c.corpus.posts_path.string();
  cfg["tags_path"] = c.corpus.tags_path ? c.corpus.tags_path->string() : "";
  cfg["n_posts"] = c.corpus.n_posts;
  cfg["k_top_tags"] = c.corpus.k_top_tags;
  cfg["strict"] = c.corpus.strict;
  cfg["stopwords_path"] = c.stopwords_path ? c.stopwords_path->string() : "";
  cfg["preserve_terms"] = c.preserve_terms;
  cfg["enable_stemming"] = c.enable_stemming;
  cfg["enable_lemmatization"] = c.enable_lemmatization;
  cfg["split_ratio"] = c.split_ratio;
  cfg["kfold_k"] = c.kfold_k;
  cfg["cross_validate"] = c.cross_validate;
  cfg["variance_target"] = c.variance_target;
  cfg["svd_rank_cap"] = c.svd_rank_cap;
  cfg["min_doc_freq"] = c.min_doc_freq;
  cfg["max_doc_ratio"] = c.max_doc_ratio;
  cfg["svd_tolerance"] = c.svd_tolerance;
  cfg["sweep_kernel"] = c.sweep_kernel;
  cfg["iteration_grid"] = c.iteration_grid;
  cfg["kernel_grid"] = c.kernel_grid;
  cfg["c_grid"] = c.c_grid;
  cfg["fixed_iterations"] = c.fixed_iterations;
  std::vector<std::string> techniques;
  for (auto t : c.technique_grid) techniques.emplace_back(to_string(t));
  cfg["technique_grid"] = techniques;
  std::vector<std::string> losses;
  for (auto l : c.loss_grid) losses.emplace_back(to_string(l));
  cfg["loss_grid"] = losses;
  cfg["technique_c"] = c.technique_c;
  cfg["tolerance"] = c.tolerance;
  cfg["cs_margin"] = c.cs_margin;
  cfg["seed"] = c.seed;

  ordered_json j;
  j["config"] = cfg;
  ordered_json data;
  data["n_parsed"] = record.n_parsed;
  data["n_record_errors"] = record.n_record_errors;
  data["n_posts"] = record.n_posts;
  data["n_train"] = record.n_train;
  data["n_test"] = record.n_test;
  data["labels"] = record.catalog.labels;
  data["label_counts"] = record.catalog.counts;
  data["vocabulary_size"] = record.vocabulary_size;
  data["svd_rank"] = record.svd_rank;
  data["retained_variance"] = record.retained_variance;
  j["data"] = data;

  ordered_json cells = ordered_json::array();
  for (const auto& cell : record.cells) {
    const auto& s = cell.spec.classifier;
    ordered_json e;
    e["table"] = to_string(cell.spec.table);
    e["row"] = cell.spec.row_key();
    e["column"] = cell.spec.column_key();
    e["technique"] = to_string(s.technique);
    e["solver"] = s.technique == Technique::crammer_singer
                      ? "crammer_singer"
                      : (s.linear_solver ? "linear_dcd" : "smo");
    e["kernel"] = s.kernel;
    e["c"] = s.c;
    e["iterations"] = s.iterations;
    e["loss"] = to_string(s.loss);
    e["ok"] = cell.ok;
    if (cell.ok) {
      e["train_error"] = cell.train.percentage_error;
      e["test_error"] = cell.test.percentage_error;
      e["train"] = report_json(cell.train);
      e["test"] = report_json(cell.test);
      e["fold_accuracy"] = cell.fold_accuracy;
      if (!cell.fold_accuracy.empty()) e["cv_accuracy"] = cell.cv_accuracy;
      e["converged"] = cell.converged;
      e["max_iterations_used"] = cell.max_iterations_used;
    } else {
      e["error"] = cell.error;
    }
    cells.push_back(e);
  }
  j["cells"] = cells;
  j["notes"] = record.notes;
  j["artifacts"] = record.artifacts;
  out << j.dump(2) << '\n';
}

}  // namespace qtag
