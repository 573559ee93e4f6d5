// qtag: command-line front end.
//
//   qtag ingest      dump -> cleaned line-format corpus restricted to top-K tags
//   qtag preprocess  corpus -> tf-idf model, matrix and SVD
//   qtag train       corpus -> model bundle directory
//   qtag evaluate    model bundle + corpus -> metric,value CSV
//   qtag experiment  full sweep -> tables, cells.csv, run_record.json
//   qtag predict     model bundle + one post file -> tags, one per line
//
// Exit codes: 0 success, 1 usage, 2 data, 3 convergence failure (strict).

#include <algorithm>
#include <fstream>
#include <numeric>
#include <iostream>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "qtag/common.hpp"
#include "qtag/experiment.hpp"
#include "qtag/model_io.hpp"

namespace {

using namespace qtag;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitConvergence = 3;

// Config files hold bare `key = value` lines; they are read as the section of
// the verb being run, so keys name that verb's options.
class VerbConfig : public CLI::ConfigINI {
 public:
  std::string verb;

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    std::stringstream text;
    text << '[' << verb << "]\n" << input.rdbuf();
    return CLI::ConfigINI::from_config(text);
  }
};

// Registers `--a-b` with the alias `--a_b` so config keys can use either.
std::string names(std::string_view base) {
  std::string dashed(base);
  std::string underscored(base);
  std::replace(dashed.begin(), dashed.end(), '_', '-');
  if (dashed == underscored) return "--" + dashed;
  return fmt::format("--{},--{}", dashed, underscored);
}

struct CorpusFlags {
  std::string input;
  std::string tags;
  std::size_t n_posts = 0;
  std::size_t k_top_tags = 10;
  bool strict = false;

  void add(CLI::App* app) {
    app->add_option(names("input"), input, "Posts.xml dump or line-format posts file")
        ->required();
    app->add_option(names("tags"), tags, "tag sidecar (selects the line format)");
    app->add_option(names("n_posts"), n_posts, "keep only the first N posts (0 = all)");
    app->add_option(names("k_top_tags"), k_top_tags, "number of most frequent tags kept");
    app->add_flag(names("strict"), strict, "fail on malformed records and non-convergence");
  }

  CorpusOptions options() const {
    CorpusOptions o;
    o.posts_path = input;
    if (!tags.empty()) o.tags_path = tags;
    o.n_posts = n_posts;
    o.k_top_tags = k_top_tags;
    o.strict = strict;
    return o;
  }
};

struct PipelineFlags {
  std::string stopwords;
  std::vector<std::string> preserve_terms;
  bool no_stemming = false;
  bool lemmatize = false;

  void add(CLI::App* app) {
    app->add_option(names("stopwords"), stopwords, "stopword file (default: bundled SMART list)");
    app->add_option(names("preserve_terms"), preserve_terms, "terms kept whole, e.g. c++")
        ->delimiter(',');
    app->add_flag(names("no_stemming"), no_stemming, "disable Porter stemming");
    app->add_flag(names("lemmatize"), lemmatize, "enable rule-based lemmatization");
  }

  void apply(ExperimentConfig& c) const {
    if (!stopwords.empty()) c.stopwords_path = stopwords;
    c.preserve_terms = preserve_terms;
    c.enable_stemming = !no_stemming;
    c.enable_lemmatization = lemmatize;
  }
};

struct RepresentationFlags {
  std::size_t min_doc_freq = 2;
  double max_doc_ratio = 0.95;
  double variance_target = 0.9;
  std::size_t svd_rank_cap = 3000;
  double svd_tolerance = 1e-8;

  void add(CLI::App* app) {
    app->add_option(names("min_doc_freq"), min_doc_freq, "drop terms in fewer documents");
    app->add_option(names("max_doc_ratio"), max_doc_ratio,
                    "drop terms in a larger fraction of documents");
    app->add_option(names("variance_target"), variance_target, "SVD variance to retain");
    app->add_option(names("svd_rank_cap"), svd_rank_cap, "upper bound on the SVD rank");
    app->add_option(names("svd_tolerance"), svd_tolerance, "SVD residual tolerance");
  }

  void apply(ExperimentConfig& c) const {
    c.min_doc_freq = min_doc_freq;
    c.max_doc_ratio = max_doc_ratio;
    c.variance_target = variance_target;
    c.svd_rank_cap = svd_rank_cap;
    c.svd_tolerance = svd_tolerance;
  }
};

struct ClassifierFlags {
  std::string technique = "ovr";
  std::string solver = "smo";
  std::string kernel = "rbf";
  double c = 1.0;
  int iterations = 10000;
  std::string loss = "hinge";
  double tolerance = 1e-3;
  double cs_margin = 0.0;

  void add(CLI::App* app) {
    app->add_option(names("technique"), technique, "ovr or crammer_singer");
    app->add_option(names("solver"), solver, "ovr member solver: smo (kernel) or dcd (linear)");
    app->add_option(names("kernel"), kernel, "linear, rbf, sigmoid or polyN");
    app->add_option(names("c"), c, "penalty C");
    app->add_option(names("iterations"), iterations, "iteration budget");
    app->add_option(names("loss"), loss, "hinge or squared_hinge");
    app->add_option(names("tolerance"), tolerance, "stopping tolerance");
    app->add_option(names("cs_margin"), cs_margin, "Crammer-Singer label-set margin");
  }

  ClassifierSpec spec(std::uint64_t seed) const {
    ClassifierSpec s;
    s.technique = parse_technique(technique);
    if (solver == "dcd" || solver == "linear") {
      s.linear_solver = true;
    } else if (solver != "smo" && solver != "kernel") {
      throw InvalidArgument(fmt::format("unknown solver '{}'", solver));
    }
    s.kernel = kernel;
    s.c = c;
    s.iterations = iterations;
    s.loss = parse_loss(loss);
    s.tolerance = tolerance;
    s.cs_margin = cs_margin;
    s.seed = seed;
    return s;
  }
};

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(fmt::format("cannot write {}", path.string()));
  return out;
}

void report_record_errors(const std::vector<RecordError>& errors) {
  for (const auto& e : errors) std::cerr << "line " << e.line << ": " << e.message << '\n';
  if (!errors.empty()) std::cerr << errors.size() << " malformed record(s) skipped\n";
}

std::string escape_text(std::string_view text) {
  std::string out;
  for (char ch : text) {
    if (ch == '&') {
      out += "&amp;";
    } else if (ch == '<') {
      out += "&lt;";
    } else if (ch == '>') {
      out += "&gt;";
    } else {
      out += ch;
    }
  }
  return out;
}

std::string join_tags(const std::vector<std::string>& tags) {
  std::string out;
  for (const auto& t : tags) out += (out.empty() ? "" : ",") + t;
  return out;
}

// Loads a corpus for scoring against a fixed class list: tags outside the
// list are dropped, as are posts left without tags.
std::pair<std::vector<CleanPost>, std::vector<LabelSet>> load_scoring_corpus(
    const CorpusOptions& options, const std::vector<std::string>& classes) {
  ParseOptions parse;
  parse.strict = options.strict;
  ParseResult parsed = load_posts(options.posts_path, options.tags_path, parse);
  report_record_errors(parsed.errors);
  if (options.n_posts > 0 && parsed.posts.size() > options.n_posts) {
    parsed.posts.resize(options.n_posts);
  }
  std::vector<CleanPost> posts;
  std::vector<LabelSet> labels;
  for (const auto& raw : parsed.posts) {
    LabelSet set;
    for (const auto& t : raw.tags) {
      if (std::find(classes.begin(), classes.end(), t) != classes.end()) set.insert(t);
    }
    if (set.empty()) continue;
    posts.push_back(strip_html_code(raw));
    labels.push_back(std::move(set));
  }
  if (posts.empty()) throw DataError("no post carries any of the model's tags");
  return {std::move(posts), std::move(labels)};
}

// A grid given on the command line replaces the default; `none` empties it.
template <typename T, typename Parse>
void override_grid(const std::vector<std::string>& given, std::vector<T>& grid, Parse parse) {
  if (given.empty()) return;
  grid.clear();
  for (const auto& v : given) {
    if (trim(v) == "none") continue;
    grid.push_back(parse(trim(v)));
  }
}

const std::vector<std::string>& classes_of(const Classifier& c) {
  return std::visit([](const auto& m) -> const std::vector<std::string>& { return m.classes; },
                    c);
}

int run_ingest(const CorpusFlags& corpus, const std::string& out_dir) {
  CorpusOptions o = corpus.options();
  ParseOptions parse;
  parse.strict = o.strict;
  ParseResult parsed = load_posts(o.posts_path, o.tags_path, parse);
  report_record_errors(parsed.errors);
  if (o.n_posts > 0 && parsed.posts.size() > o.n_posts) parsed.posts.resize(o.n_posts);
  if (parsed.posts.empty()) throw DataError("no usable question posts");
  std::vector<CleanPost> clean;
  for (const auto& p : parsed.posts) clean.push_back(strip_html_code(p));
  auto [catalog, kept] = select_labels(clean, o.k_top_tags);

  std::filesystem::create_directories(out_dir);
  auto posts_out = open_out(std::filesystem::path(out_dir) / "posts.tsv");
  auto tags_out = open_out(std::filesystem::path(out_dir) / "tags.tsv");
  for (const auto& p : kept) {
    // Empty title; the cleaned text is re-escaped so a second pass through
    // the HTML stripper reproduces it.
    posts_out << p.id << "\t\t" << escape_text(p.text) << '\n';
    tags_out << p.id << '\t' << join_tags(p.tags) << '\n';
  }
  auto labels_out = open_out(std::filesystem::path(out_dir) / "labels.csv");
  labels_out << "label,count\r\n";
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    labels_out << csv_field(catalog.labels[i]) << ',' << catalog.counts[i] << "\r\n";
  }
  std::cout << fmt::format("{} posts parsed, {} kept with {} labels\n", parsed.posts.size(),
                           kept.size(), catalog.size());
  return 0;
}

int run_preprocess(const CorpusFlags& corpus, const PipelineFlags& pipe,
                   const RepresentationFlags& repf, std::uint64_t seed,
                   const std::string& out_dir) {
  ExperimentConfig cfg;
  pipe.apply(cfg);
  repf.apply(cfg);
  PreparedCorpus prepared = prepare_corpus(corpus.options(), cfg.pipeline());
  report_record_errors(prepared.record_errors);
  std::vector<std::size_t> all(prepared.docs.size());
  std::iota(all.begin(), all.end(), 0);
  Representation rep = fit_representation(prepared.docs, all, cfg.representation(seed));

  std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  auto tfidf_out = open_out(dir / "tfidf.txt");
  write_tfidf(tfidf_out, rep.tfidf);
  auto svd_out = open_out(dir / "svd.txt");
  write_svd(svd_out, rep.svd);
  auto matrix_out = open_out(dir / "matrix.txt");
  write_matrix(matrix_out, build_matrix(prepared.docs, rep.tfidf));
  auto pipe_out = open_out(dir / "pipeline.txt");
  write_pipeline(pipe_out, cfg.pipeline());
  std::cout << fmt::format("{} documents, {} terms, SVD rank {} ({:.4f} of variance)\n",
                           prepared.docs.size(), rep.tfidf.vocabulary.size(), rep.svd.rank(),
                           rep.svd.retained_variance);
  return 0;
}

int run_train(const CorpusFlags& corpus, const PipelineFlags& pipe,
              const RepresentationFlags& repf, const ClassifierFlags& clf, std::uint64_t seed,
              const std::string& model_dir) {
  ExperimentConfig cfg;
  pipe.apply(cfg);
  repf.apply(cfg);
  PipelineConfig pipeline = cfg.pipeline();
  PreparedCorpus prepared = prepare_corpus(corpus.options(), pipeline);
  report_record_errors(prepared.record_errors);
  std::vector<std::size_t> all(prepared.docs.size());
  std::iota(all.begin(), all.end(), 0);
  Representation rep = fit_representation(prepared.docs, all, cfg.representation(seed));
  Eigen::MatrixXd x = featurize(prepared.docs, all, rep);
  TrainedClassifier trained =
      train_classifier(x, prepared.labels, prepared.catalog, clf.spec(seed));
  EvalReport report = evaluate(prepared.labels, predict_all(x, trained.model));

  save_bundle(model_dir, ModelBundle{pipeline, rep.tfidf, rep.svd, trained.model});
  std::cout << fmt::format("trained on {} posts, {} labels; training error {:.2f}%\n",
                           prepared.docs.size(), prepared.catalog.size(),
                           report.percentage_error);
  if (!trained.converged()) {
    std::cerr << "warning: solver stopped at its iteration budget before converging\n";
    if (corpus.strict) return kExitConvergence;
  }
  return 0;
}

int run_evaluate(const CorpusFlags& corpus, const std::string& model_dir,
                 const std::string& out_path) {
  ModelBundle bundle = load_bundle(model_dir);
  auto [posts, truths] = load_scoring_corpus(corpus.options(), classes_of(bundle.classifier));
  std::vector<LabelSet> predictions;
  for (const auto& p : posts) predictions.push_back(predict_post(p, bundle));
  EvalReport report = evaluate(truths, predictions);
  if (out_path.empty()) {
    write_report_csv(std::cout, report);
  } else {
    auto out = open_out(out_path);
    write_report_csv(out, report);
  }
  return 0;
}

int run_predict(const std::string& model_dir, const std::string& post_path) {
  ModelBundle bundle = load_bundle(model_dir);
  std::ifstream in(post_path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open {}", post_path));
  // First line is the title, the rest is the HTML body.
  RawPost raw;
  std::getline(in, raw.title);
  std::stringstream body;
  body << in.rdbuf();
  raw.body_html = body.str();
  LabelSet tags = predict_post(strip_html_code(raw), bundle);
  for (const auto& label : classes_of(bundle.classifier)) {
    if (tags.contains(label)) std::cout << label << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-label question tagging with SVMs"};
  app.require_subcommand(1);
  auto config = std::make_shared<VerbConfig>();
  app.config_formatter(config);
  app.set_config("--config", "", "file of `key = value` lines naming the verb's options");

  CorpusFlags corpus;
  PipelineFlags pipe;
  RepresentationFlags repf;
  ClassifierFlags clf;
  std::uint64_t seed = 42;
  std::string out_dir;
  std::string model_dir;
  std::string out_path;
  std::string post_path;

  auto* ingest = app.add_subcommand("ingest", "parse and clean a dump, keep the top-K tags");
  corpus.add(ingest);
  ingest->add_option(names("out_dir"), out_dir, "output directory")->required();

  auto* preprocess = app.add_subcommand("preprocess", "fit tf-idf and SVD on a corpus");
  corpus.add(preprocess);
  pipe.add(preprocess);
  repf.add(preprocess);
  preprocess->add_option(names("seed"), seed, "random seed");
  preprocess->add_option(names("out_dir"), out_dir, "output directory")->required();

  auto* train = app.add_subcommand("train", "train a tagger and save a model bundle");
  corpus.add(train);
  pipe.add(train);
  repf.add(train);
  clf.add(train);
  train->add_option(names("seed"), seed, "random seed");
  train->add_option(names("model_dir"), model_dir, "bundle directory to write")->required();

  auto* eval = app.add_subcommand("evaluate", "score a model bundle on a tagged corpus");
  corpus.add(eval);
  eval->add_option(names("model_dir"), model_dir, "bundle directory")->required();
  eval->add_option(names("out"), out_path, "report CSV path (default stdout)");

  ExperimentConfig exp;
  std::string exp_out = exp.output_dir.string();
  std::string tags_path;
  std::vector<std::string> techniques;
  std::vector<std::string> losses;
  std::vector<std::string> iterations;
  std::vector<std::string> kernels;
  std::string stopwords_path;
  bool no_cv = false;
  bool no_stemming = false;
  auto* experiment = app.add_subcommand("experiment", "run the sweep tables");
  {
    auto* e = experiment;
    e->add_option(names("input"), exp.corpus.posts_path, "posts file")->required();
    e->add_option(names("tags"), tags_path, "tag sidecar (selects the line format)");
    e->add_option(names("n_posts"), exp.corpus.n_posts, "keep only the first N posts");
    e->add_option(names("k_top_tags"), exp.corpus.k_top_tags, "number of tags kept");
    e->add_flag(names("strict"), exp.corpus.strict,
                "fail on malformed records; exit 3 when a cell does not converge");
    e->add_option(names("out_dir"), exp_out, "output directory");
    e->add_option(names("stopwords"), stopwords_path, "stopword file");
    e->add_option(names("preserve_terms"), exp.preserve_terms, "terms kept whole")
        ->delimiter(',');
    e->add_flag(names("no_stemming"), no_stemming, "disable Porter stemming");
    e->add_flag(names("lemmatize"), exp.enable_lemmatization, "enable lemmatization");
    e->add_option(names("split_ratio"), exp.split_ratio, "training share of the split");
    e->add_option(names("kfold_k"), exp.kfold_k, "folds for cross-validation");
    e->add_flag(names("no_cv"), no_cv, "skip k-fold cross-validation");
    e->add_option(names("variance_target"), exp.variance_target, "SVD variance to retain");
    e->add_option(names("svd_rank_cap"), exp.svd_rank_cap, "upper bound on the SVD rank");
    e->add_option(names("min_doc_freq"), exp.min_doc_freq, "minimum document frequency");
    e->add_option(names("max_doc_ratio"), exp.max_doc_ratio, "maximum document ratio");
    e->add_option(names("svd_tolerance"), exp.svd_tolerance, "SVD residual tolerance");
    e->add_option(names("sweep_kernel"), exp.sweep_kernel, "kernel of the iterations table");
    e->add_option(names("iteration_grid"), iterations, "iteration budgets, or none")
        ->delimiter(',');
    e->add_option(names("kernel_grid"), kernels, "kernels of the kernel table, or none")
        ->delimiter(',');
    e->add_option(names("c_grid"), exp.c_grid, "penalty values")->delimiter(',');
    e->add_option(names("fixed_iterations"), exp.fixed_iterations,
                  "iteration budget of the kernel and technique tables");
    e->add_option(names("technique_grid"), techniques, "ovr, crammer_singer, or none")->delimiter(',');
    e->add_option(names("loss_grid"), losses, "hinge, squared_hinge, or none")->delimiter(',');
    e->add_option(names("technique_c"), exp.technique_c, "C of the technique table");
    e->add_option(names("tolerance"), exp.tolerance, "solver stopping tolerance");
    e->add_option(names("cs_margin"), exp.cs_margin, "Crammer-Singer label-set margin");
    e->add_option(names("seed"), exp.seed, "random seed");
  }

  auto* predict = app.add_subcommand("predict", "print the predicted tags of one post");
  predict->add_option(names("model_dir"), model_dir, "bundle directory")->required();
  predict->add_option(names("post"), post_path, "file: title line, then HTML body")
      ->required();

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();
  for (int i = 1; i < argc; ++i) {
    for (auto* sub : app.get_subcommands({})) {
      if (sub->get_name() == argv[i]) config->verb = sub->get_name();
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*ingest) return run_ingest(corpus, out_dir);
    if (*preprocess) return run_preprocess(corpus, pipe, repf, seed, out_dir);
    if (*train) return run_train(corpus, pipe, repf, clf, seed, model_dir);
    if (*eval) return run_evaluate(corpus, model_dir, out_path);
    if (*predict) return run_predict(model_dir, post_path);
    if (*experiment) {
      if (!tags_path.empty()) exp.corpus.tags_path = tags_path;
      if (!stopwords_path.empty()) exp.stopwords_path = stopwords_path;
      exp.output_dir = exp_out;
      exp.cross_validate = !no_cv;
      exp.enable_stemming = !no_stemming;
      override_grid(iterations, exp.iteration_grid,
                    [](std::string_view v) { return static_cast<int>(parse_int(v)); });
      override_grid(kernels, exp.kernel_grid, [](std::string_view v) { return std::string(v); });
      override_grid(techniques, exp.technique_grid, parse_technique);
      override_grid(losses, exp.loss_grid, parse_loss);
      RunRecord record = run_experiment(exp);
      emit_tables(record, exp.output_dir);
      std::size_t failed = 0;
      for (const auto& c : record.cells) failed += c.ok ? 0 : 1;
      std::cout << fmt::format("{} cells ({} failed); outputs in {}\n", record.cells.size(),
                               failed, exp.output_dir.string());
      if (exp.corpus.strict && !record.all_converged()) return kExitConvergence;
      return 0;
    }
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConvergence;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
