#include "qtag/model_io.hpp"

#include <fstream>

#include <fmt/format.h>

#include "qtag/common.hpp"

namespace qtag {
namespace {

constexpr int kFormatVersion = 1;

// Line-oriented reader: every record is `keyword field...` separated by
// single spaces, except free-text payload lines read with `text()`.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::string text() {
    std::string line;
    if (!std::getline(in_, line)) throw DataError(where("unexpected end of model"));
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  }

  /// Reads a line that must start with `keyword`; returns the other fields.
  std::vector<std::string> expect(std::string_view keyword, std::size_t n_fields) {
    std::string line = text();
    std::vector<std::string> fields;
    for (auto f : split(line, ' ')) fields.emplace_back(f);
    if (fields.empty() || fields.front() != keyword) {
      throw DataError(where(fmt::format("expected '{}'", keyword)));
    }
    fields.erase(fields.begin());
    if (fields.size() != n_fields) {
      throw DataError(
          where(fmt::format("'{}' needs {} fields, got {}", keyword, n_fields, fields.size())));
    }
    return fields;
  }

  void header(std::string_view kind) {
    auto f = expect(kind, 1);
    if (parse_int(f[0]) != kFormatVersion) {
      throw DataError(where(fmt::format("unsupported {} version {}", kind, f[0])));
    }
  }

  double real(std::string_view keyword) { return parse_real(expect(keyword, 1)[0]); }
  std::size_t count(std::string_view keyword) {
    auto v = parse_int(expect(keyword, 1)[0]);
    if (v < 0) throw DataError(where(fmt::format("negative {}", keyword)));
    return static_cast<std::size_t>(v);
  }

  double real_line() { return parse_real(text()); }

  std::string where(std::string_view what) const {
    return fmt::format("model line {}: {}", line_no_, what);
  }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

void write_reals(std::ostream& out, const double* data, Eigen::Index n) {
  for (Eigen::Index i = 0; i < n; ++i) out << format_real(data[i]) << '\n';
}

Eigen::VectorXd read_reals(Reader& r, std::size_t n) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) v(static_cast<Eigen::Index>(i)) = r.real_line();
  return v;
}

void write_kernel(std::ostream& out, const KernelSpec& k) {
  out << "kernel " << to_string(k.kind) << '\n';
  out << "gamma " << format_real(k.gamma) << '\n';
  out << "degree " << k.degree << '\n';
  out << "coef0 " << format_real(k.coef0) << '\n';
}

KernelSpec read_kernel(Reader& r) {
  KernelSpec k;
  k.kind = parse_kernel_kind(r.expect("kernel", 1)[0]);
  k.gamma = r.real("gamma");
  k.degree = static_cast<int>(parse_int(r.expect("degree", 1)[0]));
  k.coef0 = r.real("coef0");
  k.validate();
  return k;
}

void write_lines(std::ostream& out, std::string_view keyword,
                 const std::vector<std::string>& lines) {
  out << keyword << ' ' << lines.size() << '\n';
  for (const auto& s : lines) out << s << '\n';
}

std::vector<std::string> read_lines(Reader& r, std::string_view keyword) {
  std::size_t n = r.count(keyword);
  std::vector<std::string> lines;
  lines.reserve(n);
  for (std::size_t i = 0; i < n; ++i) lines.push_back(r.text());
  return lines;
}

void write_classes(std::ostream& out, const std::vector<std::string>& classes) {
  write_lines(out, "classes", classes);
}

std::string read_file_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open {}", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(fmt::format("cannot write {}", path.string()));
  out << text;
  if (!out) throw DataError(fmt::format("write failed for {}", path.string()));
}

template <typename Model, typename ReaderFn>
Model read_file(const std::filesystem::path& path, ReaderFn fn) {
  std::istringstream in(read_file_text(path));
  try {
    return fn(in);
  } catch (const DataError& e) {
    throw DataError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

}  // namespace

void write_tfidf(std::ostream& out, const TfIdfModel& model) {
  out << "qtag-tfidf " << kFormatVersion << '\n';
  out << "min_doc_freq " << model.policy.min_doc_freq << '\n';
  out << "max_doc_ratio " << format_real(model.policy.max_doc_ratio) << '\n';
  out << "n_docs " << model.vocabulary.n_docs() << '\n';
  out << "terms " << model.vocabulary.size() << '\n';
  const auto& terms = model.vocabulary.terms();
  const auto& df = model.vocabulary.doc_freq();
  for (std::size_t i = 0; i < terms.size(); ++i) {
    out << i << '\t' << terms[i] << '\t' << df[i] << '\t' << format_real(model.idf[i]) << '\n';
  }
}

TfIdfModel read_tfidf(std::istream& in) {
  Reader r(in);
  r.header("qtag-tfidf");
  FilterPolicy policy;
  policy.min_doc_freq = r.count("min_doc_freq");
  policy.max_doc_ratio = r.real("max_doc_ratio");
  policy.validate();
  std::size_t n_docs = r.count("n_docs");
  std::size_t n_terms = r.count("terms");
  std::vector<std::string> terms;
  std::vector<std::size_t> df;
  std::vector<double> idf;
  for (std::size_t i = 0; i < n_terms; ++i) {
    std::string line = r.text();
    auto f = split(line, '\t');
    if (f.size() != 4 || parse_int(f[0]) != static_cast<std::int64_t>(i) || f[1].empty()) {
      throw DataError(r.where("malformed vocabulary entry"));
    }
    terms.emplace_back(f[1]);
    auto d = parse_int(f[2]);
    if (d <= 0 || static_cast<std::size_t>(d) > n_docs) {
      throw DataError(r.where("document frequency out of range"));
    }
    df.push_back(static_cast<std::size_t>(d));
    idf.push_back(parse_real(f[3]));
  }
  TfIdfModel model;
  model.vocabulary = Vocabulary(std::move(terms), std::move(df), n_docs);
  model.idf = std::move(idf);
  model.policy = policy;
  return model;
}

void write_svd(std::ostream& out, const SvdModel& model) {
  out << "qtag-svd " << kFormatVersion << '\n';
  out << "source " << model.source_rows << ' ' << model.source_cols << '\n';
  out << "rank " << model.rank() << '\n';
  out << "retained_variance " << format_real(model.retained_variance) << '\n';
  out << "singular_values\n";
  write_reals(out, model.singular_values.data(), model.singular_values.size());
  // Eigen storage is column-major, i.e. V_k column by column.
  out << "right_vectors\n";
  write_reals(out, model.right_vectors.data(), model.right_vectors.size());
}

SvdModel read_svd(std::istream& in) {
  Reader r(in);
  r.header("qtag-svd");
  SvdModel model;
  auto src = r.expect("source", 2);
  model.source_rows = static_cast<std::size_t>(parse_int(src[0]));
  model.source_cols = static_cast<std::size_t>(parse_int(src[1]));
  std::size_t k = r.count("rank");
  model.retained_variance = r.real("retained_variance");
  r.expect("singular_values", 0);
  model.singular_values = read_reals(r, k);
  r.expect("right_vectors", 0);
  Eigen::VectorXd v = read_reals(r, k * model.source_cols);
  model.right_vectors =
      Eigen::Map<Eigen::MatrixXd>(v.data(), static_cast<Eigen::Index>(model.source_cols),
                                  static_cast<Eigen::Index>(k));
  return model;
}

void write_binary_svm(std::ostream& out, const BinarySvmModel& model) {
  out << "qtag-svc " << kFormatVersion << '\n';
  write_kernel(out, model.kernel);
  out << "intercept " << format_real(model.intercept) << '\n';
  out << "support " << model.alphas.size() << ' ' << model.dim() << '\n';
  for (std::size_t s = 0; s < model.alphas.size(); ++s) {
    out << model.support_indices[s] << ' ' << model.support_labels[s] << ' '
        << format_real(model.alphas[s]);
    for (Eigen::Index j = 0; j < model.support_vectors.cols(); ++j) {
      out << ' ' << format_real(model.support_vectors(static_cast<Eigen::Index>(s), j));
    }
    out << '\n';
  }
}

BinarySvmModel read_binary_svm(std::istream& in) {
  Reader r(in);
  r.header("qtag-svc");
  BinarySvmModel model;
  model.kernel = read_kernel(r);
  model.intercept = r.real("intercept");
  auto sz = r.expect("support", 2);
  auto n_sv = static_cast<std::size_t>(parse_int(sz[0]));
  auto dim = static_cast<Eigen::Index>(parse_int(sz[1]));
  model.support_vectors.resize(static_cast<Eigen::Index>(n_sv), dim);
  for (std::size_t s = 0; s < n_sv; ++s) {
    std::string line = r.text();
    auto f = split(line, ' ');
    if (f.size() != static_cast<std::size_t>(dim) + 3) {
      throw DataError(r.where("malformed support vector"));
    }
    model.support_indices.push_back(static_cast<std::size_t>(parse_int(f[0])));
    int y = static_cast<int>(parse_int(f[1]));
    if (y != 1 && y != -1) throw DataError(r.where("support label must be +1/-1"));
    model.support_labels.push_back(y);
    model.alphas.push_back(parse_real(f[2]));
    for (Eigen::Index j = 0; j < dim; ++j) {
      model.support_vectors(static_cast<Eigen::Index>(s), j) =
          parse_real(f[static_cast<std::size_t>(j) + 3]);
    }
  }
  return model;
}

void write_linear(std::ostream& out, const LinearModel& model) {
  out << "qtag-linear " << kFormatVersion << '\n';
  out << "bias " << format_real(model.bias) << '\n';
  out << "weights " << model.weights.size() << '\n';
  write_reals(out, model.weights.data(), model.weights.size());
}

LinearModel read_linear(std::istream& in) {
  Reader r(in);
  r.header("qtag-linear");
  LinearModel model;
  model.bias = r.real("bias");
  model.weights = read_reals(r, r.count("weights"));
  return model;
}

void write_cs(std::ostream& out, const CsModel& model) {
  out << "qtag-cs " << kFormatVersion << '\n';
  out << "shape " << model.n_classes() << ' ' << model.dim() << '\n';
  out << "class_bias\n";
  write_reals(out, model.class_bias.data(), model.class_bias.size());
  out << "class_weights\n";
  write_reals(out, model.class_weights.data(), model.class_weights.size());
}

CsModel read_cs(std::istream& in) {
  Reader r(in);
  r.header("qtag-cs");
  auto shape = r.expect("shape", 2);
  auto k = static_cast<std::size_t>(parse_int(shape[0]));
  auto d = static_cast<std::size_t>(parse_int(shape[1]));
  CsModel model;
  r.expect("class_bias", 0);
  model.class_bias = read_reals(r, k);
  r.expect("class_weights", 0);
  Eigen::VectorXd w = read_reals(r, k * d);
  model.class_weights = Eigen::Map<Eigen::MatrixXd>(w.data(), static_cast<Eigen::Index>(k),
                                                    static_cast<Eigen::Index>(d));
  return model;
}

void write_ovr(std::ostream& out, const OvrModel& model) {
  out << "qtag-ovr " << kFormatVersion << '\n';
  write_classes(out, model.classes);
  out << "threshold " << format_real(model.rule.threshold) << '\n';
  out << "fallback_top1 " << (model.rule.fallback_top1 ? 1 : 0) << '\n';
  for (const auto& member : model.members) {
    if (const auto* svc = std::get_if<BinarySvmModel>(&member)) {
      write_binary_svm(out, *svc);
    } else {
      write_linear(out, std::get<LinearModel>(member));
    }
  }
}

OvrModel read_ovr(std::istream& in) {
  Reader r(in);
  r.header("qtag-ovr");
  OvrModel model;
  model.classes = read_lines(r, "classes");
  if (model.classes.size() < 2) throw DataError(r.where("need at least two classes"));
  model.rule.threshold = r.real("threshold");
  model.rule.fallback_top1 = r.count("fallback_top1") != 0;
  for (std::size_t c = 0; c < model.classes.size(); ++c) {
    // Members are self-delimiting blocks; peek at the header to dispatch.
    auto pos = in.tellg();
    std::string head;
    if (!std::getline(in, head)) throw DataError("one-vs-rest model: missing members");
    in.seekg(pos);
    if (head.starts_with("qtag-svc ")) {
      model.members.emplace_back(read_binary_svm(in));
    } else if (head.starts_with("qtag-linear ")) {
      model.members.emplace_back(read_linear(in));
    } else {
      throw DataError(fmt::format("one-vs-rest model: unknown member block '{}'", head));
    }
  }
  return model;
}

void write_cs_labels(std::ostream& out, const CsLabelModel& model) {
  out << "qtag-cslabels " << kFormatVersion << '\n';
  write_classes(out, model.classes);
  out << "margin " << format_real(model.margin) << '\n';
  write_cs(out, model.model);
}

CsLabelModel read_cs_labels(std::istream& in) {
  Reader r(in);
  r.header("qtag-cslabels");
  CsLabelModel model;
  model.classes = read_lines(r, "classes");
  model.margin = r.real("margin");
  model.model = read_cs(in);
  if (model.model.n_classes() != model.classes.size()) {
    throw DataError("Crammer-Singer model: class count does not match the class list");
  }
  return model;
}

void write_pipeline(std::ostream& out, const PipelineConfig& config) {
  out << "qtag-pipeline " << kFormatVersion << '\n';
  out << "enable_stemming " << (config.enable_stemming ? 1 : 0) << '\n';
  out << "enable_lemmatization " << (config.enable_lemmatization ? 1 : 0) << '\n';
  write_lines(out, "stopwords", {config.stopwords.begin(), config.stopwords.end()});
  write_lines(out, "preserve_terms",
              {config.preserve_terms.begin(), config.preserve_terms.end()});
  std::vector<std::string> lemma_lines;
  for (const auto& [form, lemma] : config.lemmatizer.exceptions()) {
    lemma_lines.push_back(form + '\t' + lemma);
  }
  write_lines(out, "lemma_exceptions", lemma_lines);
}

PipelineConfig read_pipeline(std::istream& in) {
  Reader r(in);
  r.header("qtag-pipeline");
  PipelineConfig config;
  config.enable_stemming = r.count("enable_stemming") != 0;
  config.enable_lemmatization = r.count("enable_lemmatization") != 0;
  for (auto& w : read_lines(r, "stopwords")) config.stopwords.insert(std::move(w));
  for (auto& w : read_lines(r, "preserve_terms")) config.preserve_terms.insert(std::move(w));
  std::map<std::string, std::string> exceptions;
  for (const auto& line : read_lines(r, "lemma_exceptions")) {
    auto f = split(line, '\t');
    if (f.size() != 2) throw DataError(r.where("malformed lemma exception"));
    exceptions.emplace(std::string(f[0]), std::string(f[1]));
  }
  config.lemmatizer = Lemmatizer(std::move(exceptions));
  config.validate();
  return config;
}

void save_bundle(const std::filesystem::path& dir, const ModelBundle& bundle) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError(fmt::format("cannot create {}: {}", dir.string(), ec.message()));
  write_file(dir / "pipeline.txt", to_text(bundle.pipeline, write_pipeline));
  write_file(dir / "tfidf.txt", to_text(bundle.tfidf, write_tfidf));
  write_file(dir / "svd.txt", to_text(bundle.svd, write_svd));
  std::string classifier = std::visit(
      [](const auto& m) {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, OvrModel>) {
          return to_text(m, write_ovr);
        } else {
          return to_text(m, write_cs_labels);
        }
      },
      bundle.classifier);
  write_file(dir / "classifier.txt", classifier);
}

ModelBundle load_bundle(const std::filesystem::path& dir) {
  ModelBundle bundle;
  bundle.pipeline = read_file<PipelineConfig>(dir / "pipeline.txt", read_pipeline);
  bundle.tfidf = read_file<TfIdfModel>(dir / "tfidf.txt", read_tfidf);
  bundle.svd = read_file<SvdModel>(dir / "svd.txt", read_svd);
  std::string text = read_file_text(dir / "classifier.txt");
  std::istringstream in(text);
  try {
    if (text.starts_with("qtag-ovr ")) {
      bundle.classifier = read_ovr(in);
    } else if (text.starts_with("qtag-cslabels ")) {
      bundle.classifier = read_cs_labels(in);
    } else {
      throw DataError("unknown classifier format");
    }
  } catch (const DataError& e) {
    throw DataError(fmt::format("{}: {}", (dir / "classifier.txt").string(), e.what()));
  }
  if (bundle.svd.n_terms() != bundle.tfidf.vocabulary.size()) {
    throw DataError(fmt::format("bundle {}: SVD expects {} terms but vocabulary has {}",
                                dir.string(), bundle.svd.n_terms(),
                                bundle.tfidf.vocabulary.size()));
  }
  return bundle;
}

LabelSet predict_post(const CleanPost& post, const ModelBundle& bundle) {
  TokenDoc doc = run_pipeline(post, bundle.pipeline);
  Eigen::VectorXd z = project(transform(doc, bundle.tfidf), bundle.svd);
  return std::visit(
      [&](const auto& m) {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, OvrModel>) {
          return predict_labels(z, m);
        } else {
          return predict_labels_cs(z, m);
        }
      },
      bundle.classifier);
}

}  // namespace qtag
