#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "qtag/experiment.hpp"
#include "qtag/model_io.hpp"
#include "support/matrices.hpp"

using namespace qtag;

namespace {

template <typename Model, typename Writer, typename Reader>
Model round_trip(const Model& model, Writer writer, Reader reader) {
  std::string text = to_text(model, writer);
  std::istringstream in(text);
  Model back = reader(in);
  EXPECT_EQ(to_text(back, writer), text);
  return back;
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("qtag_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

TokenDoc doc(std::vector<std::string> tokens) { return TokenDoc{0, std::move(tokens), {}}; }

}  // namespace

TEST(ModelIo, TfIdfRoundTrip) {
  std::vector<TokenDoc> corpus{doc({"alpha", "beta"}), doc({"alpha"}), doc({"beta", "gamma", "gamma"})};
  auto model = fit_tfidf(corpus, FilterPolicy{1, 1.0});
  auto back = round_trip(model, write_tfidf, read_tfidf);
  EXPECT_EQ(back.vocabulary.terms(), model.vocabulary.terms());
  EXPECT_EQ(back.vocabulary.doc_freq(), model.vocabulary.doc_freq());
  EXPECT_EQ(back.idf, model.idf);
  EXPECT_EQ(back.policy.min_doc_freq, 1u);
}

TEST(ModelIo, SvdRoundTrip) {
  Rng rng(1);
  Eigen::MatrixXd a = testutil::gaussian(9, 7, rng);
  auto model = truncated_svd(testutil::to_term_doc(a), 4, 1);
  auto back = round_trip(model, write_svd, read_svd);
  EXPECT_EQ(back.singular_values, model.singular_values);
  EXPECT_EQ(back.right_vectors, model.right_vectors);
  EXPECT_EQ(back.retained_variance, model.retained_variance);
}

TEST(ModelIo, SvmModelsReproduceDecisionValues) {
  Rng rng(2);
  Eigen::MatrixXd x = testutil::gaussian(30, 3, rng);
  std::vector<int> y;
  std::vector<int> cls;
  for (Eigen::Index i = 0; i < 30; ++i) {
    y.push_back(x(i, 0) > 0 ? 1 : -1);
    cls.push_back(x(i, 1) > 0.5 ? 2 : (x(i, 1) > -0.5 ? 1 : 0));
  }
  TrainConfig cfg;
  cfg.c = 3.0;
  auto smo = train_svc_smo(x, y, KernelSpec{KernelKind::polynomial, 0.7, 3, 1.0}, cfg).model;
  auto lin = train_linear_dcd(x, y, cfg).model;
  auto cs = train_crammer_singer(x, cls, 3, cfg).model;
  auto smo2 = round_trip(smo, write_binary_svm, read_binary_svm);
  auto lin2 = round_trip(lin, write_linear, read_linear);
  auto cs2 = round_trip(cs, write_cs, read_cs);
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd p = testutil::gaussian(3, 1, rng);
    EXPECT_EQ(decision_value(p, smo2), decision_value(p, smo));
    EXPECT_EQ(decision_value(p, lin2), decision_value(p, lin));
    EXPECT_EQ(cs_scores(p, cs2), cs_scores(p, cs));
  }
}

TEST(ModelIo, LabelModelsRoundTrip) {
  Rng rng(3);
  Eigen::MatrixXd x = testutil::gaussian(40, 2, rng);
  std::vector<LabelSet> labels;
  for (Eigen::Index i = 0; i < 40; ++i) {
    LabelSet s{x(i, 0) > 0 ? "pos" : "neg"};
    if (x(i, 1) > 0.8) s.insert("up");
    labels.push_back(s);
  }
  labels[0].insert("up");
  LabelCatalog catalog{{"neg", "pos", "up"}, {1, 1, 1}};
  OvrTrainer kernel{BinaryTrainer::kernel_svc, KernelSpec{KernelKind::rbf, 0.5, 3, 0.0}, {}};
  auto ovr_k = train_ovr(x, labels, catalog, kernel, DecisionRule{0.25, false}).model;
  auto ovr_l = train_ovr(x, labels, catalog, OvrTrainer{}).model;
  auto cs = train_cs_multilabel(x, labels, catalog, TrainConfig{}, 0.5).model;
  auto ovr_k2 = round_trip(ovr_k, write_ovr, read_ovr);
  auto ovr_l2 = round_trip(ovr_l, write_ovr, read_ovr);
  auto cs2 = round_trip(cs, write_cs_labels, read_cs_labels);
  EXPECT_EQ(ovr_k2.rule.threshold, 0.25);
  EXPECT_FALSE(ovr_k2.rule.fallback_top1);
  EXPECT_EQ(cs2.margin, 0.5);
  for (Eigen::Index i = 0; i < 40; ++i) {
    Eigen::VectorXd p = x.row(i).transpose();
    EXPECT_EQ(predict_labels(p, ovr_k2), predict_labels(p, ovr_k));
    EXPECT_EQ(predict_labels(p, ovr_l2), predict_labels(p, ovr_l));
    EXPECT_EQ(predict_labels_cs(p, cs2), predict_labels_cs(p, cs));
  }
}

TEST(ModelIo, PipelineRoundTrip) {
  PipelineConfig c = PipelineConfig::defaults();
  c.preserve_terms = {"c++", "c#"};
  c.enable_lemmatization = true;
  c.enable_stemming = false;
  auto back = round_trip(c, write_pipeline, read_pipeline);
  EXPECT_EQ(back.stopwords, c.stopwords);
  EXPECT_EQ(back.preserve_terms, c.preserve_terms);
  EXPECT_TRUE(back.enable_lemmatization);
  EXPECT_FALSE(back.enable_stemming);
  EXPECT_EQ(back.lemmatizer.exceptions(), c.lemmatizer.exceptions());
}

TEST(ModelIo, RejectsMalformedInput) {
  auto bad = [](const std::string& text, auto reader) {
    std::istringstream in(text);
    EXPECT_THROW(reader(in), DataError) << text;
  };
  bad("", read_tfidf);
  bad("qtag-svd 1\n", read_svd);
  bad("qtag-svd 2\n", read_svd);
  bad("qtag-linear 1\nweights 2\n1 x\nbias 0\n", read_linear);
  bad("qtag-tfidf 1\n", read_linear);
  bad("garbage", read_ovr);
  bad("qtag-svc 1\n", read_cs_labels);
}

TEST(ModelIo, TruncatedFileFails) {
  Rng rng(4);
  Eigen::MatrixXd a = testutil::gaussian(6, 6, rng);
  auto text = to_text(truncated_svd(testutil::to_term_doc(a), 3, 1), write_svd);
  std::istringstream in(text.substr(0, text.size() / 2));
  EXPECT_THROW(read_svd(in), DataError);
}

TEST(ModelIo, BundleSaveLoadPredict) {
  std::vector<CleanPost> posts;
  const std::vector<std::pair<std::string, std::string>> seeds = {
      {"java", "java jvm spring maven"}, {"python", "python pip django numpy"},
      {"php", "php laravel composer apache"}};
  Rng rng(5);
  for (int i = 0; i < 60; ++i) {
    const auto& [tag, words] = seeds[static_cast<std::size_t>(i % 3)];
    posts.push_back(CleanPost{i + 1, words + " question number " + std::to_string(rng.below(5)), {tag}});
  }
  PipelineConfig pipeline = PipelineConfig::defaults();
  std::vector<TokenDoc> docs;
  std::vector<LabelSet> labels;
  for (const auto& p : posts) {
    docs.push_back(run_pipeline(p, pipeline));
    labels.push_back(LabelSet(p.tags.begin(), p.tags.end()));
  }
  std::vector<std::size_t> rows(docs.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  RepresentationConfig rc;
  rc.policy = FilterPolicy{2, 0.95};
  auto rep = fit_representation(docs, rows, rc);
  Eigen::MatrixXd features = featurize(docs, rows, rep);
  LabelCatalog catalog{{"java", "python", "php"}, {20, 20, 20}};
  auto trained = train_ovr(features, labels, catalog, OvrTrainer{});

  ModelBundle bundle{pipeline, rep.tfidf, rep.svd, trained.model};
  auto dir = scratch_dir("bundle");
  save_bundle(dir, bundle);
  for (const char* f : {"pipeline.txt", "tfidf.txt", "svd.txt", "classifier.txt"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
  auto loaded = load_bundle(dir);
  CleanPost probe{999, "How do I configure maven for a spring project on the jvm?", {}};
  EXPECT_EQ(predict_post(probe, loaded), predict_post(probe, bundle));
  EXPECT_EQ(predict_post(probe, loaded), (LabelSet{"java"}));

  // A vocabulary that no longer matches the SVD is rejected.
  {
    std::ofstream out(dir / "tfidf.txt");
    std::vector<TokenDoc> other{doc({"x", "y"}), doc({"x"})};
    write_tfidf(out, fit_tfidf(other, FilterPolicy{1, 1.0}));
  }
  EXPECT_THROW(load_bundle(dir), DataError);
  std::filesystem::remove_all(dir);
  EXPECT_THROW(load_bundle(dir), DataError);
}
