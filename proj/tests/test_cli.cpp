#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <string>

#include "qtag/synthetic.hpp"
#include "support/corpus_files.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

RunResult run_cli(const std::string& args, const fs::path& scratch) {
  fs::path out = scratch / "stdout.txt";
  fs::path err = scratch / "stderr.txt";
  std::string cmd = std::string("\"") + QTAG_CLI_PATH + "\" " + args + " > \"" + out.string() +
                    "\" 2> \"" + err.string() + "\"";
  int status = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = testutil::slurp(out);
  r.err = testutil::slurp(err);
  return r;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

testutil::CorpusFiles small_corpus(const fs::path& dir, std::size_t n = 150) {
  qtag::SyntheticSpec s;
  s.n_posts = n;
  s.n_tags = 4;
  s.n_rare_tags = 1;
  s.noise_vocabulary = 80;
  return testutil::write_corpus(dir, qtag::generate_synthetic(s).posts);
}

std::string corpus_args(const testutil::CorpusFiles& f) {
  return "--input " + q(f.posts) + " --tags " + q(f.tags) + " --k-top-tags 4";
}

}  // namespace

TEST(Cli, UsageErrors) {
  auto dir = testutil::fresh_dir("cli_usage");
  EXPECT_EQ(run_cli("", dir).code, 1);
  EXPECT_EQ(run_cli("frobnicate", dir).code, 1);
  EXPECT_EQ(run_cli("train --input x", dir).code, 1);  // no --model-dir
  EXPECT_EQ(run_cli("ingest --input x --out-dir y --bogus", dir).code, 1);
  EXPECT_EQ(run_cli("--help", dir).code, 0);
}

TEST(Cli, BadValuesAreUsageErrors) {
  auto dir = testutil::fresh_dir("cli_badvalue");
  auto files = small_corpus(dir);
  auto r = run_cli("train " + corpus_args(files) + " --model-dir " + q(dir / "m") +
                       " --technique nonsense",
                   dir);
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("nonsense"), std::string::npos);
}

TEST(Cli, MissingInputIsDataError) {
  auto dir = testutil::fresh_dir("cli_missing");
  auto r = run_cli("ingest --input " + q(dir / "absent.xml") + " --out-dir " + q(dir / "o"), dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("error:"), std::string::npos);
}

TEST(Cli, StrictNonConvergenceExitsThree) {
  auto dir = testutil::fresh_dir("cli_strict");
  auto files = small_corpus(dir);
  std::string base = "train " + corpus_args(files) + " --model-dir " + q(dir / "m") +
                     " --kernel rbf --c 1000 --iterations 1";
  auto lenient = run_cli(base, dir);
  EXPECT_EQ(lenient.code, 0) << lenient.err;
  EXPECT_NE(lenient.err.find("warning"), std::string::npos);
  EXPECT_EQ(run_cli(base + " --strict", dir).code, 3);
}

TEST(Cli, StrictMalformedRecordIsDataError) {
  auto dir = testutil::fresh_dir("cli_malformed");
  auto files = small_corpus(dir);
  {
    std::ofstream p(files.posts, std::ios::app | std::ios::binary);
    p << "not a record\n";
  }
  std::string base = "ingest " + corpus_args(files) + " --out-dir " + q(dir / "o");
  EXPECT_EQ(run_cli(base, dir).code, 0);
  EXPECT_EQ(run_cli(base + " --strict", dir).code, 2);
}

TEST(Cli, FullFlow) {
  auto dir = testutil::fresh_dir("cli_flow");
  auto files = small_corpus(dir, 200);

  auto ingest = run_cli("ingest " + corpus_args(files) + " --out-dir " + q(dir / "clean"), dir);
  ASSERT_EQ(ingest.code, 0) << ingest.err;
  ASSERT_TRUE(fs::exists(dir / "clean" / "posts.tsv"));
  std::string labels = testutil::slurp(dir / "clean" / "labels.csv");
  EXPECT_EQ(labels.rfind("label,count\r\n", 0), 0u);

  testutil::CorpusFiles clean{dir / "clean" / "posts.tsv", dir / "clean" / "tags.tsv"};
  auto pre = run_cli("preprocess " + corpus_args(clean) + " --out-dir " + q(dir / "pre"), dir);
  ASSERT_EQ(pre.code, 0) << pre.err;
  for (const char* name : {"tfidf.txt", "svd.txt", "matrix.txt", "pipeline.txt"}) {
    EXPECT_TRUE(fs::exists(dir / "pre" / name)) << name;
  }

  auto train = run_cli("train " + corpus_args(clean) + " --model-dir " + q(dir / "model") +
                           " --solver dcd --kernel linear --c 10",
                       dir);
  ASSERT_EQ(train.code, 0) << train.err;
  EXPECT_NE(train.out.find("training error"), std::string::npos);

  auto eval = run_cli("evaluate " + corpus_args(clean) + " --model-dir " + q(dir / "model") +
                          " --out " + q(dir / "report.csv"),
                      dir);
  ASSERT_EQ(eval.code, 0) << eval.err;
  std::string report = testutil::slurp(dir / "report.csv");
  EXPECT_NE(report.find("subset_accuracy"), std::string::npos);
  EXPECT_NE(report.find("percentage_error"), std::string::npos);

  // The clean corpus re-read through the raw loader scores the same way.
  auto eval_raw = run_cli("evaluate " + corpus_args(files) + " --model-dir " + q(dir / "model"),
                          dir);
  EXPECT_EQ(eval_raw.code, 0) << eval_raw.err;

  qtag::SyntheticSpec s;
  s.n_posts = 200;
  s.n_tags = 4;
  s.n_rare_tags = 1;
  s.noise_vocabulary = 80;
  auto corpus = qtag::generate_synthetic(s);
  const auto& words = corpus.keywords.at(corpus.tags[0]);
  {
    std::ofstream post(dir / "post.txt", std::ios::binary);
    post << "a question\n<p>" << words[0] << ' ' << words[1] << ' ' << words[2] << "</p>\n";
  }
  auto pred = run_cli("predict --model-dir " + q(dir / "model") + " --post " + q(dir / "post.txt"),
                      dir);
  ASSERT_EQ(pred.code, 0) << pred.err;
  EXPECT_NE(pred.out.find(corpus.tags[0] + "\n"), std::string::npos) << pred.out;

  EXPECT_EQ(run_cli("predict --model-dir " + q(dir / "nomodel") + " --post " +
                        q(dir / "post.txt"),
                    dir)
                .code,
            2);
}

TEST(Cli, ConfigFileAndOverride) {
  auto dir = testutil::fresh_dir("cli_config");
  auto files = small_corpus(dir);
  {
    std::ofstream cfg(dir / "run.conf");
    cfg << "input = " << files.posts.string() << "\n"
        << "tags = " << files.tags.string() << "\n"
        << "k_top_tags = 4\n"
        << "out_dir = " << (dir / "from_config").string() << "\n";
  }
  auto r = run_cli("ingest --config " + q(dir / "run.conf"), dir);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "from_config" / "posts.tsv"));

  auto o = run_cli("ingest --config " + q(dir / "run.conf") + " --out-dir " +
                       q(dir / "from_flag") + " --k-top-tags 2",
                   dir);
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_TRUE(fs::exists(dir / "from_flag" / "posts.tsv"));
  std::string labels = testutil::slurp(dir / "from_flag" / "labels.csv");
  EXPECT_EQ(std::count(labels.begin(), labels.end(), '\n'), 3);
}

TEST(Cli, ExperimentIsDeterministic) {
  auto dir = testutil::fresh_dir("cli_experiment");
  auto files = small_corpus(dir, 120);
  std::string base = "experiment " + corpus_args(files) +
                     " --iteration-grid 30 --kernel-grid linear --c-grid 1000,0.001"
                     " --fixed-iterations 500 --kfold-k 2 --svd-rank-cap 30 --out-dir ";
  auto a = run_cli(base + q(dir / "a"), dir);
  ASSERT_EQ(a.code, 0) << a.err;
  auto b = run_cli(base + q(dir / "b"), dir);
  ASSERT_EQ(b.code, 0) << b.err;
  int compared = 0;
  for (const auto& entry : fs::directory_iterator(dir / "a")) {
    std::string name = entry.path().filename().string();
    if (name == "timings.log") continue;
    EXPECT_EQ(testutil::slurp(entry.path()), testutil::slurp(dir / "b" / name)) << name;
    ++compared;
  }
  EXPECT_GE(compared, 8);

  auto none = run_cli("experiment " + corpus_args(files) +
                          " --iteration-grid none --kernel-grid none --technique-grid ovr"
                          " --loss-grid hinge --no-cv --svd-rank-cap 30 --out-dir " +
                          q(dir / "c"),
                      dir);
  ASSERT_EQ(none.code, 0) << none.err;
  EXPECT_NE(none.out.find("1 cells"), std::string::npos) << none.out;
  EXPECT_FALSE(fs::exists(dir / "c" / "iterations_train.csv"));
  EXPECT_TRUE(fs::exists(dir / "c" / "technique_test.csv"));
}
