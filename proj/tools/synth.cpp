// qtag-synth: writes a seeded synthetic corpus in the line format.

#include <fstream>
#include <iostream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "qtag/common.hpp"
#include "qtag/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate a synthetic tagged question corpus"};
  qtag::SyntheticSpec spec;
  std::string out_dir;
  app.add_option("--out-dir", out_dir, "directory for posts.tsv and tags.tsv")->required();
  app.add_option("--posts", spec.n_posts, "number of posts");
  app.add_option("--tags", spec.n_tags, "number of main tags");
  app.add_option("--rare-tags", spec.n_rare_tags, "number of rare tags");
  app.add_option("--keywords-per-tag", spec.keywords_per_tag, "keywords owned by each tag");
  app.add_option("--planted-per-tag", spec.planted_per_tag, "keywords placed per assigned tag");
  app.add_option("--noise-vocabulary", spec.noise_vocabulary, "size of the noise word pool");
  app.add_option("--seed", spec.seed, "random seed");
  CLI11_PARSE(app, argc, argv);

  try {
    auto corpus = qtag::generate_synthetic(spec);
    std::filesystem::create_directories(out_dir);
    std::ofstream posts(std::filesystem::path(out_dir) / "posts.tsv", std::ios::binary);
    std::ofstream tags(std::filesystem::path(out_dir) / "tags.tsv", std::ios::binary);
    std::ofstream keywords(std::filesystem::path(out_dir) / "keywords.tsv", std::ios::binary);
    if (!posts || !tags || !keywords) throw qtag::DataError("cannot write output files");
    qtag::write_line_records(corpus.posts, posts, tags);
    for (const auto& tag : corpus.tags) {
      keywords << tag;
      for (const auto& k : corpus.keywords.at(tag)) keywords << '\t' << k;
      keywords << '\n';
    }
    std::cout << fmt::format("{} posts written to {}\n", corpus.posts.size(), out_dir);
  } catch (const qtag::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const qtag::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
