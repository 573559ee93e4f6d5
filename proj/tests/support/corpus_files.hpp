#pragma once

// Writes synthetic corpora to disk in the line format for end-to-end tests.

#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include "qtag/synthetic.hpp"

namespace testutil {

struct CorpusFiles {
  std::filesystem::path posts;
  std::filesystem::path tags;
};

inline std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("qtag_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline CorpusFiles write_corpus(const std::filesystem::path& dir,
                                const std::vector<qtag::RawPost>& posts) {
  CorpusFiles files{dir / "posts.tsv", dir / "tags.tsv"};
  std::ofstream p(files.posts, std::ios::binary);
  std::ofstream t(files.tags, std::ios::binary);
  qtag::write_line_records(posts, p, t);
  return files;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace testutil
