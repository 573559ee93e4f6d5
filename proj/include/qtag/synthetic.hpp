#pragma once

// Seeded synthetic question corpus: every tag owns a few invented keywords,
// and a post's text contains keywords of each of its tags mixed with noise
// words. Code blocks carry keywords of unrelated tags, so a pipeline that
// fails to drop code content is penalized.

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "qtag/ingest.hpp"

namespace qtag {

struct SyntheticSpec {
  std::size_t n_posts = 1000;
  std::size_t n_tags = 10;
  /// Extra low-frequency tags that a top-n_tags selection should drop.
  std::size_t n_rare_tags = 2;
  std::size_t keywords_per_tag = 4;
  /// Distinct keywords of each assigned tag placed in a post.
  std::size_t planted_per_tag = 2;
  std::size_t noise_vocabulary = 300;
  std::size_t min_noise_words = 8;
  std::size_t max_noise_words = 20;
  std::size_t max_tags_per_post = 3;
  /// Probability that a post carries a decoy code block.
  double code_probability = 0.3;
  std::uint64_t seed = 7;

  void validate() const;
};

struct SyntheticCorpus {
  std::vector<RawPost> posts;
  /// Tag names, the n_tags main tags first (most frequent by design).
  std::vector<std::string> tags;
  std::map<std::string, std::vector<std::string>> keywords;
};

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec);

/// Writes posts in the line format (`id<TAB>title<TAB>body`) and the tag
/// sidecar (`id<TAB>tag1,tag2`). Tabs and newlines inside fields become
/// spaces.
void write_line_records(const std::vector<RawPost>& posts, std::ostream& posts_out,
                        std::ostream& tags_out);

}  // namespace qtag
