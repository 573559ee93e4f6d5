#pragma once

// Clean text -> normalized token lists.

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "qtag/ingest.hpp"

namespace qtag {

struct TokenDoc {
  std::int64_t id = 0;
  std::vector<std::string> tokens;
  std::vector<std::string> tags;
};

/// Dictionary-free lemmatizer: irregular-form exceptions first, then ordered
/// suffix rules (ies, es, s, ed, ing).
class Lemmatizer {
 public:
  /// Uses the bundled exception table.
  Lemmatizer();
  explicit Lemmatizer(std::map<std::string, std::string> exceptions);

  /// Reads a `form<TAB>lemma` table; `#` lines and blank lines are skipped.
  static Lemmatizer from_file(const std::filesystem::path& path);

  std::string lemmatize(std::string_view token) const;
  const std::map<std::string, std::string>& exceptions() const { return exceptions_; }

 private:
  std::map<std::string, std::string> exceptions_;
};

struct PipelineConfig {
  std::set<std::string> stopwords;
  /// Tokens kept whole by the tokenizer and never stemmed, e.g. "c++".
  std::set<std::string> preserve_terms;
  bool enable_stemming = true;
  bool enable_lemmatization = false;
  Lemmatizer lemmatizer;

  /// Bundled SMART stopwords, no preserve terms, stemming on.
  static PipelineConfig defaults();
  /// Throws InvalidArgument if a preserve term is also a stopword or is not
  /// lowercase.
  void validate() const;
};

/// Reads a one-token-per-line file; `#` lines and blank lines are skipped.
std::set<std::string> load_word_list(const std::filesystem::path& path);
std::set<std::string> parse_word_list(std::string_view text);

/// Contents of the bundled SMART stopword file.
std::string_view smart_stopwords_text();

/// Lowercases, extracts preserve terms by longest match, splits the rest on
/// non-alphanumerics, and drops pure-digit and single-character tokens.
std::vector<std::string> tokenize(std::string_view text, const PipelineConfig& config);

std::vector<std::string> remove_stopwords(std::vector<std::string> tokens,
                                          const PipelineConfig& config);

/// Porter stemmer (reference C implementation semantics). Tokens containing
/// anything other than a-z are returned unchanged, as are tokens of length
/// two or less.
std::string porter_stem(std::string_view token);

/// tokenize -> remove_stopwords -> lemmatize (if enabled) -> stem (if
/// enabled). Preserve terms bypass lemmatization and stemming.
TokenDoc run_pipeline(const CleanPost& post, const PipelineConfig& config);

}  // namespace qtag
