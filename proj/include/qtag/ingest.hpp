#pragma once

// Reading StackExchange dumps into question posts, HTML/code stripping, and
// restriction of a corpus to its most frequent tags.

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qtag {

struct RawPost {
  std::int64_t id = 0;
  std::string title;
  std::string body_html;
  std::vector<std::string> tags;
};

struct CleanPost {
  std::int64_t id = 0;
  std::string text;
  std::vector<std::string> tags;
};

/// The K labels in force, most frequent first (ties: lexicographic).
struct LabelCatalog {
  std::vector<std::string> labels;
  std::vector<std::size_t> counts;

  std::size_t size() const { return labels.size(); }
  /// Position of `tag` in the catalog, or nullopt.
  std::optional<std::size_t> index_of(std::string_view tag) const;
};

struct RecordError {
  std::size_t line = 0;  // 1-based line in the input where the record starts
  std::string message;
};

struct ParseOptions {
  /// Abort with DataError on the first malformed record instead of
  /// collecting it and continuing.
  bool strict = false;
};

struct ParseResult {
  std::vector<RawPost> posts;
  std::vector<RecordError> errors;
};

/// Parses a StackExchange `Posts.xml` dump. Only question rows
/// (PostTypeId="1") carrying a non-empty Tags attribute are returned, in
/// input order.
ParseResult parse_posts_xml(std::istream& in, const ParseOptions& options = {});

/// Parses the line-delimited format: `id<TAB>title<TAB>body` per line plus a
/// sidecar of `id<TAB>tag1,tag2,...` lines.
ParseResult parse_line_records(std::istream& posts, std::istream& tags,
                               const ParseOptions& options = {});

/// Opens `posts_path` and dispatches on format: with a tag sidecar the line
/// format is assumed, without one the XML dump format.
ParseResult load_posts(const std::filesystem::path& posts_path,
                       const std::optional<std::filesystem::path>& tags_path,
                       const ParseOptions& options = {});

/// Decodes XML/HTML character references: the five predefined entities,
/// &nbsp; (as a plain space), and decimal/hex numeric references (emitted
/// as UTF-8). Unknown references are left verbatim.
std::string decode_entities(std::string_view text);

/// Removes markup from a post body. Content of <code> and <pre> elements is
/// dropped entirely, other tags are removed keeping their text, entities are
/// decoded and whitespace runs collapse to one space. The result is
/// `title + " " + body`.
CleanPost strip_html_code(const RawPost& post);

/// Keeps the `k` most frequent tags. Posts lose tags outside the catalog and
/// posts left with no tags are dropped. Throws DataError if the corpus has
/// fewer than `k` distinct tags.
std::pair<LabelCatalog, std::vector<CleanPost>> select_labels(
    std::span<const CleanPost> posts, std::size_t k);

}  // namespace qtag
