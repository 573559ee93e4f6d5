#include "qtag/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

#include "qtag/common.hpp"

namespace qtag {
namespace {

struct Attribute {
  std::string name;
  std::string value;  // entity-decoded
};

bool is_name_start(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_' || c == ':';
}

bool is_name_char(char c) {
  return is_name_start(c) || (c >= '0' && c <= '9') || c == '-' || c == '.';
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

// Parses the attribute list of a single-line `<row ... />` element. Returns an
// error message on malformed input.
std::optional<std::string> parse_row_attributes(std::string_view line,
                                                std::vector<Attribute>& attrs) {
  std::size_t i = 4;  // past "<row"
  if (line.size() <= i || !(is_space(line[i]) || line[i] == '/')) {
    return "expected whitespace after <row";
  }
  while (true) {
    while (i < line.size() && is_space(line[i])) ++i;
    if (i >= line.size()) return "row element not closed on its line";
    if (line[i] == '/') {
      if (i + 1 < line.size() && line[i + 1] == '>') {
        if (!trim(line.substr(i + 2)).empty()) return "trailing content after row element";
        return std::nullopt;
      }
      return "stray '/' in row element";
    }
    if (line[i] == '>') {
      // <row ...></row> is tolerated.
      if (trim(line.substr(i + 1)) == "</row>") return std::nullopt;
      return "row element must be self-closing";
    }
    if (!is_name_start(line[i])) return fmt::format("bad attribute name at column {}", i + 1);
    std::size_t name_start = i;
    while (i < line.size() && is_name_char(line[i])) ++i;
    std::string name(line.substr(name_start, i - name_start));
    while (i < line.size() && is_space(line[i])) ++i;
    if (i >= line.size() || line[i] != '=') return fmt::format("attribute {} has no value", name);
    ++i;
    while (i < line.size() && is_space(line[i])) ++i;
    if (i >= line.size() || (line[i] != '"' && line[i] != '\'')) {
      return fmt::format("attribute {} value is not quoted", name);
    }
    char quote = line[i++];
    auto close = line.find(quote, i);
    if (close == std::string_view::npos) return fmt::format("unterminated value for {}", name);
    std::string_view raw = line.substr(i, close - i);
    if (raw.find('<') != std::string_view::npos) {
      return fmt::format("raw '<' in value of {}", name);
    }
    i = close + 1;
    for (const auto& a : attrs) {
      if (a.name == name) return fmt::format("duplicate attribute {}", name);
    }
    attrs.push_back({std::move(name), decode_entities(raw)});
  }
}

const std::string* find_attr(const std::vector<Attribute>& attrs, std::string_view name) {
  for (const auto& a : attrs) {
    if (a.name == name) return &a.value;
  }
  return nullptr;
}

std::optional<std::int64_t> parse_positive_id(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  if (!std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    return std::nullopt;
  }
  try {
    auto v = parse_int(text);
    if (v <= 0) return std::nullopt;
    return v;
  } catch (const DataError&) {
    return std::nullopt;
  }
}

// Normalizes tag strings and removes duplicates, keeping first occurrence.
std::optional<std::string> finish_tags(std::vector<std::string>& tags) {
  std::vector<std::string> out;
  for (auto& t : tags) {
    std::string tag = to_lower_ascii(trim(t));
    if (tag.empty()) return "empty tag";
    if (tag.find_first_of("<>") != std::string::npos) return "angle bracket inside tag";
    if (std::find(out.begin(), out.end(), tag) == out.end()) out.push_back(std::move(tag));
  }
  tags = std::move(out);
  return std::nullopt;
}

// Decoded Tags attribute: "<a><b>" (classic dumps) or "|a|b|" (newer dumps).
std::optional<std::string> parse_tag_attribute(std::string_view value,
                                               std::vector<std::string>& tags) {
  value = trim(value);
  if (value.empty()) return std::nullopt;
  if (value.front() == '|') {
    for (auto part : split(value, '|')) {
      if (!part.empty()) tags.emplace_back(part);
    }
    return finish_tags(tags);
  }
  std::size_t i = 0;
  while (i < value.size()) {
    if (value[i] != '<') return "tag list must look like <a><b>";
    auto close = value.find('>', i);
    if (close == std::string_view::npos) return "unclosed tag in tag list";
    tags.emplace_back(value.substr(i + 1, close - i - 1));
    i = close + 1;
  }
  return finish_tags(tags);
}

void report(ParseResult& result, const ParseOptions& options, std::size_t line,
            std::string message) {
  if (options.strict) {
    throw DataError(fmt::format("line {}: {}", line, message));
  }
  result.errors.push_back({line, std::move(message)});
}

}  // namespace

std::optional<std::size_t> LabelCatalog::index_of(std::string_view tag) const {
  auto it = std::find(labels.begin(), labels.end(), tag);
  if (it == labels.end()) return std::nullopt;
  return static_cast<std::size_t>(it - labels.begin());
}

ParseResult parse_posts_xml(std::istream& in, const ParseOptions& options) {
  ParseResult result;
  std::unordered_set<std::int64_t> seen;
  std::string line_buf;
  std::size_t line_no = 0;
  while (std::getline(in, line_buf)) {
    ++line_no;
    std::string_view line = trim(line_buf);
    if (line.empty() || line.starts_with("<?xml") || line.starts_with("<posts") ||
        line.starts_with("</posts") || line.starts_with("<!--")) {
      continue;
    }
    if (!line.starts_with("<row")) {
      report(result, options, line_no, "unexpected content outside a row element");
      continue;
    }
    std::vector<Attribute> attrs;
    if (auto err = parse_row_attributes(line, attrs)) {
      report(result, options, line_no, *err);
      continue;
    }
    const std::string* id_text = find_attr(attrs, "Id");
    if (id_text == nullptr) {
      report(result, options, line_no, "row has no Id attribute");
      continue;
    }
    auto id = parse_positive_id(*id_text);
    if (!id) {
      report(result, options, line_no, fmt::format("invalid Id '{}'", *id_text));
      continue;
    }
    const std::string* type = find_attr(attrs, "PostTypeId");
    if (type == nullptr || trim(*type) != "1") continue;
    const std::string* tag_attr = find_attr(attrs, "Tags");
    if (tag_attr == nullptr) continue;

    RawPost post;
    post.id = *id;
    if (auto err = parse_tag_attribute(*tag_attr, post.tags)) {
      report(result, options, line_no, fmt::format("post {}: {}", *id, *err));
      continue;
    }
    if (post.tags.empty()) continue;
    if (!seen.insert(*id).second) {
      report(result, options, line_no, fmt::format("duplicate post Id {}", *id));
      continue;
    }
    if (const auto* title = find_attr(attrs, "Title")) post.title = *title;
    if (const auto* body = find_attr(attrs, "Body")) post.body_html = *body;
    result.posts.push_back(std::move(post));
  }
  return result;
}

ParseResult parse_line_records(std::istream& posts, std::istream& tags,
                               const ParseOptions& options) {
  ParseResult result;
  std::unordered_map<std::int64_t, std::vector<std::string>> tag_map;
  std::string line;
  std::size_t line_no = 0;
  // Sidecar problems are reported with line numbers of the sidecar file.
  while (std::getline(tags, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 2) {
      report(result, options, line_no, "tag sidecar line must be id<TAB>tags");
      continue;
    }
    auto id = parse_positive_id(fields[0]);
    if (!id) {
      report(result, options, line_no, fmt::format("invalid Id '{}' in tag sidecar", fields[0]));
      continue;
    }
    std::vector<std::string> list;
    for (auto part : split(fields[1], ',')) {
      if (!trim(part).empty()) list.emplace_back(trim(part));
    }
    if (auto err = finish_tags(list)) {
      report(result, options, line_no, fmt::format("post {}: {}", *id, *err));
      continue;
    }
    if (!tag_map.emplace(*id, std::move(list)).second) {
      report(result, options, line_no, fmt::format("duplicate Id {} in tag sidecar", *id));
    }
  }

  std::unordered_set<std::int64_t> seen;
  line_no = 0;
  while (std::getline(posts, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 3) {
      report(result, options, line_no, "post line must be id<TAB>title<TAB>body");
      continue;
    }
    auto id = parse_positive_id(fields[0]);
    if (!id) {
      report(result, options, line_no, fmt::format("invalid Id '{}'", fields[0]));
      continue;
    }
    auto it = tag_map.find(*id);
    if (it == tag_map.end() || it->second.empty()) {
      report(result, options, line_no, fmt::format("post {} has no tags in sidecar", *id));
      continue;
    }
    if (!seen.insert(*id).second) {
      report(result, options, line_no, fmt::format("duplicate post Id {}", *id));
      continue;
    }
    result.posts.push_back(
        RawPost{*id, std::string(fields[1]), std::string(fields[2]), it->second});
  }
  return result;
}

ParseResult load_posts(const std::filesystem::path& posts_path,
                       const std::optional<std::filesystem::path>& tags_path,
                       const ParseOptions& options) {
  std::ifstream posts(posts_path, std::ios::binary);
  if (!posts) throw DataError(fmt::format("cannot open {}", posts_path.string()));
  if (!tags_path) return parse_posts_xml(posts, options);
  std::ifstream tags(*tags_path, std::ios::binary);
  if (!tags) throw DataError(fmt::format("cannot open {}", tags_path->string()));
  return parse_line_records(posts, tags, options);
}

std::pair<LabelCatalog, std::vector<CleanPost>> select_labels(std::span<const CleanPost> posts,
                                                              std::size_t k) {
  if (k == 0) throw InvalidArgument("select_labels: k must be at least 1");
  if (posts.empty()) throw InvalidArgument("select_labels: empty corpus");

  std::map<std::string, std::size_t> freq;
  for (const auto& p : posts) {
    std::vector<std::string_view> distinct;
    for (const auto& t : p.tags) {
      if (std::find(distinct.begin(), distinct.end(), t) == distinct.end()) {
        distinct.push_back(t);
        ++freq[t];
      }
    }
  }
  if (freq.size() < k) {
    throw DataError(fmt::format("corpus has {} distinct tags but {} were requested ({} short)",
                                freq.size(), k, k - freq.size()));
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
  // std::map iteration is already lexicographic, so a stable sort on count
  // keeps the tie order.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  ranked.resize(k);

  LabelCatalog catalog;
  for (auto& [tag, count] : ranked) {
    catalog.labels.push_back(tag);
    catalog.counts.push_back(count);
  }

  std::vector<CleanPost> kept;
  for (const auto& p : posts) {
    CleanPost q{p.id, p.text, {}};
    for (const auto& t : p.tags) {
      if (catalog.index_of(t) &&
          std::find(q.tags.begin(), q.tags.end(), t) == q.tags.end()) {
        q.tags.push_back(t);
      }
    }
    if (!q.tags.empty()) kept.push_back(std::move(q));
  }
  return {std::move(catalog), std::move(kept)};
}

}  // namespace qtag
