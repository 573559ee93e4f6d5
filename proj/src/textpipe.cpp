#include "qtag/textpipe.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "qtag/common.hpp"

namespace qtag {
namespace {

// Bytes >= 0x80 count as word characters so UTF-8 words stay in one piece.
bool is_word_char(char c) {
  auto u = static_cast<unsigned char>(c);
  return (u >= 'a' && u <= 'z') || (u >= '0' && u <= '9') || u >= 0x80;
}

bool is_pure_digits(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

// Longest preserve term matching `text` at `pos`. A term edge that is a word
// character needs a non-word neighbor (or the string edge) on that side.
std::size_t match_preserve(std::string_view text, std::size_t pos,
                           const std::vector<std::string_view>& by_length) {
  for (auto term : by_length) {
    if (term.size() > text.size() - pos) continue;
    if (text.compare(pos, term.size(), term) != 0) continue;
    if (is_word_char(term.front()) && pos > 0 && is_word_char(text[pos - 1])) continue;
    std::size_t end = pos + term.size();
    if (is_word_char(term.back()) && end < text.size() && is_word_char(text[end])) continue;
    return term.size();
  }
  return 0;
}

}  // namespace

PipelineConfig PipelineConfig::defaults() {
  PipelineConfig config;
  config.stopwords = parse_word_list(smart_stopwords_text());
  return config;
}

void PipelineConfig::validate() const {
  for (const auto& term : preserve_terms) {
    if (term.empty()) throw InvalidArgument("empty preserve term");
    if (term != to_lower_ascii(term)) {
      throw InvalidArgument(fmt::format("preserve term '{}' must be lowercase", term));
    }
    if (stopwords.contains(term)) {
      throw InvalidArgument(fmt::format("'{}' is both a preserve term and a stopword", term));
    }
  }
}

std::set<std::string> parse_word_list(std::string_view text) {
  std::set<std::string> words;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    words.insert(to_lower_ascii(t));
  }
  return words;
}

std::set<std::string> load_word_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open word list {}", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_word_list(buf.str());
}

std::vector<std::string> tokenize(std::string_view text, const PipelineConfig& config) {
  std::string lower = to_lower_ascii(text);
  std::vector<std::string_view> by_length(config.preserve_terms.begin(),
                                          config.preserve_terms.end());
  std::stable_sort(by_length.begin(), by_length.end(),
                   [](auto a, auto b) { return a.size() > b.size(); });

  std::vector<std::string> tokens;
  std::string run;
  auto flush = [&] {
    if (run.size() > 1 && !is_pure_digits(run)) tokens.push_back(run);
    run.clear();
  };
  std::string_view s = lower;
  std::size_t i = 0;
  while (i < s.size()) {
    if (!by_length.empty()) {
      if (std::size_t len = match_preserve(s, i, by_length)) {
        flush();
        tokens.emplace_back(s.substr(i, len));
        i += len;
        continue;
      }
    }
    if (is_word_char(s[i])) {
      run += s[i];
    } else {
      flush();
    }
    ++i;
  }
  flush();
  return tokens;
}

std::vector<std::string> remove_stopwords(std::vector<std::string> tokens,
                                          const PipelineConfig& config) {
  std::erase_if(tokens, [&](const std::string& t) { return config.stopwords.contains(t); });
  return tokens;
}

TokenDoc run_pipeline(const CleanPost& post, const PipelineConfig& config) {
  TokenDoc doc;
  doc.id = post.id;
  doc.tags = post.tags;
  doc.tokens = remove_stopwords(tokenize(post.text, config), config);
  for (auto& token : doc.tokens) {
    if (config.preserve_terms.contains(token)) continue;
    if (config.enable_lemmatization) token = config.lemmatizer.lemmatize(token);
    if (config.enable_stemming) token = porter_stem(token);
  }
  // Normalization can land on a stopword ("others" -> "other").
  if (config.enable_lemmatization || config.enable_stemming) {
    doc.tokens = remove_stopwords(std::move(doc.tokens), config);
  }
  return doc;
}

}  // namespace qtag
