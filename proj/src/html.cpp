#include <array>
#include <cctype>

#include "qtag/common.hpp"
#include "qtag/ingest.hpp"

namespace qtag {
namespace {

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

// Decodes one reference starting at text[i] == '&'. On success appends the
// replacement and returns the length consumed; returns 0 if not a reference.
std::size_t decode_one(std::string_view text, std::size_t i, std::string& out) {
  auto semi = text.find(';', i);
  if (semi == std::string_view::npos || semi - i > 12) return 0;
  std::string_view name = text.substr(i + 1, semi - i - 1);
  static constexpr std::array<std::pair<std::string_view, std::string_view>, 6> kNamed{{
      {"amp", "&"}, {"lt", "<"}, {"gt", ">"}, {"quot", "\""}, {"apos", "'"}, {"nbsp", " "}}};
  for (const auto& [n, rep] : kNamed) {
    if (name == n) {
      out += rep;
      return semi - i + 1;
    }
  }
  if (name.size() >= 2 && name[0] == '#') {
    std::uint32_t cp = 0;
    bool hex = name[1] == 'x' || name[1] == 'X';
    std::string_view digits = name.substr(hex ? 2 : 1);
    if (digits.empty()) return 0;
    for (char c : digits) {
      int d;
      if (c >= '0' && c <= '9') {
        d = c - '0';
      } else if (hex && c >= 'a' && c <= 'f') {
        d = c - 'a' + 10;
      } else if (hex && c >= 'A' && c <= 'F') {
        d = c - 'A' + 10;
      } else {
        return 0;
      }
      cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(d);
      if (cp > 0x10FFFF) return 0;
    }
    if (cp == 0 || (cp >= 0xD800 && cp <= 0xDFFF)) return 0;
    append_utf8(out, cp);
    return semi - i + 1;
  }
  return 0;
}

bool is_ascii_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

bool is_block_tag(std::string_view name) {
  static constexpr std::array<std::string_view, 24> kBlock{
      "p",  "div", "br", "li",    "ul",    "ol",  "h1",    "h2",
      "h3", "h4",  "h5", "h6",    "blockquote", "tr", "td", "th",
      "table", "hr", "dd", "dt", "dl", "section", "img", "body"};
  for (auto b : kBlock) {
    if (b == name) return true;
  }
  return false;
}

// Collapses whitespace runs to one space, trims, and breaks up any '<' that
// would read as the start of a tag.
std::string normalize_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out += ' ';
      pending_space = false;
    }
    out += c;
    if (c == '<' && i + 1 < text.size() &&
        (is_ascii_alpha(text[i + 1]) || text[i + 1] == '/' || text[i + 1] == '!')) {
      out += ' ';
    }
  }
  return out;
}

std::string strip_markup(std::string_view html) {
  std::string out;
  std::string segment;  // raw text awaiting entity decoding
  int suppressed = 0;   // open <code>/<pre> elements
  auto flush = [&] {
    if (suppressed == 0) out += decode_entities(segment);
    segment.clear();
  };

  std::size_t i = 0;
  while (i < html.size()) {
    char c = html[i];
    bool tag_start = c == '<' && i + 1 < html.size() &&
                     (is_ascii_alpha(html[i + 1]) || html[i + 1] == '/' || html[i + 1] == '!');
    if (!tag_start) {
      segment += c;
      ++i;
      continue;
    }
    flush();
    if (html.substr(i, 4) == "<!--") {
      auto end = html.find("-->", i + 4);
      i = end == std::string_view::npos ? html.size() : end + 3;
      out += ' ';
      continue;
    }
    // Find the closing '>' outside quoted attribute values. An unterminated
    // tag runs to the end of input.
    std::size_t j = i + 1;
    char quote = 0;
    while (j < html.size()) {
      char d = html[j];
      if (quote != 0) {
        if (d == quote) quote = 0;
      } else if (d == '"' || d == '\'') {
        quote = d;
      } else if (d == '>') {
        break;
      }
      ++j;
    }
    std::string_view tag = html.substr(i + 1, (j < html.size() ? j : html.size()) - i - 1);
    i = j < html.size() ? j + 1 : html.size();

    bool closing = !tag.empty() && tag[0] == '/';
    if (closing) tag.remove_prefix(1);
    std::size_t name_len = 0;
    while (name_len < tag.size() &&
           (is_ascii_alpha(tag[name_len]) || (tag[name_len] >= '0' && tag[name_len] <= '9'))) {
      ++name_len;
    }
    std::string name = to_lower_ascii(tag.substr(0, name_len));
    bool self_closing = !tag.empty() && tag.back() == '/';

    if (name == "code" || name == "pre") {
      if (closing) {
        if (suppressed > 0) --suppressed;
      } else if (!self_closing) {
        ++suppressed;
      }
      out += ' ';
    } else if (is_block_tag(name)) {
      out += ' ';
    }
  }
  flush();
  return out;
}

}  // namespace

std::string decode_entities(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) {
    if (text[i] == '&') {
      if (std::size_t used = decode_one(text, i, out)) {
        i += used;
        continue;
      }
    }
    out += text[i++];
  }
  return out;
}

CleanPost strip_html_code(const RawPost& post) {
  std::string title = normalize_text(post.title);
  std::string body = normalize_text(strip_markup(post.body_html));
  CleanPost clean;
  clean.id = post.id;
  clean.tags = post.tags;
  if (title.empty()) {
    clean.text = std::move(body);
  } else if (body.empty()) {
    clean.text = std::move(title);
  } else {
    clean.text = title + " " + body;
  }
  return clean;
}

}  // namespace qtag
