#include <fstream>

#include <fmt/format.h>

#include "qtag/common.hpp"
#include "qtag/textpipe.hpp"

namespace qtag {
namespace {

// Irregular inflections a suffix rule would get wrong.
std::map<std::string, std::string> bundled_exceptions() {
  return {
      {"am", "be"},         {"are", "be"},        {"is", "be"},         {"was", "be"},
      {"were", "be"},       {"been", "be"},       {"being", "be"},      {"ate", "eat"},
      {"eaten", "eat"},     {"better", "good"},   {"best", "good"},     {"worse", "bad"},
      {"worst", "bad"},     {"mice", "mouse"},    {"geese", "goose"},   {"feet", "foot"},
      {"teeth", "tooth"},   {"men", "man"},       {"women", "woman"},   {"children", "child"},
      {"people", "person"}, {"indices", "index"}, {"vertices", "vertex"}, {"matrices", "matrix"},
      {"data", "datum"},    {"criteria", "criterion"}, {"analyses", "analysis"},
      {"went", "go"},       {"gone", "go"},       {"did", "do"},        {"done", "do"},
      {"does", "do"},       {"had", "have"},      {"has", "have"},      {"made", "make"},
      {"ran", "run"},       {"began", "begin"},   {"begun", "begin"},   {"wrote", "write"},
      {"written", "write"}, {"took", "take"},     {"taken", "take"},    {"got", "get"},
      {"gotten", "get"},    {"gave", "give"},     {"given", "give"},    {"knew", "know"},
      {"known", "know"},    {"saw", "see"},       {"seen", "see"},      {"found", "find"},
      {"thought", "think"}, {"brought", "bring"}, {"bought", "buy"},    {"caught", "catch"},
      {"taught", "teach"},  {"sent", "send"},     {"built", "build"},   {"spent", "spend"},
      {"left", "leave"},    {"kept", "keep"},     {"felt", "feel"},     {"meant", "mean"},
      {"held", "hold"},     {"told", "tell"},     {"sold", "sell"},     {"stood", "stand"},
      {"understood", "understand"}, {"chose", "choose"}, {"chosen", "choose"},
      {"broke", "break"},   {"broken", "break"},  {"spoke", "speak"},   {"spoken", "speak"},
      {"drove", "drive"},   {"driven", "drive"},  {"rose", "rise"},     {"risen", "rise"},
      {"fell", "fall"},     {"fallen", "fall"},   {"threw", "throw"},   {"thrown", "throw"},
      {"grew", "grow"},     {"grown", "grow"},    {"drew", "draw"},     {"drawn", "draw"},
      {"flew", "fly"},      {"flown", "fly"},     {"hid", "hide"},      {"hidden", "hide"},
      {"lost", "lose"},     {"paid", "pay"},      {"said", "say"},      {"led", "lead"},
      {"fed", "feed"},      {"met", "meet"},      {"won", "win"},       {"sat", "sit"},
      {"lay", "lie"},       {"lain", "lie"},      {"slept", "sleep"},   {"ought", "ought"},
  };
}

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

bool has_vowel(std::string_view s) {
  for (char c : s) {
    if (is_vowel(c) || c == 'y') return true;
  }
  return false;
}

bool is_consonant(char c) { return c >= 'a' && c <= 'z' && !is_vowel(c); }

// Restores a stem left by removing -ed/-ing: undoubles a final double
// consonant (stopp -> stop) and re-adds a silent e after a short
// consonant-vowel-consonant stem (hop -> hope).
std::string repair_stem(std::string stem) {
  std::size_t n = stem.size();
  if (n >= 2 && stem[n - 1] == stem[n - 2] && is_consonant(stem[n - 1]) &&
      stem[n - 1] != 'l' && stem[n - 1] != 's' && stem[n - 1] != 'z') {
    stem.pop_back();
    return stem;
  }
  if (n == 3 && is_consonant(stem[0]) && is_vowel(stem[1]) && is_consonant(stem[2]) &&
      stem[2] != 'w' && stem[2] != 'x' && stem[2] != 'y') {
    stem += 'e';
  }
  return stem;
}

}  // namespace

Lemmatizer::Lemmatizer() : exceptions_(bundled_exceptions()) {}

Lemmatizer::Lemmatizer(std::map<std::string, std::string> exceptions)
    : exceptions_(std::move(exceptions)) {}

Lemmatizer Lemmatizer::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open lemma table {}", path.string()));
  std::map<std::string, std::string> table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto fields = split(t, '\t');
    if (fields.size() != 2 || trim(fields[0]).empty() || trim(fields[1]).empty()) {
      throw DataError(fmt::format("{}:{}: expected form<TAB>lemma", path.string(), line_no));
    }
    table[to_lower_ascii(trim(fields[0]))] = to_lower_ascii(trim(fields[1]));
  }
  return Lemmatizer(std::move(table));
}

std::string Lemmatizer::lemmatize(std::string_view token) const {
  if (auto it = exceptions_.find(std::string(token)); it != exceptions_.end()) {
    return it->second;
  }
  std::string w(token);
  auto ends = [&w](std::string_view s) { return w.size() > s.size() && w.ends_with(s); };
  auto cut = [&w](std::size_t n) { return w.substr(0, w.size() - n); };

  if (ends("ies") && w.size() > 4) return cut(3) + "y";
  if (ends("es") && w.size() > 3) {
    for (std::string_view s : {"sses", "xes", "ches", "shes", "zzes"}) {
      if (w.ends_with(s)) return cut(2);
    }
    return cut(1);
  }
  if (ends("s") && w.size() > 3) {
    if (ends("ss") || ends("us") || ends("is")) return w;
    return cut(1);
  }
  if (ends("ed") && w.size() > 4 && has_vowel(cut(2))) {
    return repair_stem(cut(2));
  }
  if (ends("ing") && w.size() > 5 && has_vowel(cut(3))) {
    return repair_stem(cut(3));
  }
  return w;
}

}  // namespace qtag
