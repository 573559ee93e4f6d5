#include "qtag/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "qtag/common.hpp"
#include "qtag/textpipe.hpp"

namespace qtag {
namespace {

constexpr std::string_view kConsonants = "bdfgklmnprstvz";
constexpr std::string_view kVowels = "aeiou";
constexpr std::string_view kFinals = "kmnprt";

const std::vector<std::string> kTagNames = {
    "java", "python", "javascript", "android", "php", "c#", "jquery", "html",
    "ios",  "c++",    "haskell",    "fortran", "ruby", "perl", "scala", "rust"};

// Invented words whose stems are distinct from each other and from the
// stopword list, so planted keywords survive preprocessing intact.
class WordMaker {
 public:
  explicit WordMaker(Rng& rng) : rng_(rng), stopwords_(parse_word_list(smart_stopwords_text())) {}

  std::string make() {
    while (true) {
      std::string w;
      std::size_t syllables = 2 + rng_.below(2);
      for (std::size_t s = 0; s < syllables; ++s) {
        w += kConsonants[rng_.below(kConsonants.size())];
        w += kVowels[rng_.below(kVowels.size())];
      }
      w += kFinals[rng_.below(kFinals.size())];
      if (stopwords_.contains(w)) continue;
      std::string stem = porter_stem(w);
      if (stem != w || !stems_.insert(stem).second) continue;
      return w;
    }
  }

 private:
  Rng& rng_;
  std::set<std::string> stopwords_;
  std::set<std::string> stems_;
};

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& items) {
  return items[static_cast<std::size_t>(rng.below(items.size()))];
}

// Weighted draw without replacement of `count` distinct indices.
std::vector<std::size_t> draw_tags(Rng& rng, const std::vector<double>& weights,
                                   std::size_t count) {
  std::vector<double> w = weights;
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < count; ++k) {
    double total = 0.0;
    for (double x : w) total += x;
    double u = rng.uniform() * total;
    std::size_t i = 0;
    for (; i + 1 < w.size(); ++i) {
      if (u < w[i]) break;
      u -= w[i];
    }
    out.push_back(i);
    w[i] = 0.0;
  }
  return out;
}

std::string join(const std::vector<std::string>& words, std::size_t from, std::size_t to) {
  std::string out;
  for (std::size_t i = from; i < to; ++i) {
    if (!out.empty()) out += ' ';
    out += words[i];
  }
  return out;
}

std::string sanitize(std::string_view field) {
  std::string out(field);
  std::replace_if(
      out.begin(), out.end(), [](char c) { return c == '\t' || c == '\n' || c == '\r'; }, ' ');
  return out;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (n_posts == 0) throw InvalidArgument("synthetic corpus needs at least one post");
  if (n_tags < 2) throw InvalidArgument("synthetic corpus needs at least two tags");
  if (keywords_per_tag == 0 || planted_per_tag == 0 || planted_per_tag > keywords_per_tag) {
    throw InvalidArgument("planted_per_tag must be in [1, keywords_per_tag]");
  }
  if (max_tags_per_post == 0 || max_tags_per_post > n_tags) {
    throw InvalidArgument("max_tags_per_post must be in [1, n_tags]");
  }
  if (min_noise_words > max_noise_words || noise_vocabulary == 0) {
    throw InvalidArgument("bad noise word settings");
  }
  if (!(code_probability >= 0.0 && code_probability <= 1.0)) {
    throw InvalidArgument("code_probability must be in [0, 1]");
  }
}

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  WordMaker maker(rng);
  SyntheticCorpus corpus;

  const std::size_t total_tags = spec.n_tags + spec.n_rare_tags;
  for (std::size_t t = 0; t < total_tags; ++t) {
    corpus.tags.push_back(t < kTagNames.size() ? kTagNames[t] : fmt::format("tag{}", t));
  }
  for (const auto& tag : corpus.tags) {
    auto& kw = corpus.keywords[tag];
    for (std::size_t i = 0; i < spec.keywords_per_tag; ++i) kw.push_back(maker.make());
  }
  std::vector<std::string> noise;
  for (std::size_t i = 0; i < spec.noise_vocabulary; ++i) noise.push_back(maker.make());

  // Mildly skewed main-tag popularity gives the catalog a definite order.
  std::vector<double> weights;
  for (std::size_t t = 0; t < spec.n_tags; ++t) {
    weights.push_back(1.0 / std::pow(static_cast<double>(t) + 1.0, 0.5));
  }

  for (std::size_t p = 0; p < spec.n_posts; ++p) {
    // Tag count: about half single-tag posts, the rest spread evenly.
    std::size_t n_assigned = 1;
    if (spec.max_tags_per_post > 1 && rng.uniform() >= 0.5) {
      n_assigned = 2 + static_cast<std::size_t>(rng.below(spec.max_tags_per_post - 1));
    }
    std::vector<std::size_t> tag_ids = draw_tags(rng, weights, n_assigned);
    if (spec.n_rare_tags > 0 && rng.uniform() < 0.03) {
      tag_ids.push_back(spec.n_tags + static_cast<std::size_t>(rng.below(spec.n_rare_tags)));
    }

    std::vector<std::string> words;
    for (std::size_t t : tag_ids) {
      std::vector<std::string> kw = corpus.keywords[corpus.tags[t]];
      rng.shuffle(std::span<std::string>(kw));
      words.insert(words.end(), kw.begin(),
                   kw.begin() + static_cast<std::ptrdiff_t>(spec.planted_per_tag));
    }
    std::size_t n_noise =
        spec.min_noise_words +
        static_cast<std::size_t>(rng.below(spec.max_noise_words - spec.min_noise_words + 1));
    for (std::size_t i = 0; i < n_noise; ++i) words.push_back(pick(rng, noise));
    rng.shuffle(std::span<std::string>(words));

    // The title takes the first three words; the rest fill two paragraphs.
    std::size_t title_len = std::min<std::size_t>(3, words.size());
    std::size_t mid = title_len + (words.size() - title_len) / 2;
    RawPost post;
    post.id = static_cast<std::int64_t>(p + 1);
    post.title = join(words, 0, title_len);
    if (!post.title.empty()) post.title[0] = static_cast<char>(post.title[0] - 'a' + 'A');
    post.body_html = "<p>" + join(words, title_len, mid) + "</p>";
    std::vector<std::size_t> others;
    for (std::size_t t = 0; t < spec.n_tags; ++t) {
      if (std::find(tag_ids.begin(), tag_ids.end(), t) == tag_ids.end()) others.push_back(t);
    }
    if (!others.empty() && rng.uniform() < spec.code_probability) {
      const auto& decoy = corpus.keywords[corpus.tags[pick(rng, others)]];
      post.body_html += "<pre><code>" + decoy.front() + "(" + decoy.back() + ") &amp;&amp; " +
                        decoy.front() + "</code></pre>";
    }
    post.body_html += "<p>" + join(words, mid, words.size()) + "</p>";
    for (std::size_t t : tag_ids) post.tags.push_back(corpus.tags[t]);
    corpus.posts.push_back(std::move(post));
  }
  return corpus;
}

void write_line_records(const std::vector<RawPost>& posts, std::ostream& posts_out,
                        std::ostream& tags_out) {
  for (const auto& p : posts) {
    posts_out << p.id << '\t' << sanitize(p.title) << '\t' << sanitize(p.body_html) << '\n';
    tags_out << p.id << '\t';
    for (std::size_t i = 0; i < p.tags.size(); ++i) {
      if (i > 0) tags_out << ',';
      tags_out << p.tags[i];
    }
    tags_out << '\n';
  }
}

}  // namespace qtag
