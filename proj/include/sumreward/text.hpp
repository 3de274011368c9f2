#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sumreward::text {

using Token = std::string;
using Tokens = std::vector<Token>;

struct TokenizedText {
  std::vector<Tokens> sentences;  // never contains an empty sentence
  Tokens flat_tokens;
};

struct NGramBag {
  std::size_t n = 1;
  std::map<Tokens, std::size_t> counts;

  std::size_t total() const;
  std::size_t count(const Tokens& gram) const;
};

struct PreprocessOptions {
  bool lowercase = true;
  bool stem = false;
  bool drop_stopwords = false;

  // Metric default: lowercase, stopword removal, Porter stemming.
  static PreprocessOptions for_metrics() { return {true, true, true}; }
  // Encoder default: lowercase only; word-vector vocabularies are uncased.
  static PreprocessOptions for_encoders() { return {true, false, false}; }
};

// Rule-based splitter. A break happens after '.', '!' or '?' when followed by
// whitespace and then an uppercase letter (or the end of the text), unless
// the word ending in '.' is a known abbreviation.
std::vector<std::string> split_sentences(std::string_view text);

// Splits on whitespace and ASCII punctuation (punctuation is discarded), then
// applies lowercase -> stopword removal -> Porter stemming, each if enabled.
Tokens tokenize_and_preprocess(std::string_view sentence, bool lowercase, bool stem,
                               bool drop_stopwords);
inline Tokens tokenize_and_preprocess(std::string_view sentence, const PreprocessOptions& opts) {
  return tokenize_and_preprocess(sentence, opts.lowercase, opts.stem, opts.drop_stopwords);
}

TokenizedText tokenize_text(std::string_view text, const PreprocessOptions& opts);
TokenizedText make_tokenized(std::vector<Tokens> sentences);

NGramBag ngrams(std::span<const Token> tokens, std::size_t n);

// Ordered pairs (t_i, t_j), i < j, with at most max_gap tokens between them.
NGramBag skip_bigrams(std::span<const Token> tokens, std::size_t max_gap);

std::string porter_stem(std::string_view word);

bool is_stopword(std::string_view lowercase_word);
bool is_abbreviation(std::string_view lowercase_word);

std::string to_lower(std::string_view s);
std::string join(std::span<const Token> tokens, std::string_view sep = " ");

}  // namespace sumreward::text
