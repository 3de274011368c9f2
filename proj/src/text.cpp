#include "sumreward/text.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <unordered_set>

namespace sumreward::text {

namespace resources {
extern const std::string_view kStopwords;
extern const std::string_view kAbbreviations;
}  // namespace resources

namespace {

std::unordered_set<std::string> parse_word_list(std::string_view contents) {
  std::unordered_set<std::string> words;
  std::size_t start = 0;
  while (start < contents.size()) {
    std::size_t end = contents.find('\n', start);
    if (end == std::string_view::npos) end = contents.size();
    std::string_view line = contents.substr(start, end - start);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) {
      line.remove_suffix(1);
    }
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.front()))) {
      line.remove_prefix(1);
    }
    if (!line.empty() && line.front() != '#') words.emplace(to_lower(line));
    start = end + 1;
  }
  return words;
}

const std::unordered_set<std::string>& stopwords() {
  static const auto words = parse_word_list(resources::kStopwords);
  return words;
}

const std::unordered_set<std::string>& abbreviations() {
  static const auto words = parse_word_list(resources::kAbbreviations);
  return words;
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

// Bytes >= 0x80 are kept as word characters so UTF-8 sequences stay intact.
bool is_word_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || std::isalnum(u) != 0;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

// The word that ends at `dot` (exclusive), lowercased, without leading
// punctuation such as an opening quote or parenthesis.
std::string word_before(std::string_view text, std::size_t dot) {
  std::size_t begin = dot;
  while (begin > 0 && !is_space(text[begin - 1])) --begin;
  std::string_view word = text.substr(begin, dot - begin);
  while (!word.empty() && !is_word_char(word.front())) word.remove_prefix(1);
  return to_lower(word);
}

}  // namespace

std::size_t NGramBag::total() const {
  std::size_t sum = 0;
  for (const auto& [gram, c] : counts) sum += c;
  return sum;
}

std::size_t NGramBag::count(const Tokens& gram) const {
  auto it = counts.find(gram);
  return it == counts.end() ? 0 : it->second;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string join(std::span<const Token> tokens, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out += sep;
    out += tokens[i];
  }
  return out;
}

bool is_stopword(std::string_view lowercase_word) {
  return stopwords().contains(std::string(lowercase_word));
}

bool is_abbreviation(std::string_view lowercase_word) {
  return abbreviations().contains(std::string(lowercase_word));
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  auto emit = [&out](std::string_view piece) {
    piece = trim(piece);
    if (!piece.empty()) out.emplace_back(piece);
  };

  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c != '.' && c != '!' && c != '?') continue;
    // Absorb runs such as "?!" or "..." plus closing quotes/brackets.
    std::size_t end = i + 1;
    while (end < text.size() &&
           (text[end] == '.' || text[end] == '!' || text[end] == '?' || text[end] == '"' ||
            text[end] == '\'' || text[end] == ')' || text[end] == ']')) {
      ++end;
    }
    std::size_t next = end;
    while (next < text.size() && is_space(text[next])) ++next;
    const bool at_end = next == text.size();
    if (!at_end) {
      if (next == end) continue;  // no whitespace after the punctuation
      if (!std::isupper(static_cast<unsigned char>(text[next]))) continue;
    }
    if (c == '.' && end == i + 1 && is_abbreviation(word_before(text, i))) continue;
    emit(text.substr(start, end - start));
    start = next;
    i = next == 0 ? 0 : next - 1;
  }
  if (start < text.size()) emit(text.substr(start));
  return out;
}

Tokens tokenize_and_preprocess(std::string_view sentence, bool lowercase, bool stem,
                               bool drop_stopwords) {
  Tokens tokens;
  std::size_t i = 0;
  while (i < sentence.size()) {
    while (i < sentence.size() && !is_word_char(sentence[i])) ++i;
    std::size_t j = i;
    while (j < sentence.size() && is_word_char(sentence[j])) ++j;
    if (j > i) tokens.emplace_back(sentence.substr(i, j - i));
    i = j;
  }
  if (lowercase) {
    for (auto& t : tokens) t = to_lower(t);
  }
  if (drop_stopwords) {
    std::erase_if(tokens, [](const Token& t) { return is_stopword(to_lower(t)); });
  }
  if (stem) {
    for (auto& t : tokens) t = porter_stem(t);
  }
  return tokens;
}

TokenizedText make_tokenized(std::vector<Tokens> sentences) {
  TokenizedText out;
  for (auto& s : sentences) {
    if (s.empty()) continue;
    out.flat_tokens.insert(out.flat_tokens.end(), s.begin(), s.end());
    out.sentences.push_back(std::move(s));
  }
  return out;
}

TokenizedText tokenize_text(std::string_view text, const PreprocessOptions& opts) {
  std::vector<Tokens> sentences;
  for (const auto& s : split_sentences(text)) {
    sentences.push_back(tokenize_and_preprocess(s, opts));
  }
  return make_tokenized(std::move(sentences));
}

NGramBag ngrams(std::span<const Token> tokens, std::size_t n) {
  if (n < 1) throw std::invalid_argument("ngrams: n must be >= 1");
  NGramBag bag;
  bag.n = n;
  if (tokens.size() < n) return bag;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++bag.counts[Tokens(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                        tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return bag;
}

NGramBag skip_bigrams(std::span<const Token> tokens, std::size_t max_gap) {
  NGramBag bag;
  bag.n = 2;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    for (std::size_t j = i + 1; j < tokens.size() && j - i - 1 <= max_gap; ++j) {
      ++bag.counts[Tokens{tokens[i], tokens[j]}];
    }
  }
  return bag;
}

}  // namespace sumreward::text
