#include "sumreward/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace sumreward::metrics {

using text::NGramBag;
using text::Token;
using text::Tokens;

namespace {

constexpr std::size_t kSkipGap = 4;

std::size_t clipped_overlap(const NGramBag& candidate, const NGramBag& reference) {
  std::size_t hits = 0;
  for (const auto& [gram, count] : candidate.counts) {
    hits += std::min(count, reference.count(gram));
  }
  return hits;
}

void merge_into(NGramBag& into, const NGramBag& from) {
  for (const auto& [gram, count] : from.counts) into.counts[gram] += count;
}

NGramBag su4_bag(const text::TokenizedText& t) {
  NGramBag bag;
  for (const auto& s : t.sentences) {
    merge_into(bag, text::skip_bigrams(s, kSkipGap));
    merge_into(bag, text::ngrams(s, 1));
  }
  return bag;
}

// Indices into `ref` of one LCS between ref and cand, recovered by walking the
// DP table back from the end.
std::vector<std::size_t> lcs_indices(std::span<const Token> ref, std::span<const Token> cand) {
  const std::size_t m = ref.size();
  const std::size_t n = cand.size();
  std::vector<std::vector<std::size_t>> table(m + 1, std::vector<std::size_t>(n + 1, 0));
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      table[i][j] = ref[i - 1] == cand[j - 1] ? table[i - 1][j - 1] + 1
                                               : std::max(table[i - 1][j], table[i][j - 1]);
    }
  }
  std::vector<std::size_t> out;
  std::size_t i = m;
  std::size_t j = n;
  while (i > 0 && j > 0) {
    if (ref[i - 1] == cand[j - 1]) {
      out.push_back(i - 1);
      --i;
      --j;
    } else if (table[i][j - 1] > table[i - 1][j]) {
      --j;
    } else {
      --i;
    }
  }
  return out;
}

MetricScore rouge_l(const text::TokenizedText& candidate, const text::TokenizedText& reference) {
  std::map<Token, std::size_t> cand_counts;
  std::map<Token, std::size_t> ref_counts;
  for (const auto& t : candidate.flat_tokens) ++cand_counts[t];
  for (const auto& t : reference.flat_tokens) ++ref_counts[t];

  std::size_t hits = 0;
  for (const auto& ref_sentence : reference.sentences) {
    std::set<std::size_t> union_positions;
    for (const auto& cand_sentence : candidate.sentences) {
      for (std::size_t idx : lcs_indices(ref_sentence, cand_sentence)) union_positions.insert(idx);
    }
    // A token is credited at most as often as it occurs on either side.
    for (std::size_t idx : union_positions) {
      const Token& t = ref_sentence[idx];
      auto& c = cand_counts[t];
      auto& r = ref_counts[t];
      if (c > 0 && r > 0) {
        ++hits;
        --c;
        --r;
      }
    }
  }
  return MetricScore::from_counts(static_cast<double>(hits),
                                  static_cast<double>(candidate.flat_tokens.size()),
                                  static_cast<double>(reference.flat_tokens.size()));
}

}  // namespace

MetricScore MetricScore::from_counts(double hits, double candidate_total, double reference_total) {
  MetricScore s;
  if (candidate_total <= 0.0 || reference_total <= 0.0) return s;
  s.precision = hits / candidate_total;
  s.recall = hits / reference_total;
  s.f1 = s.precision + s.recall > 0.0
             ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
             : 0.0;
  return s;
}

std::string RougeVariant::name() const {
  switch (kind) {
    case Kind::N: return "rouge" + std::to_string(n);
    case Kind::L: return "rougeL";
    case Kind::SU4: return "rougeSU4";
  }
  return "rouge";
}

MetricScore rouge(const text::TokenizedText& candidate, const text::TokenizedText& reference,
                  RougeVariant variant) {
  if (candidate.flat_tokens.empty() || reference.flat_tokens.empty()) return {};
  switch (variant.kind) {
    case RougeVariant::Kind::N: {
      if (variant.n < 1) throw std::invalid_argument("rouge: n must be >= 1");
      const NGramBag cand = text::ngrams(candidate.flat_tokens, variant.n);
      const NGramBag ref = text::ngrams(reference.flat_tokens, variant.n);
      return MetricScore::from_counts(static_cast<double>(clipped_overlap(cand, ref)),
                                      static_cast<double>(cand.total()),
                                      static_cast<double>(ref.total()));
    }
    case RougeVariant::Kind::L:
      return rouge_l(candidate, reference);
    case RougeVariant::Kind::SU4: {
      const NGramBag cand = su4_bag(candidate);
      const NGramBag ref = su4_bag(reference);
      return MetricScore::from_counts(static_cast<double>(clipped_overlap(cand, ref)),
                                      static_cast<double>(cand.total()),
                                      static_cast<double>(ref.total()));
    }
  }
  return {};
}

std::size_t lcs_length(std::span<const Token> a, std::span<const Token> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double bleu(std::span<const Token> candidate, std::span<const Token> reference, std::size_t max_n) {
  if (max_n < 1) throw std::invalid_argument("bleu: max_n must be >= 1");
  if (candidate.empty()) return 0.0;
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= max_n; ++n) {
    const NGramBag cand = text::ngrams(candidate, n);
    const NGramBag ref = text::ngrams(reference, n);
    const double matches = static_cast<double>(clipped_overlap(cand, ref));
    const double total = static_cast<double>(cand.total());
    log_sum += std::log((matches + 1.0) / (total + 1.0));
  }
  const double ratio = static_cast<double>(reference.size()) / static_cast<double>(candidate.size());
  const double brevity = std::exp(std::min(0.0, 1.0 - ratio));
  return brevity * std::exp(log_sum / static_cast<double>(max_n));
}

double cosine_similarity(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("cosine_similarity: length mismatch (" + std::to_string(a.size()) +
                                " vs " + std::to_string(b.size()) + ")");
  }
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  // sqrt of the squared-norm product keeps cos(a, a) exactly 1.
  return std::clamp(a.dot(b) / std::sqrt(a.squaredNorm() * b.squaredNorm()), -1.0, 1.0);
}

}  // namespace sumreward::metrics
