#pragma once

#include "sumreward/common.hpp"
#include "sumreward/text.hpp"

#include <cstddef>
#include <span>
#include <string>

namespace sumreward::metrics {

struct MetricScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  static MetricScore from_counts(double hits, double candidate_total, double reference_total);
};

struct RougeVariant {
  enum class Kind { N, L, SU4 };
  Kind kind = Kind::N;
  std::size_t n = 1;

  static RougeVariant rouge_n(std::size_t n) { return {Kind::N, n}; }
  static RougeVariant rouge_l() { return {Kind::L, 0}; }
  static RougeVariant rouge_su4() { return {Kind::SU4, 0}; }
  std::string name() const;
};

// ROUGE-N uses clipped n-gram overlap over the whole token sequence. ROUGE-L
// is the summary-level union-LCS score. ROUGE-SU4 pools in-sentence skip
// bigrams (gap <= 4) with unigrams. An empty side gives an all-zero score.
MetricScore rouge(const text::TokenizedText& candidate, const text::TokenizedText& reference,
                  RougeVariant variant);

// Sentence-level LCS length via dynamic programming.
std::size_t lcs_length(std::span<const text::Token> a, std::span<const text::Token> b);

// Smoothed BLEU: geometric mean over n = 1..max_n of (matches + 1) /
// (candidate n-grams + 1), times exp(min(0, 1 - |ref| / |cand|)).
double bleu(std::span<const text::Token> candidate, std::span<const text::Token> reference,
            std::size_t max_n);

// Zero when either vector has zero norm. Throws std::invalid_argument on a
// length mismatch.
double cosine_similarity(const Vector& a, const Vector& b);

}  // namespace sumreward::metrics
