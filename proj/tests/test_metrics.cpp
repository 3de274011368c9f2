#include "sumreward/metrics.hpp"

#include "oracles.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace sumreward;
using namespace sumreward::metrics;
using text::Tokens;
using testkit::brute_lcs;
using testkit::clipped_overlap;
using testkit::f1_of;

namespace {

text::TokenizedText one_sentence(const Tokens& t) { return text::make_tokenized({t}); }

}  // namespace

TEST(Rouge, IdenticalTextsScoreOne) {
  const auto t = text::make_tokenized({{"a", "b", "c"}, {"d", "a"}});
  for (const auto v : {RougeVariant::rouge_n(1), RougeVariant::rouge_n(2), RougeVariant::rouge_l(),
                       RougeVariant::rouge_su4()}) {
    EXPECT_DOUBLE_EQ(rouge(t, t, v).f1, 1.0) << v.name();
  }
}

TEST(Rouge, DisjointTextsScoreZero) {
  const auto a = one_sentence({"a", "b"});
  const auto b = one_sentence({"c", "d"});
  for (const auto v : {RougeVariant::rouge_n(1), RougeVariant::rouge_n(2), RougeVariant::rouge_l(),
                       RougeVariant::rouge_su4()}) {
    EXPECT_EQ(rouge(a, b, v).f1, 0.0);
  }
}

TEST(Rouge, HandCountedUnigrams) {
  const auto s = rouge(one_sentence({"the", "cat", "sat"}), one_sentence({"the", "cat", "ate"}),
                       RougeVariant::rouge_n(1));
  EXPECT_DOUBLE_EQ(s.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.recall, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.f1, 2.0 / 3.0);
}

TEST(Rouge, EmptySideIsZero) {
  const auto empty = text::make_tokenized({});
  const auto t = one_sentence({"a"});
  EXPECT_EQ(rouge(empty, t, RougeVariant::rouge_l()).f1, 0.0);
  EXPECT_EQ(rouge(t, empty, RougeVariant::rouge_n(1)).recall, 0.0);
}

TEST(Rouge, ClippingCapsRepeatedMatches) {
  const auto ref = one_sentence({"a", "b"});
  const auto once = rouge(one_sentence({"a", "c"}), ref, RougeVariant::rouge_n(1));
  const auto many = rouge(one_sentence({"a", "a", "a", "a"}), ref, RougeVariant::rouge_n(1));
  EXPECT_DOUBLE_EQ(once.recall, 0.5);
  EXPECT_DOUBLE_EQ(many.recall, 0.5);
  EXPECT_DOUBLE_EQ(many.precision, 0.25);
}

TEST(Rouge, UnionLcsAcrossSentences) {
  // Reference sentence [a b c d]; candidate sentences [a b] and [c d] each
  // cover half of it, so the union covers all four tokens.
  const auto ref = one_sentence({"a", "b", "c", "d"});
  const auto cand = text::make_tokenized({{"a", "b", "x"}, {"c", "d"}});
  const auto s = rouge(cand, ref, RougeVariant::rouge_l());
  EXPECT_DOUBLE_EQ(s.recall, 1.0);
  EXPECT_DOUBLE_EQ(s.precision, 4.0 / 5.0);
}

TEST(Rouge, Su4HandCount) {
  // cand [a b c]: unigrams 3 + skip bigrams ab ac bc = 6; ref [a c]: 2 + 1 = 3.
  // Shared: a, c, (a,c) = 3.
  const auto s = rouge(one_sentence({"a", "b", "c"}), one_sentence({"a", "c"}), RougeVariant::rouge_su4());
  EXPECT_DOUBLE_EQ(s.precision, 3.0 / 6.0);
  EXPECT_DOUBLE_EQ(s.recall, 1.0);
}

TEST(Rouge, MatchesBruteForceOracle) {
  Rng rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    const auto c = testkit::random_tokens(rng, rng.index(11), 5);
    const auto r = testkit::random_tokens(rng, rng.index(11), 5);
    const auto ct = one_sentence(c);
    const auto rt = one_sentence(r);
    for (std::size_t n : {1u, 2u}) {
      const double expect = f1_of(clipped_overlap(c, r, n), c.size() >= n ? c.size() - n + 1.0 : 0.0,
                                  r.size() >= n ? r.size() - n + 1.0 : 0.0);
      EXPECT_EQ(rouge(ct, rt, RougeVariant::rouge_n(n)).f1, expect);
    }
    const double lcs = static_cast<double>(brute_lcs(c, r));
    EXPECT_EQ(lcs_length(c, r), brute_lcs(c, r));
    EXPECT_EQ(rouge(ct, rt, RougeVariant::rouge_l()).f1,
              f1_of(lcs, static_cast<double>(c.size()), static_cast<double>(r.size())));
  }
}

TEST(Rouge, ScoresStayInUnitInterval) {
  Rng rng(42);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Tokens> cs;
    std::vector<Tokens> rs;
    for (std::size_t i = 0, n = 1 + rng.index(3); i < n; ++i) cs.push_back(testkit::random_tokens(rng, 1 + rng.index(8), 4));
    for (std::size_t i = 0, n = 1 + rng.index(3); i < n; ++i) rs.push_back(testkit::random_tokens(rng, 1 + rng.index(8), 4));
    const auto c = text::make_tokenized(cs);
    const auto r = text::make_tokenized(rs);
    for (const auto v : {RougeVariant::rouge_n(1), RougeVariant::rouge_n(3), RougeVariant::rouge_l(),
                         RougeVariant::rouge_su4()}) {
      const auto s = rouge(c, r, v);
      for (const double x : {s.precision, s.recall, s.f1}) {
        EXPECT_GE(x, 0.0);
        EXPECT_LE(x, 1.0);
      }
    }
    for (std::size_t n = 1; n <= 5; ++n) {
      const double b = bleu(c.flat_tokens, r.flat_tokens, n);
      EXPECT_GE(b, 0.0);
      EXPECT_LE(b, 1.0);
    }
  }
}

TEST(Bleu, IdenticalIsOne) {
  const Tokens t{"a", "b", "c", "d"};
  for (std::size_t n = 1; n <= 5; ++n) EXPECT_DOUBLE_EQ(bleu(t, t, n), 1.0);
}

TEST(Bleu, DisjointUnigramsSmoothed) {
  EXPECT_DOUBLE_EQ(bleu(Tokens{"a", "b", "c", "d"}, Tokens{"e", "f", "g", "h"}, 1), 0.2);
}

TEST(Bleu, EmptyCandidateIsZero) { EXPECT_EQ(bleu(Tokens{}, Tokens{"a"}, 4), 0.0); }

TEST(Bleu, BrevityPenaltyAndSmoothedOrders) {
  // cand [a b], ref [a b c d]: p1 = 3/3, p2 = 2/2, BP = exp(1 - 4/2).
  EXPECT_DOUBLE_EQ(bleu(Tokens{"a", "b"}, Tokens{"a", "b", "c", "d"}, 2), std::exp(-1.0));
  // cand [a x a], ref [a b]: unigrams clipped to 1 -> (1+1)/(3+1); bigrams 0 -> 1/3.
  EXPECT_NEAR(bleu(Tokens{"a", "x", "a"}, Tokens{"a", "b"}, 2), std::sqrt(0.5 * (1.0 / 3.0)), 1e-15);
}

TEST(Cosine, Examples) {
  EXPECT_DOUBLE_EQ(cosine_similarity(Vector::Constant(3, 2.0), Vector::Constant(3, 2.0)), 1.0);
  Vector a(2), b(2);
  a << 1, 0;
  b << 0, 1;
  EXPECT_EQ(cosine_similarity(a, b), 0.0);
  Vector c(2);
  c << 1, 1;
  EXPECT_NEAR(cosine_similarity(c, a), std::sqrt(2.0) / 2.0, 1e-15);
  EXPECT_EQ(cosine_similarity(Vector::Zero(2), a), 0.0);
  EXPECT_THROW(cosine_similarity(a, Vector::Zero(3)), std::invalid_argument);
}

TEST(Cosine, PositiveScaleInvariance) {
  Rng rng(43);
  for (int trial = 0; trial < 200; ++trial) {
    const Vector a = testkit::random_vector(rng, 5);
    const Vector b = testkit::random_vector(rng, 5);
    const double alpha = 0.01 + 10 * rng.uniform();
    EXPECT_NEAR(cosine_similarity(alpha * a, b), cosine_similarity(a, b), 1e-12);
  }
}
