#pragma once

#include "sumreward/text.hpp"

#include <cstddef>
#include <vector>

// Slow, direct implementations kept apart from the library code they check.
namespace sumreward::testkit {

// Clipped n-gram matches found by scanning every window pair.
double clipped_overlap(const text::Tokens& c, const text::Tokens& r, std::size_t n);
double f1_of(double hits, double cand_total, double ref_total);
// Longest subsequence of `a` (all 2^|a| of them) that is also one of `b`.
std::size_t brute_lcs(const text::Tokens& a, const text::Tokens& b);

// Textbook two-pass formula.
double pearson_oracle(const std::vector<double>& x, const std::vector<double>& y);
// Rank of v = 1 + #less + (#equal - 1) / 2, counted by brute force.
std::vector<double> rank_oracle(const std::vector<double>& v);

}  // namespace sumreward::testkit
