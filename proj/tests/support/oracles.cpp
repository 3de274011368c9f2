#include "oracles.hpp"

#include <cmath>

namespace sumreward::testkit {

namespace {

bool is_subsequence(const text::Tokens& s, const text::Tokens& of) {
  std::size_t j = 0;
  for (std::size_t i = 0; i < of.size() && j < s.size(); ++i) j += of[i] == s[j];
  return j == s.size();
}

}  // namespace

double clipped_overlap(const text::Tokens& c, const text::Tokens& r, std::size_t n) {
  if (c.size() < n || r.size() < n) return 0.0;
  std::vector<bool> used(r.size() - n + 1, false);
  double hits = 0;
  for (std::size_t i = 0; i + n <= c.size(); ++i) {
    for (std::size_t j = 0; j + n <= r.size(); ++j) {
      if (used[j]) continue;
      bool same = true;
      for (std::size_t k = 0; k < n; ++k) same = same && c[i + k] == r[j + k];
      if (same) {
        used[j] = true;
        ++hits;
        break;
      }
    }
  }
  return hits;
}

double f1_of(double hits, double cand_total, double ref_total) {
  if (cand_total == 0 || ref_total == 0 || hits == 0) return 0.0;
  const double p = hits / cand_total;
  const double r = hits / ref_total;
  return 2 * p * r / (p + r);
}

std::size_t brute_lcs(const text::Tokens& a, const text::Tokens& b) {
  std::size_t best = 0;
  for (unsigned mask = 0; mask < (1u << a.size()); ++mask) {
    text::Tokens s;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (mask & (1u << i)) s.push_back(a[i]);
    }
    if (s.size() > best && is_subsequence(s, b)) best = s.size();
  }
  return best;
}

double pearson_oracle(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

std::vector<double> rank_oracle(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0, equal = 0;
    for (double w : v) {
      if (w < v[i]) ++less;
      if (w == v[i]) ++equal;
    }
    r[i] = 1.0 + less + (equal - 1.0) / 2.0;
  }
  return r;
}

}  // namespace sumreward::testkit
