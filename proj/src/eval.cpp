#include "sumreward/eval.hpp"

#include "sumreward/common.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <stdexcept>
#include <thread>
#include <unordered_map>
#include <unordered_set>

namespace sumreward::eval {

using nlohmann::json;

namespace {

void check_pair(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("correlation: length mismatch");
  if (xs.size() < 2) throw std::invalid_argument("correlation: need at least two points");
}

}  // namespace

double pearson(std::span<const double> xs, std::span<const double> ys) {
  check_pair(xs, ys);
  const auto n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) {
    throw UndefinedStatistic("correlation undefined: zero variance");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&values](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
  check_pair(xs, ys);
  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);
  return pearson(rx, ry);
}

std::vector<double> normalize_scores(std::span<const double> scores) {
  if (scores.empty()) return {};
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  const double min = *lo;
  const double max = *hi;
  std::vector<double> out(scores.size(), 0.0);
  if (!(max > min)) return out;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = std::clamp(2.0 * (scores[i] - min) / (max - min) - 1.0, -1.0, 1.0);
  }
  return out;
}

std::set<std::size_t> good_summary_set(std::span<const double> ratings, double threshold) {
  std::set<std::size_t> good;
  for (std::size_t i = 0; i < ratings.size(); ++i) {
    if (!(ratings[i] >= threshold)) continue;
    std::size_t strictly_higher = 0;
    for (std::size_t j = 0; j < ratings.size(); ++j) {
      if (ratings[j] > ratings[i]) ++strictly_higher;
    }
    if (strictly_higher < 2) good.insert(i);
  }
  return good;
}

GoodSummaryStats g_precision_recall(const std::vector<std::vector<double>>& metric_scores,
                                    const std::vector<std::vector<double>>& human_ratings,
                                    double threshold) {
  if (metric_scores.size() != human_ratings.size()) {
    throw std::invalid_argument("g_precision_recall: article count mismatch");
  }
  std::vector<double> flat;
  for (std::size_t a = 0; a < metric_scores.size(); ++a) {
    if (metric_scores[a].size() != human_ratings[a].size()) {
      throw std::invalid_argument("g_precision_recall: summary count mismatch in article " +
                                  std::to_string(a));
    }
    flat.insert(flat.end(), metric_scores[a].begin(), metric_scores[a].end());
  }
  const std::vector<double> normalized = normalize_scores(flat);

  std::size_t predicted = 0;
  std::size_t actual = 0;
  std::size_t both = 0;
  std::size_t offset = 0;
  for (std::size_t a = 0; a < metric_scores.size(); ++a) {
    const std::size_t n = metric_scores[a].size();
    const auto pred = good_summary_set(std::span(normalized).subspan(offset, n), threshold);
    const auto real = good_summary_set(human_ratings[a], threshold);
    predicted += pred.size();
    actual += real.size();
    for (std::size_t i : pred) both += real.count(i);
    offset += n;
  }
  GoodSummaryStats out;
  out.g_pre = predicted == 0 ? 0.0 : static_cast<double>(both) / static_cast<double>(predicted);
  out.g_rec = actual == 0 ? 0.0 : static_cast<double>(both) / static_cast<double>(actual);
  return out;
}

EvalQuadruple evaluate(const std::vector<std::vector<double>>& metric_scores,
                       const std::vector<std::vector<double>>& human_ratings, double threshold) {
  const auto g = g_precision_recall(metric_scores, human_ratings, threshold);
  EvalQuadruple q;
  q.g_pre = g.g_pre;
  q.g_rec = g.g_rec;
  q.n_articles = metric_scores.size();
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t a = 0; a < metric_scores.size(); ++a) {
    xs.insert(xs.end(), metric_scores[a].begin(), metric_scores[a].end());
    ys.insert(ys.end(), human_ratings[a].begin(), human_ratings[a].end());
  }
  q.n_summaries = xs.size();
  try {
    q.spearman_rho = spearman(xs, ys);
    q.pearson_r = pearson(xs, ys);
  } catch (const UndefinedStatistic& e) {
    q.spearman_rho.reset();
    q.pearson_r.reset();
    q.correlation_error = e.what();
  } catch (const std::invalid_argument& e) {
    q.spearman_rho.reset();
    q.pearson_r.reset();
    q.correlation_error = e.what();
  }
  return q;
}

ScoredSummaries score_summaries(const corpus::Dataset& dataset, const SummaryScorer& scorer,
                                std::span<const std::string> ids, unsigned jobs) {
  ScoredSummaries out;
  auto& articles = out.articles;
  if (ids.empty()) {
    for (const auto& a : dataset.articles) articles.push_back(&a);
  } else {
    std::unordered_map<std::string, const corpus::RatedArticle*> by_id;
    for (const auto& a : dataset.articles) by_id.emplace(a.article_id, &a);
    for (const auto& id : ids) {
      auto it = by_id.find(id);
      if (it == by_id.end()) throw DataError("evaluation id not in dataset: " + id);
      articles.push_back(it->second);
    }
  }

  auto& scores = out.scores;
  auto& ratings = out.ratings;
  scores.resize(articles.size());
  ratings.resize(articles.size());
  auto work = [&](std::size_t begin, std::size_t step) {
    for (std::size_t a = begin; a < articles.size(); a += step) {
      const auto& art = *articles[a];
      for (std::size_t i = 0; i < art.summaries.size(); ++i) {
        scores[a].push_back(scorer(art, i));
        ratings[a].push_back(art.summaries[i].avg_rating);
      }
    }
  };
  jobs = std::max(1u, jobs);
  if (jobs == 1) {
    work(0, 1);
  } else {
    // Each worker owns a strided slice of the output; no shared writes.
    std::vector<std::exception_ptr> errors(jobs);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < jobs; ++w) {
      pool.emplace_back([&, w] {
        try {
          work(w, jobs);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  return out;
}

EvalQuadruple evaluate_scorer(const corpus::Dataset& dataset, const SummaryScorer& scorer,
                              std::span<const std::string> ids, double threshold, unsigned jobs) {
  const auto scored = score_summaries(dataset, scorer, ids, jobs);
  return evaluate(scored.scores, scored.ratings, threshold);
}

EvalQuadruple mean_over_folds(std::span<const EvalQuadruple> folds) {
  EvalQuadruple mean;
  if (folds.empty()) return mean;
  double rho = 0.0;
  double r = 0.0;
  std::size_t defined = 0;
  for (const auto& f : folds) {
    mean.g_pre += f.g_pre;
    mean.g_rec += f.g_rec;
    mean.n_articles += f.n_articles;
    mean.n_summaries += f.n_summaries;
    if (!f.correlation_error.empty() && mean.correlation_error.empty()) {
      mean.correlation_error = f.correlation_error;
    }
    if (f.spearman_rho && f.pearson_r) {
      rho += *f.spearman_rho;
      r += *f.pearson_r;
      ++defined;
    }
  }
  const auto n = static_cast<double>(folds.size());
  mean.g_pre /= n;
  mean.g_rec /= n;
  if (defined > 0) {
    mean.correlation_error.clear();
    mean.spearman_rho = rho / static_cast<double>(defined);
    mean.pearson_r = r / static_cast<double>(defined);
  }
  return mean;
}

EvalReport cross_validate(const corpus::Dataset& dataset, std::span<const corpus::FoldSplit> folds,
                          const ScorerTrainer& trainer, double threshold, unsigned jobs) {
  EvalReport report;
  for (const auto& split : folds) {
    const SummaryScorer scorer = trainer(dataset, split);
    report.per_fold.push_back(evaluate_scorer(dataset, scorer, split.test_ids, threshold, jobs));
  }
  report.summary = mean_over_folds(report.per_fold);
  return report;
}

EvalReport cross_validate(const corpus::Dataset& dataset, std::span<const corpus::FoldSplit> folds,
                          const SummaryScorer& scorer, double threshold, unsigned jobs) {
  EvalReport report;
  for (const auto& split : folds) {
    report.per_fold.push_back(evaluate_scorer(dataset, scorer, split.test_ids, threshold, jobs));
  }
  report.summary = mean_over_folds(report.per_fold);
  return report;
}

EvalReport cross_validate(const corpus::Dataset& dataset, int k, std::uint64_t seed,
                          const ScorerTrainer& trainer, double threshold) {
  return cross_validate(dataset, corpus::split_folds(dataset, k, seed), trainer, threshold);
}

EvalReport cross_validate(const corpus::Dataset& dataset, int k, std::uint64_t seed,
                          const SummaryScorer& scorer, double threshold) {
  return cross_validate(dataset, corpus::split_folds(dataset, k, seed), scorer, threshold);
}

json to_json(const EvalQuadruple& q) {
  json j;
  j["spearman_rho"] = q.spearman_rho ? json(*q.spearman_rho) : json(nullptr);
  j["pearson_r"] = q.pearson_r ? json(*q.pearson_r) : json(nullptr);
  j["g_pre"] = q.g_pre;
  j["g_rec"] = q.g_rec;
  j["n_articles"] = q.n_articles;
  j["n_summaries"] = q.n_summaries;
  if (!q.correlation_error.empty()) j["correlation_error"] = q.correlation_error;
  return j;
}

json to_json(const EvalReport& report) {
  json j = to_json(report.summary);
  if (!report.per_fold.empty()) {
    json folds = json::array();
    for (const auto& f : report.per_fold) folds.push_back(to_json(f));
    j["per_fold"] = folds;
  }
  return j;
}

}  // namespace sumreward::eval
