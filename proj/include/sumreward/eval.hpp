#pragma once

#include "sumreward/corpus.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace sumreward::eval {

// Both throw UndefinedStatistic when either series has zero variance and
// std::invalid_argument on mismatched or too-short input.
double pearson(std::span<const double> xs, std::span<const double> ys);
double spearman(std::span<const double> xs, std::span<const double> ys);

// 1-based ranks; tied values share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values);

// Min-max onto [-1, 1]; a constant input maps to zeros.
std::vector<double> normalize_scores(std::span<const double> scores);

// Index i is good iff ratings[i] >= threshold and fewer than two other
// summaries are rated strictly higher.
std::set<std::size_t> good_summary_set(std::span<const double> ratings, double threshold = 0.5);

struct GoodSummaryStats {
  double g_pre = 0.0;
  double g_rec = 0.0;
};

// Metric scores are min-max normalized over the whole evaluation set before
// the good-summary rule is applied; human ratings are used as given. Counts
// are pooled over all articles.
GoodSummaryStats g_precision_recall(const std::vector<std::vector<double>>& metric_scores,
                                    const std::vector<std::vector<double>>& human_ratings,
                                    double threshold = 0.5);

struct EvalQuadruple {
  std::optional<double> spearman_rho;  // empty when undefined
  std::optional<double> pearson_r;
  double g_pre = 0.0;
  double g_rec = 0.0;
  std::size_t n_articles = 0;
  std::size_t n_summaries = 0;
  std::string correlation_error;  // why the correlations are undefined
};

struct EvalReport {
  EvalQuadruple summary;  // fold mean for cross-validation
  std::vector<EvalQuadruple> per_fold;
};

// Pools every (score, rating) pair across articles for the correlations.
EvalQuadruple evaluate(const std::vector<std::vector<double>>& metric_scores,
                       const std::vector<std::vector<double>>& human_ratings,
                       double threshold = 0.5);

using SummaryScorer = std::function<double(const corpus::RatedArticle&, std::size_t summary_index)>;
using ScorerTrainer =
    std::function<SummaryScorer(const corpus::Dataset&, const corpus::FoldSplit&)>;

struct ScoredSummaries {
  std::vector<const corpus::RatedArticle*> articles;
  std::vector<std::vector<double>> scores;   // per article, per summary
  std::vector<std::vector<double>> ratings;  // average human ratings, same shape
};

// Scores every summary of the listed articles (all articles when `ids` is
// empty). `jobs` > 1 spreads articles over worker threads; output order
// follows the input order either way.
ScoredSummaries score_summaries(const corpus::Dataset& dataset, const SummaryScorer& scorer,
                                std::span<const std::string> ids = {}, unsigned jobs = 1);

// Scores every summary of the listed articles (all articles when `ids` is
// empty) and evaluates against their average ratings.
EvalQuadruple evaluate_scorer(const corpus::Dataset& dataset, const SummaryScorer& scorer,
                              std::span<const std::string> ids = {}, double threshold = 0.5,
                              unsigned jobs = 1);

// Learned rewards: trained per fold (train ids for fitting, val ids for model
// selection) and evaluated on the fold's test ids.
EvalReport cross_validate(const corpus::Dataset& dataset, int k, std::uint64_t seed,
                          const ScorerTrainer& trainer, double threshold = 0.5);
// Fixed metrics: evaluated on each fold's test ids.
EvalReport cross_validate(const corpus::Dataset& dataset, int k, std::uint64_t seed,
                          const SummaryScorer& scorer, double threshold = 0.5);

// Same, over explicit folds.
EvalReport cross_validate(const corpus::Dataset& dataset, std::span<const corpus::FoldSplit> folds,
                          const ScorerTrainer& trainer, double threshold = 0.5, unsigned jobs = 1);
EvalReport cross_validate(const corpus::Dataset& dataset, std::span<const corpus::FoldSplit> folds,
                          const SummaryScorer& scorer, double threshold = 0.5, unsigned jobs = 1);

// Unweighted mean over folds; correlations average the folds where they are
// defined.
EvalQuadruple mean_over_folds(std::span<const EvalQuadruple> folds);

nlohmann::json to_json(const EvalQuadruple& q);
nlohmann::json to_json(const EvalReport& report);

}  // namespace sumreward::eval
