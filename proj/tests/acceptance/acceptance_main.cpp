// Acceptance checks. Prints one line per criterion and exits non-zero when
// any check fails. Checks 11 and 12 need the rated corpus and word vectors:
//   SUMREWARD_CORPUS            dataset in JSON-lines form
//   SUMREWARD_VECTORS           word-vector text file (check 12)
//   SUMREWARD_REFERENCE_SYSTEM  system id of the reference summaries (default "reference")
//   SUMREWARD_PVALUES           power means for check 12 (default encoder setting)

#include "sumreward/embeddings.hpp"
#include "sumreward/eval.hpp"
#include "sumreward/metrics.hpp"
#include "sumreward/mlp.hpp"
#include "sumreward/reward_model.hpp"
#include "sumreward/rl_summarizer.hpp"
#include "sumreward/scorers.hpp"
#include "sumreward/simred.hpp"

#include "oracles.hpp"
#include "synthetic.hpp"
#include "test_support.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

using namespace sumreward;

namespace {

enum class Status { pass, fail, skip };

struct Outcome {
  Status status = Status::pass;
  std::string detail;
};

Outcome check(bool ok, std::string detail) { return {ok ? Status::pass : Status::fail, std::move(detail)}; }

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s << std::setprecision(digits) << v;
  return s.str();
}

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

// -- 1 ----------------------------------------------------------------------

Outcome preference_probability_check() {
  Rng rng(1);
  double worst_symmetry = 0.0;
  std::vector<std::pair<double, double>> by_gap;
  for (int i = 0; i < 1000; ++i) {
    const double a = rng.uniform(-50, 50);
    const double b = rng.uniform(-50, 50);
    const double p = reward::preference_probability(a, b);
    worst_symmetry = std::max(worst_symmetry, std::abs(p + reward::preference_probability(b, a) - 1.0));
    by_gap.emplace_back(a - b, p);
  }
  std::sort(by_gap.begin(), by_gap.end());
  bool monotone = true;
  for (std::size_t i = 1; i < by_gap.size(); ++i) monotone = monotone && by_gap[i].second >= by_gap[i - 1].second;

  const double hi = reward::preference_probability(1e4, 0.0);
  const double lo = reward::preference_probability(0.0, 1e4);
  const double nll_hi = reward::preference_nll(0.0, 1e4);
  const double nll_lo = reward::preference_nll(1e4, 0.0);
  const bool finite = std::isfinite(hi) && std::isfinite(lo) && std::isfinite(nll_hi) && std::isfinite(nll_lo) &&
                      hi == 1.0 && lo == 0.0 && std::abs(nll_hi - 1e4) < 1e-9 && nll_lo == 0.0;
  return check(worst_symmetry <= 1e-12 && monotone && finite,
               "max |P(a,b)+P(b,a)-1| = " + fmt(worst_symmetry) + ", monotone " + (monotone ? "yes" : "no") +
                   ", finite at 1e4 " + (finite ? "yes" : "no"));
}

// -- 2 ----------------------------------------------------------------------

double max_gradient_error(const reward::MLPParams& params,
                          const std::function<double(const reward::MLPParams&)>& objective,
                          const reward::MLPParams& analytic) {
  const Vector flat = reward::flatten(params);
  const Vector grad = reward::flatten(analytic);
  const double h = 1e-5;
  double worst = 0.0;
  reward::MLPParams probe = params;
  for (Eigen::Index i = 0; i < flat.size(); ++i) {
    Vector plus = flat, minus = flat;
    plus(i) += h;
    minus(i) -= h;
    reward::unflatten(plus, probe);
    const double up = objective(probe);
    reward::unflatten(minus, probe);
    const double numeric = (up - objective(probe)) / (2 * h);
    worst = std::max(worst, std::abs(grad(i) - numeric) / std::max({std::abs(grad(i)), std::abs(numeric), 1e-6}));
  }
  return worst;
}

Outcome gradient_check() {
  Rng rng(2);
  double worst_mse = 0.0;
  double worst_ce = 0.0;
  for (int config = 0; config < 20; ++config) {
    const std::size_t in = 2 + rng.index(8);
    const std::size_t hidden = 1 + rng.index(12);
    auto params = reward::MLPParams::initialize(in, hidden, rng);
    for (Eigen::Index i = 0; i < params.b1.size(); ++i) params.b1(i) = 0.1 * rng.normal();
    params.b2 = rng.normal();
    std::vector<reward::RegressionExample> reg;
    std::vector<reward::PairExample> pairs;
    for (std::size_t b = 0, n = 1 + rng.index(6); b < n; ++b) {
      reg.push_back({testkit::random_vector(rng, in), rng.uniform(-1, 1)});
      pairs.push_back({testkit::random_vector(rng, in), testkit::random_vector(rng, in)});
    }
    reward::MLPParams g;
    reward::mse_objective(params, reg, &g);
    worst_mse = std::max(worst_mse, max_gradient_error(
                                        params, [&](const reward::MLPParams& p) { return reward::mse_objective(p, reg, nullptr); }, g));
    reward::ce_objective(params, pairs, &g);
    worst_ce = std::max(worst_ce, max_gradient_error(
                                      params, [&](const reward::MLPParams& p) { return reward::ce_objective(p, pairs, nullptr); }, g));
  }
  return check(worst_mse < 1e-4 && worst_ce < 1e-4,
               "max relative error mse " + fmt(worst_mse) + ", preference " + fmt(worst_ce));
}

// -- 3 ----------------------------------------------------------------------

Outcome rouge_oracle_check() {
  using metrics::RougeVariant;
  Rng rng(3);
  int mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto c = testkit::random_tokens(rng, rng.index(11), 5);
    const auto r = testkit::random_tokens(rng, rng.index(11), 5);
    const auto ct = text::make_tokenized({c});
    const auto rt = text::make_tokenized({r});
    for (std::size_t n : {1u, 2u}) {
      const double expect = testkit::f1_of(testkit::clipped_overlap(c, r, n), c.size() >= n ? c.size() - n + 1.0 : 0.0,
                                           r.size() >= n ? r.size() - n + 1.0 : 0.0);
      mismatches += metrics::rouge(ct, rt, RougeVariant::rouge_n(n)).f1 != expect;
    }
    const double lcs = static_cast<double>(testkit::brute_lcs(c, r));
    mismatches += metrics::rouge(ct, rt, RougeVariant::rouge_l()).f1 !=
                  testkit::f1_of(lcs, static_cast<double>(c.size()), static_cast<double>(r.size()));
  }
  bool identity = true;
  bool disjoint = true;
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = testkit::random_tokens(rng, 1 + rng.index(10), 5);
    text::Tokens b;
    for (const auto& t : a) b.push_back("x" + t);
    const auto at = text::make_tokenized({a});
    const auto bt = text::make_tokenized({b});
    for (const auto v : {RougeVariant::rouge_n(1), RougeVariant::rouge_n(2), RougeVariant::rouge_l()}) {
      if (v.kind != RougeVariant::Kind::N || a.size() >= v.n) identity = identity && metrics::rouge(at, at, v).f1 == 1.0;
      disjoint = disjoint && metrics::rouge(at, bt, v).f1 == 0.0;
    }
  }
  return check(mismatches == 0 && identity && disjoint,
               std::to_string(mismatches) + " oracle mismatches, identity " + (identity ? "1" : "not 1") +
                   ", disjoint " + (disjoint ? "0" : "not 0"));
}

// -- 4 ----------------------------------------------------------------------

Outcome correlation_oracle_check() {
  Rng rng(4);
  double worst = 0.0;
  int undefined_ok = 0;
  int compared = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.index(40);
    std::vector<double> x, y;
    for (std::size_t i = 0; i < n; ++i) {
      x.push_back(rng.uniform() < 0.4 ? static_cast<double>(rng.index(3)) : rng.normal());
      y.push_back(rng.uniform() < 0.4 ? static_cast<double>(rng.index(3)) : rng.normal());
    }
    const auto rx = testkit::rank_oracle(x);
    const auto ry = testkit::rank_oracle(y);
    const double p = testkit::pearson_oracle(x, y);
    if (!std::isfinite(p)) {
      try {
        eval::pearson(x, y);
      } catch (const UndefinedStatistic&) {
        ++undefined_ok;
      }
      continue;
    }
    ++compared;
    worst = std::max(worst, std::abs(eval::pearson(x, y) - p));
    worst = std::max(worst, std::abs(eval::spearman(x, y) - testkit::pearson_oracle(rx, ry)));
  }
  return check(worst <= 1e-10 && compared + undefined_ok == 1000,
               "max deviation " + fmt(worst) + " over " + std::to_string(compared) + " defined cases");
}

// -- 5 ----------------------------------------------------------------------

Outcome simred_check() {
  using reward::SimRedConfig;
  Rng rng(5);
  const Vector s = testkit::random_vector(rng, 6);
  const std::vector<Vector> one{s};
  const std::vector<Vector> dup{s, s};
  const double single = reward::simred_reward(one, one, SimRedConfig::identity(6));
  const double duplicate = reward::simred_reward(dup, one, SimRedConfig::identity(6));
  bool in_range = true;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t dim = 1 + rng.index(8);
    std::vector<Vector> a, b;
    for (std::size_t i = 0, n = 1 + rng.index(6); i < n; ++i) a.push_back(testkit::random_vector(rng, dim));
    for (std::size_t i = 0, n = 1 + rng.index(8); i < n; ++i) b.push_back(testkit::random_vector(rng, dim));
    const double r = reward::simred_reward(a, b, SimRedConfig::identity(dim));
    in_range = in_range && r >= -1.0 && r <= 1.0;
  }
  return check(single == 0.85 && duplicate == 0.70 && in_range,
               "single " + fmt(single, 17) + ", duplicate " + fmt(duplicate, 17) + ", range " +
                   (in_range ? "ok" : "violated"));
}

// -- 6 ----------------------------------------------------------------------

Outcome power_mean_check() {
  Rng rng(6);
  bool closed_forms = true;
  bool ordered = true;
  const double inf = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t dim = 1 + rng.index(5);
    std::vector<Vector> vs;
    for (std::size_t i = 0, n = 1 + rng.index(6); i < n; ++i) {
      Vector v(static_cast<Eigen::Index>(dim));
      // Multiples of 1/8 keep the sum exact.
      for (auto& x : v) x = static_cast<double>(rng.index(81)) / 8.0 - 5.0;
      vs.push_back(v);
    }
    Vector sum = Vector::Zero(static_cast<Eigen::Index>(dim));
    Vector mx = vs[0], mn = vs[0];
    for (const auto& v : vs) {
      sum += v;
      mx = mx.cwiseMax(v);
      mn = mn.cwiseMin(v);
    }
    closed_forms = closed_forms && embeddings::power_mean(vs, 1.0) == sum / static_cast<double>(vs.size()) &&
                   embeddings::power_mean(vs, inf) == mx && embeddings::power_mean(vs, -inf) == mn;

    std::vector<Vector> pos;
    for (const auto& v : vs) pos.push_back(v.cwiseAbs());
    const Vector lo = embeddings::power_mean(pos, -inf);
    const Vector mean = embeddings::power_mean(pos, 1.0);
    const Vector hi = embeddings::power_mean(pos, inf);
    ordered = ordered && (lo.array() <= mean.array() + 1e-12).all() && (mean.array() <= hi.array() + 1e-12).all();
  }
  return check(closed_forms && ordered, std::string("closed forms ") + (closed_forms ? "exact" : "inexact") +
                                            ", min <= mean <= max " + (ordered ? "holds" : "violated"));
}

// -- 7 ----------------------------------------------------------------------

Outcome good_summary_check() {
  Rng rng(7);
  std::vector<std::vector<double>> human;
  for (int a = 0; a < 50; ++a) {
    std::vector<double> r;
    for (int s = 0; s < 4; ++s) r.push_back(rng.uniform(-1, 1));
    human.push_back(r);
  }
  human.push_back({-1.0, 1.0});
  const auto oracle = eval::g_precision_recall(human, human);
  const auto example = eval::good_summary_set(std::vector<double>{1.0, 0.6, 0.4, 0.2, -1.0});
  return check(oracle.g_pre == 1.0 && oracle.g_rec == 1.0 && example == std::set<std::size_t>{0, 1},
               "oracle (" + fmt(oracle.g_pre) + ", " + fmt(oracle.g_rec) + "), worked example set size " +
                   std::to_string(example.size()));
}

// -- 8 ----------------------------------------------------------------------

Outcome learnability_check() {
  const auto c = testkit::make_synthetic_corpus();
  const auto enc = c.encoder();
  const reward::EncodedCorpus encoded(c.dataset, enc);
  const auto split = corpus::split_folds(c.dataset, 5, 1)[0];

  auto held_out = [&](reward::LossKind loss, double& seconds) {
    reward::TrainConfig cfg;
    cfg.loss = loss;
    const auto start = std::chrono::steady_clock::now();
    const auto trained = reward::train_reward_model(c.dataset, split, encoded, cfg);
    seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const auto q = eval::evaluate_scorer(
        c.dataset,
        [&](const corpus::RatedArticle& a, std::size_t i) {
          const auto& e = encoded.article(a.article_id);
          return trained.model.forward(e.document, e.summaries[i]);
        },
        split.test_ids);
    return q.spearman_rho.value_or(-2.0);
  };
  double pref_s = 0.0, mse_s = 0.0;
  const double pref = held_out(reward::LossKind::preference, pref_s);
  const double mse = held_out(reward::LossKind::mse, mse_s);
  return check(pref >= 0.8 && mse >= 0.7 && pref_s < 120 && mse_s < 120,
               "held-out rho preference " + fmt(pref) + " (" + fmt(pref_s, 3) + " s), regression " + fmt(mse) +
                   " (" + fmt(mse_s, 3) + " s)");
}

// -- 9 ----------------------------------------------------------------------

Outcome rl_toy_check() {
  int successes = 0;
  bool invariants = true;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto toy = testkit::make_toy_document(500 + seed);
    rl::EpisodeConfig cfg;
    cfg.token_budget = 40;
    cfg.episodes = 3000;
    cfg.lead_bonus = 0.0;
    cfg.seed = seed;
    const auto result = rl::summarize(toy.doc, testkit::payload_fraction_reward(toy), cfg);
    try {
      rl::validate_draft(result.draft, toy.doc);
    } catch (const std::invalid_argument&) {
      invariants = false;
    }
    invariants = invariants && result.draft.token_count <= cfg.token_budget;
    int hits = 0;
    for (const auto p : toy.payload) hits += result.draft.contains(p);
    successes += hits >= 2;
  }
  return check(successes >= 16 && invariants, std::to_string(successes) + "/20 runs found >= 2 payloads, invariants " +
                                                   (invariants ? "hold" : "violated"));
}

// -- 10 ---------------------------------------------------------------------

Outcome telescoping_check() {
  Rng rng(10);
  rl::EpisodeConfig cfg;
  cfg.reward_scheme = rl::RewardScheme::stepwise;
  cfg.lead_bonus = 0.0;
  cfg.gamma = 1.0;
  int exact = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto toy = testkit::make_toy_document(rng.next_u64(), 2 + rng.index(12), 2, 3, 1);
    std::map<std::vector<std::size_t>, double> table;
    auto reward = [&](const rl::DraftSummary& d) {
      auto key = d.selected;
      std::sort(key.begin(), key.end());
      auto it = table.find(key);
      // Values on a 1/256 grid keep every partial sum exact.
      if (it == table.end()) it = table.emplace(key, static_cast<double>(rng.index(513)) / 256.0 - 1.0).first;
      return it->second;
    };
    rl::Trajectory traj;
    traj.states.emplace_back();
    for (std::size_t k = 0, n = rng.index(toy.doc.size() + 1); k < n; ++k) {
      std::size_t pick;
      do {
        pick = rng.index(toy.doc.size());
      } while (traj.states.back().contains(pick));
      traj.states.push_back(rl::extend(traj.states.back(), toy.doc, pick));
    }
    auto stop = traj.states.back();
    stop.terminated = true;
    traj.states.push_back(stop);
    const auto r = rl::episode_reward(traj, reward, cfg);
    double sum = reward(traj.states.front());
    for (std::size_t t = 0; t + 1 < r.size(); ++t) sum += r[t];
    exact += sum == reward(traj.states.back()) && r.back() == reward(traj.states.back());
  }
  return check(exact == 100, std::to_string(exact) + "/100 trajectories reconstruct the terminal reward");
}

// -- 11 / 12 ----------------------------------------------------------------

corpus::Dataset without_system(const corpus::Dataset& in, const std::string& system) {
  corpus::Dataset out;
  for (const auto& a : in.articles) {
    corpus::RatedArticle copy = a;
    copy.summaries.clear();
    for (const auto& s : a.summaries) {
      if (s.system_id != system) copy.summaries.push_back(s);
    }
    if (copy.summaries.size() >= 2) out.articles.push_back(std::move(copy));
  }
  return out;
}

Outcome reference_metric_check() {
  const auto path = env("SUMREWARD_CORPUS");
  if (!path) return {Status::skip, "set SUMREWARD_CORPUS to run"};
  const auto system = env("SUMREWARD_REFERENCE_SYSTEM").value_or("reference");
  const auto refs = scorers::split_references(corpus::load_dataset(*path), system);
  bool ok = true;
  std::string detail;
  for (const auto& name : scorers::reference_metric_names()) {
    const auto q = eval::evaluate_scorer(refs.dataset, scorers::reference_metric_scorer(name, refs));
    const double rho = q.spearman_rho.value_or(-2.0);
    ok = ok && rho >= 0.15 && rho <= 0.40 && q.g_pre < 0.55 && q.g_rec < 0.55;
    detail += name + " rho " + fmt(rho, 3) + " G " + fmt(q.g_pre, 3) + "/" + fmt(q.g_rec, 3) + "; ";
  }
  return check(ok, detail);
}

Outcome learned_reward_check() {
  const auto path = env("SUMREWARD_CORPUS");
  const auto vectors = env("SUMREWARD_VECTORS");
  if (!path || !vectors) return {Status::skip, "set SUMREWARD_CORPUS and SUMREWARD_VECTORS to run"};
  const auto system = env("SUMREWARD_REFERENCE_SYSTEM").value_or("reference");
  const auto ds = without_system(corpus::load_dataset(*path), system);
  embeddings::PMeansConfig pm;
  if (const auto p = env("SUMREWARD_PVALUES")) pm = embeddings::PMeansConfig::parse(*p);
  const auto enc = embeddings::PMeansEncoder::from_file(*vectors, pm);
  const reward::EncodedCorpus encoded(ds, enc);
  auto mean_rho = [&](reward::LossKind loss) {
    const eval::ScorerTrainer trainer = [&](const corpus::Dataset& d, const corpus::FoldSplit& split) {
      reward::TrainConfig cfg;
      cfg.loss = loss;
      auto model = std::make_shared<reward::RewardModel>(reward::train_reward_model(d, split, encoded, cfg).model);
      return eval::SummaryScorer([model, &encoded](const corpus::RatedArticle& a, std::size_t i) {
        const auto& e = encoded.article(a.article_id);
        return model->forward(e.document, e.summaries[i]);
      });
    };
    return eval::cross_validate(ds, 5, 0, trainer).summary.spearman_rho.value_or(-2.0);
  };
  const double pref = mean_rho(reward::LossKind::preference);
  const double mse = mean_rho(reward::LossKind::mse);
  return check(pref >= 0.20 && pref <= 0.45 && pref >= mse - 0.03,
               "5-fold mean rho preference " + fmt(pref, 3) + ", regression " + fmt(mse, 3));
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"preference probability symmetry, monotonicity, overflow", preference_probability_check},
      {"MLP gradients match central differences", gradient_check},
      {"ROUGE-1/2/L match brute-force oracle", rouge_oracle_check},
      {"Spearman/Pearson match direct definitions", correlation_oracle_check},
      {"SimRed closed-form cases and range", simred_check},
      {"power-mean closed forms and ordering", power_mean_check},
      {"G-Pre/G-Rec oracle and worked example", good_summary_check},
      {"synthetic reward learnability", learnability_check},
      {"RL toy convergence", rl_toy_check},
      {"stepwise reward telescoping", telescoping_check},
      {"reference metrics on the rated corpus", reference_metric_check},
      {"learned PMeans reward on the rated corpus", learned_reward_check},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {Status::fail, std::string("exception: ") + e.what()};
    }
    const char* label = o.status == Status::pass ? "PASS" : o.status == Status::fail ? "FAIL" : "SKIP";
    failures += o.status == Status::fail;
    std::cout << "[" << label << "] " << (i + 1) << ". " << criteria[i].first << ": " << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
