#include "sumreward/rl_summarizer.hpp"

#include "sumreward/metrics.hpp"
#include "sumreward/text.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace sumreward::rl {

using nlohmann::json;

EncodedDocument EncodedDocument::build(std::vector<std::string> sentences,
                                       std::vector<Vector> embeddings,
                                       std::vector<std::size_t> token_counts) {
  if (sentences.size() != embeddings.size() || sentences.size() != token_counts.size()) {
    throw std::invalid_argument("EncodedDocument: sentence, embedding and token lists differ in length");
  }
  EncodedDocument doc;
  doc.sentences = std::move(sentences);
  doc.embeddings = std::move(embeddings);
  doc.token_counts = std::move(token_counts);
  const auto n = static_cast<Eigen::Index>(doc.size());
  for (const auto& e : doc.embeddings) {
    if (e.size() != doc.embeddings.front().size()) {
      throw std::invalid_argument("EncodedDocument: embeddings of mixed lengths");
    }
  }
  doc.cosine = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const double c = metrics::cosine_similarity(doc.embeddings[static_cast<std::size_t>(i)],
                                                  doc.embeddings[static_cast<std::size_t>(j)]);
      doc.cosine(i, j) = c;
      doc.cosine(j, i) = c;
    }
  }
  doc.coverage = n > 0 ? Vector(doc.cosine.rowwise().mean()) : Vector();
  return doc;
}

std::size_t EncodedDocument::dim() const {
  return embeddings.empty() ? 0 : static_cast<std::size_t>(embeddings.front().size());
}

EncodedDocument encode_document(std::string_view text, const embeddings::TextEncoder& encoder) {
  std::vector<std::string> sentences;
  std::vector<Vector> vectors;
  std::vector<std::size_t> counts;
  for (auto& s : text::split_sentences(text)) {
    const auto tokens = text::tokenize_and_preprocess(s, text::PreprocessOptions::for_encoders());
    if (tokens.empty()) continue;
    const auto parts = encoder.encode_sentences(s);
    if (parts.empty()) continue;
    Vector v = Vector::Zero(parts.front().size());
    for (const auto& p : parts) v += p;
    v /= static_cast<double>(parts.size());
    sentences.push_back(std::move(s));
    vectors.push_back(std::move(v));
    counts.push_back(tokens.size());
  }
  if (sentences.empty()) throw DataError("document has no sentences");
  return EncodedDocument::build(std::move(sentences), std::move(vectors), std::move(counts));
}

bool DraftSummary::contains(std::size_t index) const {
  return std::find(selected.begin(), selected.end(), index) != selected.end();
}

std::size_t DraftSummary::lead_count(std::size_t lead_k) const {
  return static_cast<std::size_t>(
      std::count_if(selected.begin(), selected.end(), [&](std::size_t i) { return i < lead_k; }));
}

void validate_draft(const DraftSummary& draft, const EncodedDocument& doc) {
  std::vector<bool> seen(doc.size(), false);
  std::size_t tokens = 0;
  for (const auto i : draft.selected) {
    if (i >= doc.size()) {
      throw std::invalid_argument("draft: sentence index " + std::to_string(i) + " out of range");
    }
    if (seen[i]) throw std::invalid_argument("draft: duplicate sentence index " + std::to_string(i));
    seen[i] = true;
    tokens += doc.token_counts[i];
  }
  if (tokens != draft.token_count) throw std::invalid_argument("draft: token count mismatch");
}

DraftSummary extend(const DraftSummary& draft, const EncodedDocument& doc, std::size_t index) {
  if (index >= doc.size()) throw std::invalid_argument("extend: sentence index out of range");
  if (draft.terminated) throw std::invalid_argument("extend: draft is terminated");
  if (draft.contains(index)) throw std::invalid_argument("extend: sentence already selected");
  DraftSummary out = draft;
  out.selected.push_back(index);
  out.token_count += doc.token_counts[index];
  return out;
}

RewardScheme parse_scheme(std::string_view name) {
  if (name == "delayed") return RewardScheme::delayed;
  if (name == "stepwise") return RewardScheme::stepwise;
  throw std::invalid_argument("unknown reward scheme '" + std::string(name) + "'");
}

std::string to_string(RewardScheme scheme) {
  return scheme == RewardScheme::delayed ? "delayed" : "stepwise";
}

void EpisodeConfig::validate() const {
  if (token_budget == 0) throw std::invalid_argument("token budget must be positive");
  if (episodes <= 0) throw std::invalid_argument("episodes must be positive");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("learning rate must be positive");
  }
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must be in (0, 1]");
  if (!std::isfinite(lead_bonus)) throw std::invalid_argument("lead bonus must be finite");
}

json EpisodeConfig::to_json() const {
  return {{"token_budget", token_budget}, {"lead_bonus", lead_bonus},
          {"lead_k", lead_k},             {"episodes", episodes},
          {"learning_rate", learning_rate}, {"seed", seed},
          {"reward_scheme", to_string(reward_scheme)}, {"gamma", gamma}};
}

std::size_t feature_dim(const EncodedDocument& doc) { return doc.dim() + 4; }

Vector draft_features(const DraftSummary& draft, const EncodedDocument& doc,
                      const EpisodeConfig& cfg) {
  validate_draft(draft, doc);
  const auto dim = static_cast<Eigen::Index>(doc.dim());
  Vector f = Vector::Zero(dim + 4);
  const auto& sel = draft.selected;
  if (sel.empty()) return f;
  const auto k = static_cast<double>(sel.size());
  double redundancy = 0.0;
  double coverage = 0.0;
  for (std::size_t a = 0; a < sel.size(); ++a) {
    f.head(dim) += doc.embeddings[sel[a]];
    coverage += doc.coverage(static_cast<Eigen::Index>(sel[a]));
    for (std::size_t b = a + 1; b < sel.size(); ++b) {
      const double c = doc.cosine(static_cast<Eigen::Index>(sel[a]), static_cast<Eigen::Index>(sel[b]));
      redundancy = (a == 0 && b == 1) ? c : std::max(redundancy, c);
    }
  }
  f.head(dim) /= k;
  f(dim) = redundancy;
  f(dim + 1) = coverage / k;
  f(dim + 2) = static_cast<double>(draft.token_count) / static_cast<double>(cfg.token_budget);
  f(dim + 3) = static_cast<double>(draft.lead_count(cfg.lead_k)) / k;
  return f;
}

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) throw std::invalid_argument("softmax: empty input");
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - top);
    total += out[i];
  }
  for (auto& p : out) p /= total;
  return out;
}

std::vector<std::size_t> candidate_sentences(const DraftSummary& draft, const EncodedDocument& doc,
                                             const EpisodeConfig& cfg) {
  std::vector<std::size_t> out;
  if (draft.terminated) return out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    if (draft.contains(i)) continue;
    if (draft.token_count + doc.token_counts[i] > cfg.token_budget) continue;
    out.push_back(i);
  }
  return out;
}

PolicyDistribution policy_distribution(const DraftSummary& draft, const EncodedDocument& doc,
                                       const EpisodeConfig& cfg, const ValueFunction& value) {
  PolicyDistribution dist;
  dist.actions = candidate_sentences(draft, doc, cfg);
  std::vector<double> logits;
  logits.reserve(dist.actions.size() + 1);
  for (const auto i : dist.actions) logits.push_back(value(extend(draft, doc, i)));
  DraftSummary stopped = draft;
  stopped.terminated = true;
  logits.push_back(value(stopped));
  dist.actions.push_back(kStop);
  dist.probabilities = softmax(logits);
  return dist;
}

PolicyDistribution policy_distribution(const DraftSummary& draft, const EncodedDocument& doc,
                                       const EpisodeConfig& cfg, const ValueNet& net) {
  PolicyDistribution dist;
  dist.actions = candidate_sentences(draft, doc, cfg);
  Matrix xs(static_cast<Eigen::Index>(feature_dim(doc)),
            static_cast<Eigen::Index>(dist.actions.size() + 1));
  for (std::size_t c = 0; c < dist.actions.size(); ++c) {
    xs.col(static_cast<Eigen::Index>(c)) = draft_features(extend(draft, doc, dist.actions[c]), doc, cfg);
  }
  xs.col(xs.cols() - 1) = draft_features(draft, doc, cfg);
  dist.actions.push_back(kStop);
  const Vector v = net.values(xs);
  dist.probabilities = softmax(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
  return dist;
}

namespace {

void check_trajectory(const Trajectory& t) {
  if (t.states.size() < 2) throw std::invalid_argument("trajectory: needs at least a STOP step");
  if (!t.states.front().selected.empty()) throw std::invalid_argument("trajectory: must start empty");
  const auto& last = t.states.back();
  const auto& before = t.states[t.states.size() - 2];
  if (!last.terminated || last.selected != before.selected) {
    throw std::invalid_argument("trajectory: must end with STOP");
  }
  for (std::size_t s = 1; s + 1 < t.states.size(); ++s) {
    const auto& prev = t.states[s - 1].selected;
    const auto& cur = t.states[s].selected;
    if (cur.size() != prev.size() + 1 || !std::equal(prev.begin(), prev.end(), cur.begin())) {
      throw std::invalid_argument("trajectory: each step must add one sentence");
    }
  }
}

double lead_bonus_for(std::size_t index, const EpisodeConfig& cfg) {
  return index < cfg.lead_k ? cfg.lead_bonus : 0.0;
}

}  // namespace

std::vector<double> episode_reward(const Trajectory& trajectory, const DraftReward& reward,
                                   const EpisodeConfig& cfg) {
  check_trajectory(trajectory);
  const std::size_t steps = trajectory.steps();
  const auto& final_draft = trajectory.states.back();
  std::vector<double> r(steps, 0.0);
  if (cfg.reward_scheme == RewardScheme::delayed) {
    r.back() = reward(final_draft) +
               cfg.lead_bonus * static_cast<double>(final_draft.lead_count(cfg.lead_k));
    return r;
  }
  double previous = reward(trajectory.states.front());
  for (std::size_t t = 0; t + 1 < steps; ++t) {
    const auto& next = trajectory.states[t + 1];
    const double current = reward(next);
    r[t] = current - previous + lead_bonus_for(next.selected.back(), cfg);
    previous = current;
  }
  r.back() = reward(final_draft);
  return r;
}

PolicyResult train_policy_for_document(const EncodedDocument& doc, const DraftReward& reward,
                                       const EpisodeConfig& cfg) {
  cfg.validate();
  if (doc.size() == 0) throw std::invalid_argument("train_policy_for_document: empty document");
  Rng rng(cfg.seed);
  PolicyResult result{ValueNet(feature_dim(doc), rng), {}, 0.0, {}};
  ValueNet& net = result.net;

  std::map<std::vector<std::size_t>, double> cache;
  const DraftReward cached = [&](const DraftSummary& d) {
    std::vector<std::size_t> key = d.selected;
    std::sort(key.begin(), key.end());
    const auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    const double v = reward(d);
    cache.emplace(std::move(key), v);
    return v;
  };

  bool have_best = false;
  result.trace.reserve(static_cast<std::size_t>(cfg.episodes));
  for (int episode = 0; episode < cfg.episodes; ++episode) {
    Trajectory traj;
    traj.states.emplace_back();
    while (true) {
      const auto& cur = traj.states.back();
      const auto dist = policy_distribution(cur, doc, cfg, net);
      const double u = rng.uniform();
      std::size_t pick = dist.actions.size() - 1;
      double cumulative = 0.0;
      for (std::size_t a = 0; a < dist.actions.size(); ++a) {
        cumulative += dist.probabilities[a];
        if (u < cumulative) {
          pick = a;
          break;
        }
      }
      if (dist.actions[pick] == kStop) {
        DraftSummary stopped = cur;
        stopped.terminated = true;
        traj.states.push_back(std::move(stopped));
        break;
      }
      traj.states.push_back(extend(cur, doc, dist.actions[pick]));
    }

    const auto rewards = episode_reward(traj, cached, cfg);
    const std::size_t steps = traj.steps();
    std::vector<Vector> features;
    features.reserve(steps);
    for (std::size_t t = 0; t < steps; ++t) features.push_back(draft_features(traj.states[t], doc, cfg));
    for (std::size_t t = steps; t-- > 0;) {
      const double next = t + 1 == steps ? 0.0 : net.value(features[t + 1]);
      const double delta = rewards[t] + cfg.gamma * next - net.value(features[t]);
      net.ascend(features[t], cfg.learning_rate * delta);
    }
    if (!net.all_finite()) throw std::runtime_error("value network diverged");

    const auto& final_draft = traj.states.back();
    const double objective =
        cached(final_draft) + cfg.lead_bonus * static_cast<double>(final_draft.lead_count(cfg.lead_k));
    if (!have_best || objective > result.best_reward) {
      have_best = true;
      result.best_reward = objective;
      result.best = final_draft;
    }
    result.trace.push_back({episode, objective, result.best_reward});
  }
  return result;
}

std::string render(const DraftSummary& draft, const EncodedDocument& doc) {
  std::vector<std::size_t> order = draft.selected;
  std::sort(order.begin(), order.end());
  std::string out;
  for (const auto i : order) {
    if (!out.empty()) out += ' ';
    out += doc.sentences.at(i);
  }
  return out;
}

SummaryResult summarize(const EncodedDocument& doc, const DraftReward& reward,
                        const EpisodeConfig& cfg) {
  auto policy = train_policy_for_document(doc, reward, cfg);
  SummaryResult out;
  out.draft = std::move(policy.best);
  std::sort(out.draft.selected.begin(), out.draft.selected.end());
  out.summary = render(out.draft, doc);
  out.best_reward = policy.best_reward;
  out.trace = std::move(policy.trace);
  return out;
}

DraftReward learned_draft_reward(const reward::RewardModel& model, const EncodedDocument& doc) {
  Vector doc_emb = Vector::Zero(static_cast<Eigen::Index>(doc.dim()));
  for (const auto& e : doc.embeddings) doc_emb += e;
  if (!doc.embeddings.empty()) doc_emb /= static_cast<double>(doc.embeddings.size());
  return [&model, &doc, doc_emb](const DraftSummary& d) {
    Vector s = Vector::Zero(doc_emb.size());
    for (const auto i : d.selected) s += doc.embeddings.at(i);
    if (!d.selected.empty()) s /= static_cast<double>(d.selected.size());
    return model.forward(doc_emb, s);
  };
}

DraftReward simred_draft_reward(const reward::SimRedConfig& cfg, const EncodedDocument& doc) {
  return [cfg, &doc](const DraftSummary& d) {
    if (d.selected.empty()) return 0.0;
    std::vector<Vector> chosen;
    chosen.reserve(d.selected.size());
    for (const auto i : d.selected) chosen.push_back(doc.embeddings.at(i));
    return reward::simred_reward(chosen, doc.embeddings, cfg);
  };
}

DraftReward rouge_draft_reward(std::string_view reference, const EncodedDocument& doc) {
  const auto opts = text::PreprocessOptions::for_metrics();
  auto ref = text::tokenize_text(reference, opts);
  return [ref = std::move(ref), opts, &doc](const DraftSummary& d) {
    if (d.selected.empty()) return 0.0;
    const auto cand = text::tokenize_text(render(d, doc), opts);
    const double r1 = metrics::rouge(cand, ref, metrics::RougeVariant::rouge_n(1)).f1;
    const double r2 = metrics::rouge(cand, ref, metrics::RougeVariant::rouge_n(2)).f1;
    const double rl = metrics::rouge(cand, ref, metrics::RougeVariant::rouge_l()).f1;
    return (r1 + r2 + rl) / 3.0;
  };
}

json to_json(const EpisodeTrace& t) {
  return {{"episode", t.episode}, {"terminal_reward", t.terminal_reward}, {"best_reward", t.best_reward}};
}

}  // namespace sumreward::rl
