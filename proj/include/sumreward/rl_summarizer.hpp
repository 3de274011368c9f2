#pragma once

#include "sumreward/common.hpp"
#include "sumreward/embeddings.hpp"
#include "sumreward/reward_model.hpp"
#include "sumreward/simred.hpp"
#include "sumreward/value_net.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace sumreward::rl {

// A document prepared for sentence selection. Pairwise sentence cosines and
// each sentence's mean cosine to the whole document are cached.
struct EncodedDocument {
  std::vector<std::string> sentences;
  std::vector<Vector> embeddings;
  std::vector<std::size_t> token_counts;
  Matrix cosine;
  Vector coverage;

  static EncodedDocument build(std::vector<std::string> sentences, std::vector<Vector> embeddings,
                               std::vector<std::size_t> token_counts);
  std::size_t size() const { return sentences.size(); }
  std::size_t dim() const;
};

// Splits and encodes one sentence at a time. Sentences without tokens are
// dropped. Token counts use the encoder's preprocessing (lowercase only).
EncodedDocument encode_document(std::string_view text, const embeddings::TextEncoder& encoder);

struct DraftSummary {
  std::vector<std::size_t> selected;  // in selection order
  std::size_t token_count = 0;
  bool terminated = false;

  bool contains(std::size_t index) const;
  std::size_t lead_count(std::size_t lead_k) const;
};

// Throws std::invalid_argument unless indices are unique, in range and the
// token count matches.
void validate_draft(const DraftSummary& draft, const EncodedDocument& doc);

DraftSummary extend(const DraftSummary& draft, const EncodedDocument& doc, std::size_t index);

enum class RewardScheme { delayed, stepwise };
RewardScheme parse_scheme(std::string_view name);
std::string to_string(RewardScheme scheme);

struct EpisodeConfig {
  std::size_t token_budget = 85;
  double lead_bonus = 0.5;
  std::size_t lead_k = 3;
  int episodes = 3000;
  double learning_rate = 0.01;
  std::uint64_t seed = 0;
  RewardScheme reward_scheme = RewardScheme::delayed;
  double gamma = 1.0;

  void validate() const;
  nlohmann::json to_json() const;
};

// [mean selected embedding | max pairwise cosine | mean draft-to-document
//  cosine | tokens / budget | fraction of selections below lead_k]
std::size_t feature_dim(const EncodedDocument& doc);
Vector draft_features(const DraftSummary& draft, const EncodedDocument& doc,
                      const EpisodeConfig& cfg);

inline constexpr std::size_t kStop = std::numeric_limits<std::size_t>::max();

struct PolicyDistribution {
  std::vector<std::size_t> actions;  // sentence indices, kStop last
  std::vector<double> probabilities;
};

// Numerically stable softmax.
std::vector<double> softmax(std::span<const double> logits);

// Unselected sentences that fit in the remaining budget.
std::vector<std::size_t> candidate_sentences(const DraftSummary& draft, const EncodedDocument& doc,
                                             const EpisodeConfig& cfg);

using ValueFunction = std::function<double(const DraftSummary&)>;

// Softmax over V of every one-step extension plus STOP, which is valued as
// the current draft terminated.
PolicyDistribution policy_distribution(const DraftSummary& draft, const EncodedDocument& doc,
                                       const EpisodeConfig& cfg, const ValueFunction& value);
PolicyDistribution policy_distribution(const DraftSummary& draft, const EncodedDocument& doc,
                                       const EpisodeConfig& cfg, const ValueNet& net);

using DraftReward = std::function<double(const DraftSummary&)>;

// states[0] is the empty draft; each step appends a sentence and the final
// step is STOP, so a trajectory of k selections has k + 1 steps and
// states.back() is the terminated draft.
struct Trajectory {
  std::vector<DraftSummary> states;
  std::size_t steps() const { return states.empty() ? 0 : states.size() - 1; }
};

std::vector<double> episode_reward(const Trajectory& trajectory, const DraftReward& reward,
                                   const EpisodeConfig& cfg);

struct EpisodeTrace {
  int episode = 0;
  double terminal_reward = 0.0;  // reward of the episode's final draft plus lead bonus
  double best_reward = 0.0;      // best terminal reward so far
};

struct PolicyResult {
  ValueNet net;
  DraftSummary best;
  double best_reward = 0.0;
  std::vector<EpisodeTrace> trace;
};

PolicyResult train_policy_for_document(const EncodedDocument& doc, const DraftReward& reward,
                                       const EpisodeConfig& cfg);

struct SummaryResult {
  std::string summary;
  DraftSummary draft;  // selected indices in document order
  double best_reward = 0.0;
  std::vector<EpisodeTrace> trace;
};

SummaryResult summarize(const EncodedDocument& doc, const DraftReward& reward,
                        const EpisodeConfig& cfg);

// Reward adapters. An empty draft scores the model on a zero summary
// embedding; SimRed and ROUGE give 0 for it.
DraftReward learned_draft_reward(const reward::RewardModel& model, const EncodedDocument& doc);
DraftReward simred_draft_reward(const reward::SimRedConfig& cfg, const EncodedDocument& doc);
// Mean of ROUGE-1, ROUGE-2 and ROUGE-L F1 against a reference text.
DraftReward rouge_draft_reward(std::string_view reference, const EncodedDocument& doc);

// Renders the draft's sentences in document order.
std::string render(const DraftSummary& draft, const EncodedDocument& doc);

nlohmann::json to_json(const EpisodeTrace& t);

}  // namespace sumreward::rl
