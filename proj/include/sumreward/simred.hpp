#pragma once

#include "sumreward/common.hpp"
#include "sumreward/corpus.hpp"
#include "sumreward/embeddings.hpp"
#include "sumreward/reward_model.hpp"

#include <json.hpp>

#include <filesystem>
#include <span>
#include <vector>

namespace sumreward::reward {

struct SimRedConfig {
  double alpha = 0.85;
  Matrix projection;  // square; an empty matrix means identity

  static SimRedConfig identity(std::size_t dim, double alpha = 0.85);
  void validate() const;
};

// alpha * mean_ij cos(P s_i, P d_j)
//   - (1 - alpha) * mean_{k<l} cos(P s_k, P s_l)^2
// The redundancy term is 0 for a one-sentence summary.
double simred_reward(std::span<const Vector> summary_sents, std::span<const Vector> doc_sents,
                     const SimRedConfig& cfg);

// Same value; `grad_projection` receives d(reward)/d(projection).
double simred_reward(std::span<const Vector> summary_sents, std::span<const Vector> doc_sents,
                     const SimRedConfig& cfg, Matrix* grad_projection);

struct SimRedModel {
  SimRedConfig config;
  embeddings::EncoderSpec encoder_spec;
};

struct TrainedSimRed {
  SimRedModel model;
  TrainingReport report;
};

// Trains the projection with the same losses and early stopping as the MLP
// reward. alpha stays fixed. Needs an encoder with sentence-level output.
TrainedSimRed train_simred(const corpus::Dataset& dataset, const corpus::FoldSplit& split,
                           const embeddings::TextEncoder& encoder, const TrainConfig& cfg,
                           double alpha = 0.85);

double score(const SimRedModel& model, const embeddings::TextEncoder& encoder,
             std::string_view article_text, std::string_view summary_text);

nlohmann::json to_json(const SimRedModel& model);
SimRedModel simred_model_from_json(const nlohmann::json& j);

}  // namespace sumreward::reward
