#pragma once

#include "sumreward/corpus.hpp"
#include "sumreward/embeddings.hpp"
#include "sumreward/mlp.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sumreward::reward {

enum class LossKind { mse, preference };

LossKind parse_loss(std::string_view name);
std::string to_string(LossKind loss);

struct TrainConfig {
  LossKind loss = LossKind::preference;
  double learning_rate = 1e-3;
  int epochs = 50;
  int batch_size = 32;
  std::uint64_t seed = 0;
  int hidden_dim = 100;
  int early_stop_patience = 5;  // epochs without a better validation Spearman

  void validate() const;
  nlohmann::json to_json() const;
};

struct ScoreRange {
  double min = 0.0;
  double max = 0.0;
};

struct RewardModel {
  MLPParams params;
  embeddings::EncoderSpec encoder_spec;
  std::optional<ScoreRange> normalization;  // prediction range on the training summaries

  double forward(const Vector& doc_emb, const Vector& sum_emb) const;
};

struct TrainingReport {
  std::vector<double> train_loss;                   // mean batch loss per epoch
  std::vector<std::optional<double>> val_spearman;  // per epoch; empty when undefined
  int best_epoch = -1;                              // 0-based; -1 when never validated
  int epochs_run = 0;
  bool early_stopped = false;
  std::size_t train_examples = 0;  // summaries (mse) or preference pairs

  nlohmann::json to_json() const;
};

struct TrainedReward {
  RewardModel model;
  TrainingReport report;
};

// Embeddings of every document and summary of a dataset, computed once. The
// MLP sees them as frozen inputs.
struct EncodedArticle {
  Vector document;
  std::vector<Vector> summaries;
};

class EncodedCorpus {
 public:
  EncodedCorpus(const corpus::Dataset& dataset, const embeddings::TextEncoder& encoder);

  const EncodedArticle& article(const std::string& article_id) const;
  std::size_t dim() const { return dim_; }
  const embeddings::EncoderSpec& encoder_spec() const { return spec_; }

 private:
  std::map<std::string, EncodedArticle> articles_;
  std::size_t dim_ = 0;
  embeddings::EncoderSpec spec_;
};

// Minibatch Adam on the chosen loss: MSE over training summaries, or the
// pairwise cross-entropy over preference pairs drawn uniformly. Validation
// Spearman is measured after every epoch and the best epoch's parameters are
// kept. Deterministic for a given seed.
TrainedReward train_reward_model(const corpus::Dataset& dataset, const corpus::FoldSplit& split,
                                 const EncodedCorpus& encoded, const TrainConfig& cfg);
TrainedReward train_reward_model(const corpus::Dataset& dataset, const corpus::FoldSplit& split,
                                 const embeddings::TextEncoder& encoder, const TrainConfig& cfg);

// Encodes both texts and runs the MLP. Ids only matter for precomputed
// embeddings. Throws DataError when the encoder differs from the one the
// model was trained with.
double score(const RewardModel& model, const embeddings::TextEncoder& encoder,
             std::string_view article_text, std::string_view summary_text,
             std::string_view article_id = {}, std::string_view summary_id = {});

void check_encoder(const embeddings::EncoderSpec& expected, const embeddings::EncoderSpec& actual);

nlohmann::json to_json(const RewardModel& model);
RewardModel reward_model_from_json(const nlohmann::json& j);
void save_model(const std::filesystem::path& path, const RewardModel& model);
RewardModel load_model(const std::filesystem::path& path);

inline constexpr int kModelFormatVersion = 1;

}  // namespace sumreward::reward
