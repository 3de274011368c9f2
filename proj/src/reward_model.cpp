#include "sumreward/reward_model.hpp"

#include "sumreward/eval.hpp"
#include "sumreward/rng.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace sumreward::reward {

using nlohmann::json;

namespace {

Vector concat(const Vector& a, const Vector& b) {
  Vector out(a.size() + b.size());
  out << a, b;
  return out;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Vector vector_from_json(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Matrix matrix_from_json(const json& j, Eigen::Index cols_hint = -1) {
  if (!j.is_array()) throw DataError("matrix field is not an array");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows > 0 ? static_cast<Eigen::Index>(j[0].size()) : std::max<Eigen::Index>(cols_hint, 0);
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (static_cast<Eigen::Index>(row.size()) != cols) throw DataError("ragged matrix rows");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

struct ValidationSet {
  std::vector<Vector> inputs;
  std::vector<double> ratings;
};

std::optional<double> validation_spearman(const MLPParams& params, const ValidationSet& val) {
  if (val.inputs.size() < 2) return std::nullopt;
  std::vector<double> predictions;
  predictions.reserve(val.inputs.size());
  for (const auto& x : val.inputs) predictions.push_back(mlp_forward(x, params));
  try {
    return eval::spearman(predictions, val.ratings);
  } catch (const UndefinedStatistic&) {
    return std::nullopt;
  }
}

}  // namespace

LossKind parse_loss(std::string_view name) {
  if (name == "mse" || name == "regression") return LossKind::mse;
  if (name == "preference" || name == "pref" || name == "ce") return LossKind::preference;
  throw std::invalid_argument("unknown loss '" + std::string(name) + "' (expected mse|preference)");
}

std::string to_string(LossKind loss) { return loss == LossKind::mse ? "mse" : "preference"; }

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
  if (epochs <= 0) throw std::invalid_argument("epochs must be positive");
  if (batch_size <= 0) throw std::invalid_argument("batch_size must be positive");
  if (hidden_dim <= 0) throw std::invalid_argument("hidden_dim must be positive");
  if (early_stop_patience <= 0) throw std::invalid_argument("early_stop_patience must be positive");
}

json TrainConfig::to_json() const {
  return {{"loss", to_string(loss)},       {"learning_rate", learning_rate},
          {"epochs", epochs},              {"batch_size", batch_size},
          {"seed", seed},                  {"hidden_dim", hidden_dim},
          {"early_stop_patience", early_stop_patience}};
}

double RewardModel::forward(const Vector& doc_emb, const Vector& sum_emb) const {
  return mlp_forward(doc_emb, sum_emb, params);
}

json TrainingReport::to_json() const {
  json val = json::array();
  for (const auto& v : val_spearman) val.push_back(v ? json(*v) : json(nullptr));
  return {{"train_loss", train_loss},   {"val_spearman", val},
          {"best_epoch", best_epoch},   {"epochs_run", epochs_run},
          {"early_stopped", early_stopped}, {"train_examples", train_examples}};
}

EncodedCorpus::EncodedCorpus(const corpus::Dataset& dataset,
                             const embeddings::TextEncoder& encoder)
    : dim_(encoder.dim()), spec_(encoder.spec()) {
  for (const auto& a : dataset.articles) {
    EncodedArticle enc;
    enc.document = encoder.encode(embeddings::document_id(a.article_id), a.article_text);
    for (std::size_t i = 0; i < a.summaries.size(); ++i) {
      enc.summaries.push_back(
          encoder.encode(embeddings::summary_id(a.article_id, i), a.summaries[i].text));
    }
    articles_.emplace(a.article_id, std::move(enc));
  }
}

const EncodedArticle& EncodedCorpus::article(const std::string& article_id) const {
  auto it = articles_.find(article_id);
  if (it == articles_.end()) throw DataError("article not encoded: " + article_id);
  return it->second;
}

TrainedReward train_reward_model(const corpus::Dataset& dataset, const corpus::FoldSplit& split,
                                 const embeddings::TextEncoder& encoder, const TrainConfig& cfg) {
  const EncodedCorpus encoded(dataset, encoder);
  return train_reward_model(dataset, split, encoded, cfg);
}

TrainedReward train_reward_model(const corpus::Dataset& dataset, const corpus::FoldSplit& split,
                                 const EncodedCorpus& encoded, const TrainConfig& cfg) {
  cfg.validate();
  if (split.train_ids.empty()) throw std::invalid_argument("train_reward_model: empty training split");

  std::vector<RegressionExample> regression;
  std::vector<PairExample> pairs;
  std::vector<Vector> train_inputs;
  for (const auto& id : split.train_ids) {
    const auto& article = dataset.article(id);
    const auto& enc = encoded.article(id);
    std::vector<Vector> inputs;
    for (std::size_t i = 0; i < article.summaries.size(); ++i) {
      inputs.push_back(concat(enc.document, enc.summaries[i]));
      regression.push_back({inputs.back(), article.summaries[i].avg_rating});
    }
    if (cfg.loss == LossKind::preference && article.summaries.size() >= 2) {
      for (const auto& p : corpus::enumerate_preference_pairs(article)) {
        pairs.push_back({inputs[p.better_index], inputs[p.worse_index]});
      }
    }
    train_inputs.insert(train_inputs.end(), inputs.begin(), inputs.end());
  }
  if (cfg.loss == LossKind::preference && pairs.empty()) {
    throw std::invalid_argument(
        "train_reward_model: no preference pairs (every training article has tied ratings)");
  }

  ValidationSet val;
  for (const auto& id : split.val_ids) {
    const auto& article = dataset.article(id);
    const auto& enc = encoded.article(id);
    for (std::size_t i = 0; i < article.summaries.size(); ++i) {
      val.inputs.push_back(concat(enc.document, enc.summaries[i]));
      val.ratings.push_back(article.summaries[i].avg_rating);
    }
  }

  Rng rng(cfg.seed);
  const std::size_t input_dim = 2 * encoded.dim();
  MLPParams params = MLPParams::initialize(input_dim, static_cast<std::size_t>(cfg.hidden_dim), rng);
  Adam adam(params.parameter_count(), {cfg.learning_rate});
  Vector flat = flatten(params);

  const std::size_t n_examples = cfg.loss == LossKind::mse ? regression.size() : pairs.size();
  std::vector<std::size_t> order(n_examples);
  std::iota(order.begin(), order.end(), 0);
  const auto batch_size = static_cast<std::size_t>(cfg.batch_size);

  TrainingReport report;
  report.train_examples = n_examples;
  std::optional<double> best_rho;
  MLPParams best_params = params;
  int since_best = 0;

  std::vector<RegressionExample> reg_batch;
  std::vector<PairExample> pair_batch;
  MLPParams grad;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n_examples; start += batch_size) {
      const std::size_t end = std::min(n_examples, start + batch_size);
      double loss = 0.0;
      if (cfg.loss == LossKind::mse) {
        reg_batch.clear();
        for (std::size_t i = start; i < end; ++i) reg_batch.push_back(regression[order[i]]);
        loss = mse_objective(params, reg_batch, &grad);
      } else {
        pair_batch.clear();
        for (std::size_t i = start; i < end; ++i) pair_batch.push_back(pairs[order[i]]);
        loss = ce_objective(params, pair_batch, &grad);
      }
      epoch_loss += loss * static_cast<double>(end - start);
      adam.step(flat, flatten(grad));
      unflatten(flat, params);
    }
    if (!params.all_finite()) throw std::runtime_error("train_reward_model: parameters diverged");
    report.train_loss.push_back(epoch_loss / static_cast<double>(n_examples));
    report.epochs_run = epoch + 1;

    const auto rho = validation_spearman(params, val);
    report.val_spearman.push_back(rho);
    if (rho && (!best_rho || *rho > *best_rho)) {
      best_rho = rho;
      best_params = params;
      report.best_epoch = epoch;
      since_best = 0;
    } else if (!val.inputs.empty()) {
      if (++since_best >= cfg.early_stop_patience) {
        report.early_stopped = true;
        break;
      }
    }
  }

  TrainedReward out;
  out.model.params = best_rho ? best_params : params;
  out.model.encoder_spec = encoded.encoder_spec();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& x : train_inputs) {
    const double y = mlp_forward(x, out.model.params);
    lo = std::min(lo, y);
    hi = std::max(hi, y);
  }
  out.model.normalization = ScoreRange{lo, hi};
  out.report = std::move(report);
  return out;
}

void check_encoder(const embeddings::EncoderSpec& expected, const embeddings::EncoderSpec& actual) {
  if (expected.kind != actual.kind) {
    throw DataError("encoder mismatch: model expects '" + expected.kind + "', got '" +
                    actual.kind + "'");
  }
  if (expected.dim != actual.dim) {
    throw DataError("encoder mismatch: model expects embedding dimension " +
                    std::to_string(expected.dim) + ", got " + std::to_string(actual.dim));
  }
  if (expected.p_values != actual.p_values) {
    throw DataError("encoder mismatch: p values differ from the trained model");
  }
  if (expected.resource_sha256 != actual.resource_sha256) {
    throw DataError("encoder mismatch: embedding resource file differs from the trained model");
  }
}

double score(const RewardModel& model, const embeddings::TextEncoder& encoder,
             std::string_view article_text, std::string_view summary_text,
             std::string_view article_id, std::string_view summary_id) {
  check_encoder(model.encoder_spec, encoder.spec());
  const Vector doc = encoder.encode(article_id, article_text);
  const Vector sum = encoder.encode(summary_id, summary_text);
  return model.forward(doc, sum);
}

json to_json(const RewardModel& model) {
  json j;
  j["version"] = kModelFormatVersion;
  j["model_type"] = "mlp";
  j["encoder_spec"] = embeddings::to_json(model.encoder_spec);
  j["hidden_dim"] = model.params.hidden_dim();
  j["W1"] = matrix_to_json(model.params.w1);
  j["b1"] = std::vector<double>(model.params.b1.data(), model.params.b1.data() + model.params.b1.size());
  j["w2"] = std::vector<double>(model.params.w2.data(), model.params.w2.data() + model.params.w2.size());
  j["b2"] = model.params.b2;
  j["normalization"] = model.normalization
                           ? json{{"min", model.normalization->min}, {"max", model.normalization->max}}
                           : json(nullptr);
  return j;
}

RewardModel reward_model_from_json(const json& j) {
  try {
    if (j.at("version").get<int>() != kModelFormatVersion) {
      throw DataError("unsupported model version " + j.at("version").dump());
    }
    if (j.value("model_type", std::string("mlp")) != "mlp") {
      throw DataError("model file does not hold an MLP reward");
    }
    RewardModel m;
    m.encoder_spec = embeddings::encoder_spec_from_json(j.at("encoder_spec"));
    m.params.w1 = matrix_from_json(j.at("W1"));
    m.params.b1 = vector_from_json(j.at("b1"));
    m.params.w2 = vector_from_json(j.at("w2"));
    m.params.b2 = j.at("b2").get<double>();
    const auto hidden = j.at("hidden_dim").get<std::size_t>();
    if (m.params.hidden_dim() != hidden || static_cast<std::size_t>(m.params.b1.size()) != hidden ||
        static_cast<std::size_t>(m.params.w2.size()) != hidden) {
      throw DataError("model file: hidden_dim inconsistent with parameter shapes");
    }
    if (m.params.input_dim() != 2 * m.encoder_spec.dim) {
      throw DataError("model file: W1 width does not match 2 x encoder dimension");
    }
    if (!m.params.all_finite()) throw DataError("model file: non-finite parameter");
    if (const auto& norm = j.at("normalization"); !norm.is_null()) {
      m.normalization = ScoreRange{norm.at("min").get<double>(), norm.at("max").get<double>()};
    }
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const RewardModel& model) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write model file: " + path.string());
  out << to_json(model).dump(1) << '\n';
}

RewardModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file: " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("model file " + path.string() + ": " + e.what());
  }
  return reward_model_from_json(j);
}

}  // namespace sumreward::reward
