#include "sumreward/simred.hpp"

#include "sumreward/eval.hpp"
#include "sumreward/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace sumreward::reward {

using nlohmann::json;

namespace {

// Cosine of two columns plus its gradients with respect to each of them. A
// zero column gives cosine 0 and zero gradients.
struct CosineTerm {
  double value = 0.0;
  Vector d_a;
  Vector d_b;
};

CosineTerm cosine_with_grad(const Vector& a, const Vector& b, bool want_grad) {
  CosineTerm t;
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) {
    if (want_grad) {
      t.d_a = Vector::Zero(a.size());
      t.d_b = Vector::Zero(b.size());
    }
    return t;
  }
  // sqrt of the squared-norm product keeps cos(a, a) exactly 1.
  t.value = std::clamp(a.dot(b) / std::sqrt(a.squaredNorm() * b.squaredNorm()), -1.0, 1.0);
  if (want_grad) {
    t.d_a = b / (na * nb) - t.value * a / (na * na);
    t.d_b = a / (na * nb) - t.value * b / (nb * nb);
  }
  return t;
}

// Reward over already-projected sentence columns. Gradients, when requested,
// are with respect to those columns.
double simred_projected(const Matrix& summary, const Matrix& doc, double alpha, Matrix* d_summary,
                        Matrix* d_doc) {
  const Eigen::Index n = summary.cols();
  const Eigen::Index m = doc.cols();
  const bool want = d_summary != nullptr;
  if (want) {
    d_summary->setZero(summary.rows(), n);
    d_doc->setZero(doc.rows(), m);
  }
  const double sim_weight = alpha / static_cast<double>(n * m);
  double similarity = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const auto t = cosine_with_grad(summary.col(i), doc.col(j), want);
      similarity += t.value;
      if (want) {
        d_summary->col(i) += sim_weight * t.d_a;
        d_doc->col(j) += sim_weight * t.d_b;
      }
    }
  }
  double redundancy = 0.0;
  double red_weight = 0.0;
  if (n >= 2) {
    red_weight = (1.0 - alpha) / (static_cast<double>(n * (n - 1)) / 2.0);
    for (Eigen::Index k = 0; k < n; ++k) {
      for (Eigen::Index l = k + 1; l < n; ++l) {
        const auto t = cosine_with_grad(summary.col(k), summary.col(l), want);
        redundancy += t.value * t.value;
        if (want) {
          d_summary->col(k) -= red_weight * 2.0 * t.value * t.d_a;
          d_summary->col(l) -= red_weight * 2.0 * t.value * t.d_b;
        }
      }
    }
  }
  return sim_weight * similarity - red_weight * redundancy;
}

Matrix stack_columns(std::span<const Vector> vs) {
  Matrix m(vs.front().size(), static_cast<Eigen::Index>(vs.size()));
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (vs[i].size() != m.rows()) throw std::invalid_argument("simred: sentence embeddings of mixed lengths");
    m.col(static_cast<Eigen::Index>(i)) = vs[i];
  }
  return m;
}

const Matrix& effective_projection(const SimRedConfig& cfg, Eigen::Index dim, Matrix& scratch) {
  if (cfg.projection.size() == 0) {
    scratch = Matrix::Identity(dim, dim);
    return scratch;
  }
  if (cfg.projection.cols() != dim) {
    throw std::invalid_argument("simred: projection is " + std::to_string(cfg.projection.cols()) +
                                " wide, embeddings have dimension " + std::to_string(dim));
  }
  return cfg.projection;
}

struct SimRedExample {
  std::string article_id;
  Matrix sentences;  // unprojected summary sentences as columns
  double rating = 0.0;
};

}  // namespace

SimRedConfig SimRedConfig::identity(std::size_t dim, double alpha) {
  const auto d = static_cast<Eigen::Index>(dim);
  return {alpha, Matrix::Identity(d, d)};
}

void SimRedConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("simred: alpha must be in [0, 1]");
  if (projection.rows() != projection.cols()) {
    throw std::invalid_argument("simred: projection must be square");
  }
  if (!projection.allFinite()) throw std::invalid_argument("simred: non-finite projection");
}

double simred_reward(std::span<const Vector> summary_sents, std::span<const Vector> doc_sents,
                     const SimRedConfig& cfg) {
  return simred_reward(summary_sents, doc_sents, cfg, nullptr);
}

double simred_reward(std::span<const Vector> summary_sents, std::span<const Vector> doc_sents,
                     const SimRedConfig& cfg, Matrix* grad_projection) {
  if (summary_sents.empty()) throw std::invalid_argument("simred: summary has no sentences");
  if (doc_sents.empty()) throw std::invalid_argument("simred: document has no sentences");
  cfg.validate();
  const Matrix s = stack_columns(summary_sents);
  const Matrix d = stack_columns(doc_sents);
  if (s.rows() != d.rows()) throw std::invalid_argument("simred: summary/document dimension mismatch");
  Matrix scratch;
  const Matrix& p = effective_projection(cfg, s.rows(), scratch);
  const Matrix ps = p * s;
  const Matrix pd = p * d;
  if (!grad_projection) return simred_projected(ps, pd, cfg.alpha, nullptr, nullptr);
  Matrix g_s;
  Matrix g_d;
  const double r = simred_projected(ps, pd, cfg.alpha, &g_s, &g_d);
  *grad_projection = g_s * s.transpose() + g_d * d.transpose();
  return r;
}

TrainedSimRed train_simred(const corpus::Dataset& dataset, const corpus::FoldSplit& split,
                           const embeddings::TextEncoder& encoder, const TrainConfig& cfg,
                           double alpha) {
  cfg.validate();
  if (split.train_ids.empty()) throw std::invalid_argument("train_simred: empty training split");
  const auto dim = static_cast<Eigen::Index>(encoder.dim());

  std::map<std::string, Matrix> documents;
  auto encode_article = [&](const std::string& id, std::vector<SimRedExample>& out) {
    const auto& article = dataset.article(id);
    const auto doc_sents = encoder.encode_sentences(article.article_text);
    if (doc_sents.empty()) throw DataError("simred: article '" + id + "' has no sentences");
    documents.emplace(id, stack_columns(doc_sents));
    for (const auto& s : article.summaries) {
      auto sents = encoder.encode_sentences(s.text);
      if (sents.empty()) throw DataError("simred: a summary of '" + id + "' has no sentences");
      out.push_back({id, stack_columns(sents), s.avg_rating});
    }
  };
  std::vector<SimRedExample> train;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (const auto& id : split.train_ids) {
    const std::size_t first = train.size();
    encode_article(id, train);
    const auto& article = dataset.article(id);
    if (cfg.loss == LossKind::preference && article.summaries.size() >= 2) {
      for (const auto& p : corpus::enumerate_preference_pairs(article)) {
        pairs.emplace_back(first + p.better_index, first + p.worse_index);
      }
    }
  }
  if (cfg.loss == LossKind::preference && pairs.empty()) {
    throw std::invalid_argument("train_simred: no preference pairs");
  }
  std::vector<SimRedExample> val;
  for (const auto& id : split.val_ids) encode_article(id, val);

  SimRedConfig model_cfg = SimRedConfig::identity(static_cast<std::size_t>(dim), alpha);
  model_cfg.validate();
  Adam adam(static_cast<std::size_t>(dim * dim), {cfg.learning_rate});
  Rng rng(cfg.seed);

  auto reward_of = [&](const SimRedExample& ex, const Matrix& p, Matrix* grad) {
    const Matrix& d = documents.at(ex.article_id);
    const Matrix ps = p * ex.sentences;
    const Matrix pd = p * d;
    if (!grad) return simred_projected(ps, pd, alpha, nullptr, nullptr);
    Matrix g_s;
    Matrix g_d;
    const double r = simred_projected(ps, pd, alpha, &g_s, &g_d);
    grad->noalias() += g_s * ex.sentences.transpose() + g_d * d.transpose();
    return r;
  };
  auto val_rho = [&](const Matrix& p) -> std::optional<double> {
    if (val.size() < 2) return std::nullopt;
    std::vector<double> pred;
    std::vector<double> gold;
    for (const auto& ex : val) {
      pred.push_back(reward_of(ex, p, nullptr));
      gold.push_back(ex.rating);
    }
    try {
      return eval::spearman(pred, gold);
    } catch (const UndefinedStatistic&) {
      return std::nullopt;
    }
  };

  const std::size_t n_examples = cfg.loss == LossKind::mse ? train.size() : pairs.size();
  std::vector<std::size_t> order(n_examples);
  std::iota(order.begin(), order.end(), 0);
  const auto batch_size = static_cast<std::size_t>(cfg.batch_size);

  TrainingReport report;
  report.train_examples = n_examples;
  std::optional<double> best_rho;
  Matrix best = model_cfg.projection;
  int since_best = 0;
  Matrix& p = model_cfg.projection;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n_examples; start += batch_size) {
      const std::size_t end = std::min(n_examples, start + batch_size);
      const double scale = 1.0 / static_cast<double>(end - start);
      Matrix grad = Matrix::Zero(dim, dim);
      double loss = 0.0;
      for (std::size_t b = start; b < end; ++b) {
        if (cfg.loss == LossKind::mse) {
          const auto& ex = train[order[b]];
          Matrix g = Matrix::Zero(dim, dim);
          const double r = reward_of(ex, p, &g);
          loss += (r - ex.rating) * (r - ex.rating) * scale;
          grad += 2.0 * (r - ex.rating) * scale * g;
        } else {
          const auto [bi, wi] = pairs[order[b]];
          Matrix gb = Matrix::Zero(dim, dim);
          Matrix gw = Matrix::Zero(dim, dim);
          const double rb = reward_of(train[bi], p, &gb);
          const double rw = reward_of(train[wi], p, &gw);
          loss += preference_nll(rb, rw) * scale;
          const double miss = 1.0 - preference_probability(rb, rw);
          grad += miss * scale * (gw - gb);
        }
      }
      epoch_loss += loss * static_cast<double>(end - start);
      Vector flat = Eigen::Map<const Vector>(p.data(), p.size());
      adam.step(flat, Eigen::Map<const Vector>(grad.data(), grad.size()));
      Eigen::Map<Vector>(p.data(), p.size()) = flat;
    }
    if (!p.allFinite()) throw std::runtime_error("train_simred: projection diverged");
    report.train_loss.push_back(epoch_loss / static_cast<double>(n_examples));
    report.epochs_run = epoch + 1;
    const auto rho = val_rho(p);
    report.val_spearman.push_back(rho);
    if (rho && (!best_rho || *rho > *best_rho)) {
      best_rho = rho;
      best = p;
      report.best_epoch = epoch;
      since_best = 0;
    } else if (!val.empty() && ++since_best >= cfg.early_stop_patience) {
      report.early_stopped = true;
      break;
    }
  }
  if (best_rho) p = best;

  TrainedSimRed out;
  out.model.config = std::move(model_cfg);
  out.model.encoder_spec = encoder.spec();
  out.report = std::move(report);
  return out;
}

double score(const SimRedModel& model, const embeddings::TextEncoder& encoder,
             std::string_view article_text, std::string_view summary_text) {
  check_encoder(model.encoder_spec, encoder.spec());
  const auto doc = encoder.encode_sentences(article_text);
  const auto sum = encoder.encode_sentences(summary_text);
  if (doc.empty() || sum.empty()) throw DataError("simred: empty article or summary");
  return simred_reward(sum, doc, model.config);
}

json to_json(const SimRedModel& model) {
  json rows = json::array();
  const Matrix& p = model.config.projection;
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < p.cols(); ++c) row.push_back(p(r, c));
    rows.push_back(std::move(row));
  }
  return {{"version", kModelFormatVersion},
          {"model_type", "simred"},
          {"encoder_spec", embeddings::to_json(model.encoder_spec)},
          {"alpha", model.config.alpha},
          {"projection", rows}};
}

SimRedModel simred_model_from_json(const json& j) {
  try {
    if (j.at("model_type").get<std::string>() != "simred") {
      throw DataError("model file does not hold a SimRed reward");
    }
    SimRedModel m;
    m.encoder_spec = embeddings::encoder_spec_from_json(j.at("encoder_spec"));
    m.config.alpha = j.at("alpha").get<double>();
    const json& rows = j.at("projection");
    const auto n = static_cast<Eigen::Index>(rows.size());
    m.config.projection.resize(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
      const auto& row = rows[static_cast<std::size_t>(r)];
      if (static_cast<Eigen::Index>(row.size()) != n) throw DataError("projection is not square");
      for (Eigen::Index c = 0; c < n; ++c) {
        m.config.projection(r, c) = row[static_cast<std::size_t>(c)].get<double>();
      }
    }
    m.config.validate();
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("simred model file: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("simred model file: ") + e.what());
  }
}

}  // namespace sumreward::reward
