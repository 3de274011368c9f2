#include "sumreward/scorers.hpp"

#include "sumreward/metrics.hpp"

#include <algorithm>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace sumreward::scorers {

const std::vector<std::string>& reference_metric_names() {
  static const std::vector<std::string> names{"rouge1", "rouge2", "rougeL", "rougeSU4", "bleu1",
                                              "bleu2",  "bleu3",  "bleu4",  "bleu5"};
  return names;
}

bool is_reference_metric(std::string_view name) {
  const auto& names = reference_metric_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

double reference_metric(std::string_view name, const text::TokenizedText& candidate,
                        const text::TokenizedText& reference) {
  using metrics::RougeVariant;
  if (name == "rouge1") return metrics::rouge(candidate, reference, RougeVariant::rouge_n(1)).f1;
  if (name == "rouge2") return metrics::rouge(candidate, reference, RougeVariant::rouge_n(2)).f1;
  if (name == "rougeL") return metrics::rouge(candidate, reference, RougeVariant::rouge_l()).f1;
  if (name == "rougeSU4") return metrics::rouge(candidate, reference, RougeVariant::rouge_su4()).f1;
  if (name.size() == 5 && name.substr(0, 4) == "bleu" && name[4] >= '1' && name[4] <= '5') {
    return metrics::bleu(candidate.flat_tokens, reference.flat_tokens,
                         static_cast<std::size_t>(name[4] - '0'));
  }
  throw std::invalid_argument("unknown metric '" + std::string(name) + "'");
}

ReferenceSplit split_references(const corpus::Dataset& dataset, const std::string& reference_system) {
  ReferenceSplit out;
  for (const auto& article : dataset.articles) {
    corpus::RatedArticle kept{article.article_id, article.article_text, {}};
    std::vector<std::size_t> positions;
    bool found = false;
    for (std::size_t i = 0; i < article.summaries.size(); ++i) {
      const auto& s = article.summaries[i];
      if (s.system_id != reference_system) {
        kept.summaries.push_back(s);
        positions.push_back(i);
        continue;
      }
      if (found) {
        throw DataError("article '" + article.article_id + "' has more than one '" +
                        reference_system + "' summary");
      }
      found = true;
      out.reference_text[article.article_id] = s.text;
      out.reference_index[article.article_id] = i;
    }
    if (!found) {
      throw DataError("article '" + article.article_id + "' has no reference summary (system '" +
                      reference_system + "')");
    }
    if (kept.summaries.empty()) {
      throw DataError("article '" + article.article_id + "' has only its reference summary");
    }
    out.original_index[article.article_id] = std::move(positions);
    out.dataset.articles.push_back(std::move(kept));
  }
  return out;
}

eval::SummaryScorer reference_metric_scorer(std::string name, const ReferenceSplit& refs) {
  if (!is_reference_metric(name)) throw std::invalid_argument("unknown metric '" + name + "'");
  const auto opts = text::PreprocessOptions::for_metrics();
  auto tokenized = std::make_shared<std::map<std::string, text::TokenizedText>>();
  for (const auto& [id, ref] : refs.reference_text) (*tokenized)[id] = text::tokenize_text(ref, opts);
  return [name = std::move(name), tokenized, opts](const corpus::RatedArticle& a, std::size_t i) {
    const auto cand = text::tokenize_text(a.summaries.at(i).text, opts);
    return reference_metric(name, cand, tokenized->at(a.article_id));
  };
}

eval::SummaryScorer cosine_scorer(const embeddings::TextEncoder& encoder, const ReferenceSplit& refs) {
  auto cache = std::make_shared<std::map<std::string, Vector>>();
  for (const auto& [id, ref] : refs.reference_text) {
    (*cache)[id] = encoder.encode(embeddings::summary_id(id, refs.reference_index.at(id)), ref);
  }
  return [&encoder, &refs, cache](const corpus::RatedArticle& a, std::size_t i) {
    const std::size_t original = refs.original_index.at(a.article_id).at(i);
    const Vector s = encoder.encode(embeddings::summary_id(a.article_id, original), a.summaries.at(i).text);
    return metrics::cosine_similarity(s, cache->at(a.article_id));
  };
}

eval::SummaryScorer learned_scorer(const reward::RewardModel& model,
                                   const embeddings::TextEncoder& encoder) {
  reward::check_encoder(model.encoder_spec, encoder.spec());
  // Document embeddings are shared by all summaries of an article.
  auto docs = std::make_shared<std::map<std::string, Vector>>();
  auto lock = std::make_shared<std::mutex>();
  return [&model, &encoder, docs, lock](const corpus::RatedArticle& a, std::size_t i) {
    Vector doc;
    {
      std::lock_guard<std::mutex> guard(*lock);
      const auto it = docs->find(a.article_id);
      if (it != docs->end()) doc = it->second;
    }
    if (doc.size() == 0) {
      doc = encoder.encode(embeddings::document_id(a.article_id), a.article_text);
      std::lock_guard<std::mutex> guard(*lock);
      docs->emplace(a.article_id, doc);
    }
    const Vector s = encoder.encode(embeddings::summary_id(a.article_id, i), a.summaries.at(i).text);
    return model.forward(doc, s);
  };
}

eval::SummaryScorer simred_scorer(const reward::SimRedModel& model,
                                  const embeddings::TextEncoder& encoder) {
  reward::check_encoder(model.encoder_spec, encoder.spec());
  return [&model, &encoder](const corpus::RatedArticle& a, std::size_t i) {
    return reward::score(model, encoder, a.article_text, a.summaries.at(i).text);
  };
}

}  // namespace sumreward::scorers
