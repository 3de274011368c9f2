#pragma once

#include "sumreward/corpus.hpp"
#include "sumreward/embeddings.hpp"
#include "sumreward/eval.hpp"
#include "sumreward/reward_model.hpp"
#include "sumreward/simred.hpp"
#include "sumreward/text.hpp"

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace sumreward::scorers {

// rouge1, rouge2, rougeL, rougeSU4, bleu1 .. bleu5
const std::vector<std::string>& reference_metric_names();
bool is_reference_metric(std::string_view name);
// Throws std::invalid_argument for an unknown name.
double reference_metric(std::string_view name, const text::TokenizedText& candidate,
                        const text::TokenizedText& reference);

// The dataset with each article's reference summary taken out. Reference
// summaries are the entries whose system id equals `reference_system`.
struct ReferenceSplit {
  corpus::Dataset dataset;
  std::map<std::string, std::string> reference_text;
  std::map<std::string, std::size_t> reference_index;               // position in the input
  std::map<std::string, std::vector<std::size_t>> original_index;  // evaluated -> input position
};

// Throws DataError when an article has no reference or more than one, or
// nothing else to evaluate.
ReferenceSplit split_references(const corpus::Dataset& dataset, const std::string& reference_system);

// Scores a summary against its article's reference with a named metric.
eval::SummaryScorer reference_metric_scorer(std::string name, const ReferenceSplit& refs);

// Cosine between the summary's and the reference's embeddings. Ids follow the
// input dataset positions, so precomputed embeddings keep their keys.
eval::SummaryScorer cosine_scorer(const embeddings::TextEncoder& encoder, const ReferenceSplit& refs);

eval::SummaryScorer learned_scorer(const reward::RewardModel& model,
                                   const embeddings::TextEncoder& encoder);
eval::SummaryScorer simred_scorer(const reward::SimRedModel& model,
                                  const embeddings::TextEncoder& encoder);

}  // namespace sumreward::scorers
