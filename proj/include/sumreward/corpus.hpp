#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace sumreward::corpus {

struct RatedSummary {
  std::string system_id;
  std::string text;
  std::vector<double> ratings;  // per rater, each in [-1, 1]
  double avg_rating = 0.0;
};

struct RatedArticle {
  std::string article_id;
  std::string article_text;
  std::vector<RatedSummary> summaries;
};

struct Dataset {
  std::vector<RatedArticle> articles;

  std::size_t summary_count() const;
  // Throws std::out_of_range for an unknown id.
  const RatedArticle& article(const std::string& article_id) const;
  std::vector<std::string> article_ids() const;
};

struct FoldSplit {
  int fold_index = 0;
  std::vector<std::string> train_ids;
  std::vector<std::string> val_ids;
  std::vector<std::string> test_ids;
};

// Summary i of the article is rated strictly higher than summary j.
struct PreferencePair {
  std::string article_id;
  std::size_t better_index = 0;
  std::size_t worse_index = 0;
};

// Reads the JSON-lines dataset format. Blank lines are ignored. Every error is
// a DataError naming the 1-based line.
Dataset load_dataset(const std::filesystem::path& path);
Dataset parse_dataset(std::istream& in);
void write_dataset(std::ostream& out, const Dataset& dataset);
void save_dataset(const std::filesystem::path& path, const Dataset& dataset);

// Validates every invariant of an in-memory dataset (ratings range, averages,
// unique ids). Throws DataError.
void validate(const Dataset& dataset);

// Shuffles the article ids once, then for fold i takes the i-th contiguous
// chunk as test (sizes floor(n/k), the first n mod k chunks one larger). The
// remaining ids, read cyclically from the end of the test chunk, give
// floor(remainder/5) validation ids followed by the training ids.
std::vector<FoldSplit> split_folds(const Dataset& dataset, int k, std::uint64_t seed);

// One pair per unordered summary pair with unequal average ratings, oriented
// better-first. Ties carry no preference and are omitted.
std::vector<PreferencePair> enumerate_preference_pairs(const RatedArticle& article);

void write_folds(std::ostream& out, const std::vector<FoldSplit>& folds);
std::vector<FoldSplit> load_folds(const std::filesystem::path& path);

}  // namespace sumreward::corpus
