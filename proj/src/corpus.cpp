#include "sumreward/corpus.hpp"

#include "sumreward/common.hpp"
#include "sumreward/rng.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace sumreward::corpus {

using nlohmann::json;

namespace {

constexpr double kAverageTolerance = 1e-9;

[[noreturn]] void fail_line(std::size_t line, const std::string& what) {
  throw DataError("line " + std::to_string(line) + ": " + what);
}

void check_rating(double value, std::size_t line, const std::string& where) {
  if (!std::isfinite(value) || value < -1.0 || value > 1.0) {
    std::ostringstream msg;
    msg << "rating out of range [-1, 1] (" << where << " = " << value << ")";
    fail_line(line, msg.str());
  }
}

const json& require(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) fail_line(line, std::string("missing field '") + key + "'");
  return *it;
}

RatedSummary parse_summary(const json& j, std::size_t line, std::size_t index) {
  if (!j.is_object()) fail_line(line, "summary " + std::to_string(index) + " is not an object");
  RatedSummary s;
  s.system_id = require(j, "system", line).get<std::string>();
  s.text = require(j, "text", line).get<std::string>();
  if (s.text.empty()) fail_line(line, "summary " + std::to_string(index) + " has empty text");
  if (auto it = j.find("ratings"); it != j.end()) {
    s.ratings = it->get<std::vector<double>>();
  }
  const std::string where = "summary " + std::to_string(index);
  for (double r : s.ratings) check_rating(r, line, where + " ratings");

  const auto avg_it = j.find("avg_rating");
  const bool has_avg = avg_it != j.end() && !avg_it->is_null();
  if (s.ratings.empty() && !has_avg) {
    fail_line(line, where + " has neither ratings nor avg_rating");
  }
  if (!s.ratings.empty()) {
    const double mean = std::accumulate(s.ratings.begin(), s.ratings.end(), 0.0) /
                        static_cast<double>(s.ratings.size());
    if (has_avg) {
      s.avg_rating = avg_it->get<double>();
      check_rating(s.avg_rating, line, where + " avg_rating");
      if (std::abs(s.avg_rating - mean) > kAverageTolerance) {
        fail_line(line, where + " avg_rating does not equal the mean of ratings");
      }
    } else {
      s.avg_rating = mean;
    }
  } else {
    s.avg_rating = avg_it->get<double>();
    check_rating(s.avg_rating, line, where + " avg_rating");
  }
  return s;
}

}  // namespace

std::size_t Dataset::summary_count() const {
  std::size_t n = 0;
  for (const auto& a : articles) n += a.summaries.size();
  return n;
}

const RatedArticle& Dataset::article(const std::string& article_id) const {
  for (const auto& a : articles) {
    if (a.article_id == article_id) return a;
  }
  throw std::out_of_range("unknown article id: " + article_id);
}

std::vector<std::string> Dataset::article_ids() const {
  std::vector<std::string> ids;
  ids.reserve(articles.size());
  for (const auto& a : articles) ids.push_back(a.article_id);
  return ids;
}

Dataset parse_dataset(std::istream& in) {
  Dataset dataset;
  std::unordered_set<std::string> seen;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (raw.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(raw);
    } catch (const json::parse_error& e) {
      fail_line(line, std::string("parse error: ") + e.what());
    }
    if (!j.is_object()) fail_line(line, "expected a JSON object");
    try {
      RatedArticle article;
      article.article_id = require(j, "article_id", line).get<std::string>();
      article.article_text = require(j, "article", line).get<std::string>();
      const json& summaries = require(j, "summaries", line);
      if (!summaries.is_array() || summaries.empty()) {
        fail_line(line, "empty summaries list");
      }
      for (std::size_t i = 0; i < summaries.size(); ++i) {
        article.summaries.push_back(parse_summary(summaries[i], line, i));
      }
      if (!seen.insert(article.article_id).second) {
        fail_line(line, "duplicate article_id '" + article.article_id + "'");
      }
      dataset.articles.push_back(std::move(article));
    } catch (const json::exception& e) {
      fail_line(line, std::string("schema error: ") + e.what());
    }
  }
  return dataset;
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file: " + path.string());
  return parse_dataset(in);
}

void validate(const Dataset& dataset) {
  std::ostringstream buf;
  write_dataset(buf, dataset);
  std::istringstream in(buf.str());
  parse_dataset(in);
}

void write_dataset(std::ostream& out, const Dataset& dataset) {
  for (const auto& a : dataset.articles) {
    json summaries = json::array();
    for (const auto& s : a.summaries) {
      summaries.push_back({{"system", s.system_id},
                           {"text", s.text},
                           {"ratings", s.ratings},
                           {"avg_rating", s.avg_rating}});
    }
    json j = {{"article_id", a.article_id}, {"article", a.article_text}, {"summaries", summaries}};
    out << j.dump() << '\n';
  }
}

void save_dataset(const std::filesystem::path& path, const Dataset& dataset) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write dataset file: " + path.string());
  write_dataset(out, dataset);
}

std::vector<FoldSplit> split_folds(const Dataset& dataset, int k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("split_folds: k must be >= 2");
  const std::size_t n = dataset.articles.size();
  const auto folds = static_cast<std::size_t>(k);
  if (n < folds) {
    throw std::invalid_argument("split_folds: " + std::to_string(n) +
                                " articles cannot form " + std::to_string(k) + " folds");
  }
  std::vector<std::string> ids = dataset.article_ids();
  Rng rng(seed);
  rng.shuffle(std::span<std::string>(ids));

  const std::size_t base = n / folds;
  const std::size_t extra = n % folds;
  std::vector<FoldSplit> out;
  std::size_t begin = 0;
  for (std::size_t f = 0; f < folds; ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    const std::size_t end = begin + size;
    FoldSplit split;
    split.fold_index = static_cast<int>(f);
    split.test_ids.assign(ids.begin() + static_cast<std::ptrdiff_t>(begin),
                          ids.begin() + static_cast<std::ptrdiff_t>(end));
    const std::size_t remainder = n - size;
    const std::size_t val_count = remainder / 5;
    for (std::size_t r = 0; r < remainder; ++r) {
      const std::string& id = ids[(end + r) % n];
      (r < val_count ? split.val_ids : split.train_ids).push_back(id);
    }
    out.push_back(std::move(split));
    begin = end;
  }
  return out;
}

std::vector<PreferencePair> enumerate_preference_pairs(const RatedArticle& article) {
  const std::size_t n = article.summaries.size();
  if (n < 2) {
    throw std::invalid_argument("enumerate_preference_pairs: article '" + article.article_id +
                                "' has fewer than 2 summaries");
  }
  std::vector<PreferencePair> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double ri = article.summaries[i].avg_rating;
      const double rj = article.summaries[j].avg_rating;
      if (ri > rj) {
        pairs.push_back({article.article_id, i, j});
      } else if (rj > ri) {
        pairs.push_back({article.article_id, j, i});
      }
    }
  }
  return pairs;
}

void write_folds(std::ostream& out, const std::vector<FoldSplit>& folds) {
  json arr = json::array();
  for (const auto& f : folds) {
    arr.push_back({{"fold", f.fold_index},
                   {"train", f.train_ids},
                   {"val", f.val_ids},
                   {"test", f.test_ids}});
  }
  out << arr.dump(2) << '\n';
}

std::vector<FoldSplit> load_folds(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open fold file: " + path.string());
  std::vector<FoldSplit> folds;
  try {
    const json arr = json::parse(in);
    if (!arr.is_array()) throw DataError("fold file must hold a JSON array");
    for (const auto& j : arr) {
      FoldSplit f;
      f.fold_index = j.at("fold").get<int>();
      f.train_ids = j.at("train").get<std::vector<std::string>>();
      f.val_ids = j.at("val").get<std::vector<std::string>>();
      f.test_ids = j.at("test").get<std::vector<std::string>>();
      folds.push_back(std::move(f));
    }
  } catch (const json::exception& e) {
    throw DataError("fold file " + path.string() + ": " + e.what());
  }
  return folds;
}

}  // namespace sumreward::corpus
