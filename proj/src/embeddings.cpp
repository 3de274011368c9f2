#include "sumreward/embeddings.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace sumreward::embeddings {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool parse_double(std::string_view s, double& out) {
  // std::from_chars for double is available in libstdc++ 11.
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::string format_p(double p) {
  if (p == kInf) return "inf";
  if (p == -kInf) return "-inf";
  std::ostringstream out;
  out << std::setprecision(17) << p;
  return out.str();
}

}  // namespace

EmbeddingTable::EmbeddingTable(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw std::invalid_argument("EmbeddingTable: dim must be >= 1");
}

const Vector* EmbeddingTable::find(std::string_view word) const {
  auto it = vectors_.find(std::string(word));
  return it == vectors_.end() ? nullptr : &it->second;
}

bool EmbeddingTable::insert(std::string word, Vector vector) {
  if (static_cast<std::size_t>(vector.size()) != dim_) {
    throw DataError("EmbeddingTable: vector for '" + word + "' has dimension " +
                    std::to_string(vector.size()) + ", expected " + std::to_string(dim_));
  }
  return vectors_.emplace(std::move(word), std::move(vector)).second;
}

std::vector<double> PMeansConfig::default_p_values() { return {-kInf, kInf, 1.0, 2.0}; }

PMeansConfig PMeansConfig::parse(std::string_view list) {
  PMeansConfig cfg;
  cfg.p_values.clear();
  std::size_t start = 0;
  while (start <= list.size()) {
    std::size_t end = list.find(',', start);
    if (end == std::string_view::npos) end = list.size();
    std::string item(list.substr(start, end - start));
    item.erase(std::remove_if(item.begin(), item.end(), ::isspace), item.end());
    const std::string lower = text::to_lower(item);
    double p = 0.0;
    if (lower == "inf" || lower == "+inf") {
      p = kInf;
    } else if (lower == "-inf") {
      p = -kInf;
    } else if (!parse_double(item, p)) {
      throw std::invalid_argument("invalid p value '" + item + "'");
    }
    cfg.p_values.push_back(p);
    start = end + 1;
  }
  cfg.validate();
  return cfg;
}

std::string PMeansConfig::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < p_values.size(); ++i) {
    if (i > 0) out += ',';
    out += format_p(p_values[i]);
  }
  return out;
}

void PMeansConfig::validate() const {
  if (p_values.empty()) throw std::invalid_argument("PMeansConfig: p_values is empty");
  for (std::size_t i = 0; i < p_values.size(); ++i) {
    if (std::isnan(p_values[i])) throw std::invalid_argument("PMeansConfig: NaN p value");
    for (std::size_t j = 0; j < i; ++j) {
      if (p_values[i] == p_values[j]) {
        throw std::invalid_argument("PMeansConfig: duplicate p value " + format_p(p_values[i]));
      }
    }
  }
}

EmbeddingTable load_word_vectors(const std::filesystem::path& path,
                                 std::optional<std::size_t> vocab_limit) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open word-vector file: " + path.string());
  std::optional<EmbeddingTable> table;
  std::string line;
  std::size_t line_no = 0;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (vocab_limit && table && table->size() >= *vocab_limit) break;
    std::istringstream fields(line);
    std::string word;
    if (!(fields >> word)) continue;
    values.clear();
    std::string field;
    while (fields >> field) {
      double v = 0.0;
      if (!parse_double(field, v) || !std::isfinite(v)) {
        throw DataError("word vectors line " + std::to_string(line_no) +
                        ": unparsable value '" + field + "'");
      }
      values.push_back(v);
    }
    if (values.empty()) {
      throw DataError("word vectors line " + std::to_string(line_no) + ": no vector values");
    }
    if (!table) table.emplace(values.size());
    if (values.size() != table->dim()) {
      throw DataError("word vectors line " + std::to_string(line_no) + ": dimension mismatch (" +
                      std::to_string(values.size()) + " values, expected " +
                      std::to_string(table->dim()) + ")");
    }
    table->insert(std::move(word), Eigen::Map<const Vector>(values.data(),
                                                            static_cast<Eigen::Index>(values.size())));
  }
  if (!table) throw DataError("word-vector file is empty: " + path.string());
  return std::move(*table);
}

Vector power_mean(std::span<const Vector> vectors, double p) {
  if (vectors.empty()) throw std::invalid_argument("power_mean: empty vector list");
  const Eigen::Index dim = vectors.front().size();
  for (const auto& v : vectors) {
    if (v.size() != dim) throw std::invalid_argument("power_mean: vectors of mixed lengths");
  }
  if (std::isnan(p)) throw std::invalid_argument("power_mean: p is NaN");
  const auto count = static_cast<double>(vectors.size());

  if (p == kInf || p == -kInf) {
    Vector out = vectors.front();
    for (const auto& v : vectors.subspan(1)) {
      if (p > 0) {
        out = out.cwiseMax(v);
      } else {
        out = out.cwiseMin(v);
      }
    }
    return out;
  }
  if (p == 1.0) {
    Vector sum = Vector::Zero(dim);
    for (const auto& v : vectors) sum += v;
    return sum / count;
  }
  if (p == 0.0) {
    Vector log_sum = Vector::Zero(dim);
    for (const auto& v : vectors) log_sum += v.cwiseAbs().array().log().matrix();
    return (log_sum / count).array().exp().matrix();
  }
  Vector acc = Vector::Zero(dim);
  for (const auto& v : vectors) acc += v.cwiseAbs().array().pow(p).matrix();
  Vector out = (acc / count).array().pow(1.0 / p).matrix();
  // Negative p with a zero magnitude: the limit of the mean is 0.
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (!std::isfinite(out[i])) out[i] = 0.0;
  }
  return out;
}

TextEmbedding encode_sentence(std::span<const text::Token> tokens, const EmbeddingTable& table,
                              const PMeansConfig& cfg, EncodeDiagnostics* diag) {
  const auto dim = static_cast<Eigen::Index>(table.dim());
  const auto np = static_cast<Eigen::Index>(cfg.p_values.size());
  std::vector<Vector> found;
  found.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (const Vector* v = table.find(t)) found.push_back(*v);
  }
  TextEmbedding out{Vector::Zero(dim * np), EmbeddingSource::pmeans};
  if (found.empty()) {
    if (diag) ++diag->all_oov_sentences;
    return out;
  }
  for (Eigen::Index i = 0; i < np; ++i) {
    out.vector.segment(i * dim, dim) = power_mean(found, cfg.p_values[static_cast<std::size_t>(i)]);
  }
  return out;
}

TextEmbedding encode_text(std::span<const text::Tokens> sentences, const EmbeddingTable& table,
                          const PMeansConfig& cfg, EncodeDiagnostics* diag) {
  if (sentences.empty()) throw std::invalid_argument("encode_text: no sentences");
  TextEmbedding out = encode_sentence(sentences.front(), table, cfg, diag);
  for (const auto& s : sentences.subspan(1)) {
    out.vector += encode_sentence(s, table, cfg, diag).vector;
  }
  out.vector /= static_cast<double>(sentences.size());
  return out;
}

std::map<std::string, TextEmbedding> load_precomputed_embeddings(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embedding file: " + path.string());
  std::map<std::string, TextEmbedding> out;
  std::optional<std::size_t> dim;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "embeddings line " + std::to_string(line_no) + ": ";
    std::string id;
    std::vector<double> values;
    try {
      const json j = json::parse(line);
      id = j.at("id").get<std::string>();
      const json& vec = j.at("vector");
      if (!vec.is_array()) throw DataError(where + "'vector' is not an array");
      for (const auto& x : vec) {
        if (!x.is_number()) throw DataError(where + "non-finite or non-numeric value for id '" + id + "'");
        values.push_back(x.get<double>());
      }
    } catch (const json::exception& e) {
      throw DataError(where + e.what());
    }
    for (double v : values) {
      if (!std::isfinite(v)) throw DataError(where + "non-finite value for id '" + id + "'");
    }
    if (values.empty()) throw DataError(where + "empty vector for id '" + id + "'");
    if (!dim) dim = values.size();
    if (values.size() != *dim) {
      throw DataError(where + "dimension mismatch for id '" + id + "' (" +
                      std::to_string(values.size()) + " vs " + std::to_string(*dim) + ")");
    }
    TextEmbedding emb{Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size())),
                      EmbeddingSource::external};
    if (!out.emplace(id, std::move(emb)).second) {
      throw DataError(where + "duplicate id '" + id + "'");
    }
  }
  return out;
}

std::string document_id(std::string_view article_id) { return std::string(article_id); }

std::string summary_id(std::string_view article_id, std::size_t summary_index) {
  return std::string(article_id) + "#" + std::to_string(summary_index);
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file for hashing: " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

json to_json(const EncoderSpec& spec) {
  json p = json::array();
  for (double v : spec.p_values) p.push_back(format_p(v));
  return {{"kind", spec.kind}, {"p_values", p}, {"resource_sha256", spec.resource_sha256},
          {"dim", spec.dim}};
}

EncoderSpec encoder_spec_from_json(const json& j) {
  EncoderSpec spec;
  spec.kind = j.at("kind").get<std::string>();
  if (spec.kind != "pmeans" && spec.kind != "external") {
    throw DataError("unknown encoder kind '" + spec.kind + "'");
  }
  for (const auto& p : j.at("p_values")) {
    spec.p_values.push_back(PMeansConfig::parse(p.get<std::string>()).p_values.front());
  }
  spec.resource_sha256 = j.at("resource_sha256").get<std::string>();
  spec.dim = j.at("dim").get<std::size_t>();
  return spec;
}

PMeansEncoder::PMeansEncoder(EmbeddingTable table, PMeansConfig cfg, std::string vectors_sha256)
    : table_(std::move(table)), cfg_(std::move(cfg)),
      diag_(std::make_unique<EncodeDiagnostics>()) {
  cfg_.validate();
  spec_ = {"pmeans", cfg_.p_values, std::move(vectors_sha256), table_.dim() * cfg_.p_values.size()};
}

PMeansEncoder PMeansEncoder::from_file(const std::filesystem::path& vectors, PMeansConfig cfg,
                                       std::optional<std::size_t> vocab_limit) {
  return PMeansEncoder(load_word_vectors(vectors, vocab_limit), std::move(cfg),
                       sha256_file(vectors));
}

Vector PMeansEncoder::encode_sentence_tokens(std::span<const text::Token> tokens) const {
  return encode_sentence(tokens, table_, cfg_, diag_.get()).vector;
}

Vector PMeansEncoder::encode_tokens(std::span<const text::Tokens> sentences) const {
  if (sentences.empty()) {
    ++diag_->all_oov_sentences;
    return Vector::Zero(static_cast<Eigen::Index>(spec_.dim));
  }
  return encode_text(sentences, table_, cfg_, diag_.get()).vector;
}

Vector PMeansEncoder::encode(std::string_view /*id*/, std::string_view text) const {
  const auto tokenized = text::tokenize_text(text, text::PreprocessOptions::for_encoders());
  return encode_tokens(tokenized.sentences);
}

std::vector<Vector> PMeansEncoder::encode_sentences(std::string_view text) const {
  const auto tokenized = text::tokenize_text(text, text::PreprocessOptions::for_encoders());
  std::vector<Vector> out;
  out.reserve(tokenized.sentences.size());
  for (const auto& s : tokenized.sentences) out.push_back(encode_sentence_tokens(s));
  return out;
}

ExternalEncoder::ExternalEncoder(std::map<std::string, TextEmbedding> vectors,
                                 std::string file_sha256)
    : vectors_(vectors.begin(), vectors.end()) {
  const std::size_t dim =
      vectors_.empty() ? 0 : static_cast<std::size_t>(vectors_.begin()->second.vector.size());
  spec_ = {"external", {}, std::move(file_sha256), dim};
}

ExternalEncoder ExternalEncoder::from_file(const std::filesystem::path& path) {
  return ExternalEncoder(load_precomputed_embeddings(path), sha256_file(path));
}

Vector ExternalEncoder::encode(std::string_view id, std::string_view /*text*/) const {
  auto it = vectors_.find(id);
  if (it == vectors_.end()) {
    throw DataError("no precomputed embedding for id '" + std::string(id) + "'");
  }
  return it->second.vector;
}

std::vector<Vector> ExternalEncoder::encode_sentences(std::string_view /*text*/) const {
  throw DataError("precomputed embeddings are per text; sentence-level encoding is unavailable");
}

}  // namespace sumreward::embeddings
