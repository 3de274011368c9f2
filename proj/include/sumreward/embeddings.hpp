#pragma once

#include "sumreward/common.hpp"
#include "sumreward/text.hpp"

#include <json.hpp>

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sumreward::embeddings {

class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dim);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }

  // Returns nullptr for out-of-vocabulary words.
  const Vector* find(std::string_view word) const;
  // Keeps the first vector inserted for a word. Returns false on duplicates.
  bool insert(std::string word, Vector vector);

 private:
  std::size_t dim_;
  std::unordered_map<std::string, Vector> vectors_;
};

// p values may include +/-infinity (elementwise max/min).
struct PMeansConfig {
  std::vector<double> p_values = default_p_values();

  static std::vector<double> default_p_values();
  // Parses "-inf,inf,1,2" style lists. Throws std::invalid_argument.
  static PMeansConfig parse(std::string_view list);
  std::string to_string() const;
  void validate() const;
};

enum class EmbeddingSource { pmeans, external };

struct TextEmbedding {
  Vector vector;
  EmbeddingSource source = EmbeddingSource::pmeans;
};

// Counts sentences that had no in-vocabulary token and were encoded as zeros.
struct EncodeDiagnostics {
  std::atomic<std::size_t> all_oov_sentences{0};
};

// Reads `word v1 ... vd` lines. The first line fixes the dimension.
EmbeddingTable load_word_vectors(const std::filesystem::path& path,
                                 std::optional<std::size_t> vocab_limit = std::nullopt);

// Elementwise power mean. p = 1 is the arithmetic mean, +inf the max and -inf
// the min. Any other p works on magnitudes: (mean |z|^p)^(1/p), so p = 2 is the
// root mean square and drops the sign. p = 0 is the geometric mean of the
// magnitudes.
Vector power_mean(std::span<const Vector> vectors, double p);

TextEmbedding encode_sentence(std::span<const text::Token> tokens, const EmbeddingTable& table,
                              const PMeansConfig& cfg, EncodeDiagnostics* diag = nullptr);

// Mean of the sentence embeddings.
TextEmbedding encode_text(std::span<const text::Tokens> sentences, const EmbeddingTable& table,
                          const PMeansConfig& cfg, EncodeDiagnostics* diag = nullptr);

// JSON lines {"id": str, "vector": [...]}.
std::map<std::string, TextEmbedding> load_precomputed_embeddings(
    const std::filesystem::path& path);

// Identifier for a text in precomputed-embedding files.
std::string document_id(std::string_view article_id);
std::string summary_id(std::string_view article_id, std::size_t summary_index);

std::string sha256_file(const std::filesystem::path& path);

// Describes how texts were turned into vectors so that a trained model can
// refuse an incompatible encoder.
struct EncoderSpec {
  std::string kind;  // "pmeans" or "external"
  std::vector<double> p_values;
  std::string resource_sha256;
  std::size_t dim = 0;

  bool operator==(const EncoderSpec&) const = default;
};

nlohmann::json to_json(const EncoderSpec& spec);
EncoderSpec encoder_spec_from_json(const nlohmann::json& j);

class TextEncoder {
 public:
  virtual ~TextEncoder() = default;

  virtual const EncoderSpec& spec() const = 0;
  std::size_t dim() const { return spec().dim; }

  // `id` follows the document_id / summary_id scheme; encoders that compute
  // from the text may ignore it.
  virtual Vector encode(std::string_view id, std::string_view text) const = 0;

  // Per-sentence embeddings. Only meaningful for encoders that work from text;
  // others throw DataError.
  virtual std::vector<Vector> encode_sentences(std::string_view text) const = 0;
};

class PMeansEncoder final : public TextEncoder {
 public:
  PMeansEncoder(EmbeddingTable table, PMeansConfig cfg, std::string vectors_sha256);
  static PMeansEncoder from_file(const std::filesystem::path& vectors, PMeansConfig cfg,
                                 std::optional<std::size_t> vocab_limit = std::nullopt);

  const EncoderSpec& spec() const override { return spec_; }
  Vector encode(std::string_view id, std::string_view text) const override;
  std::vector<Vector> encode_sentences(std::string_view text) const override;

  Vector encode_tokens(std::span<const text::Tokens> sentences) const;
  Vector encode_sentence_tokens(std::span<const text::Token> tokens) const;

  const EmbeddingTable& table() const { return table_; }
  const PMeansConfig& config() const { return cfg_; }
  std::size_t all_oov_sentences() const { return diag_->all_oov_sentences.load(); }

 private:
  EmbeddingTable table_;
  PMeansConfig cfg_;
  EncoderSpec spec_;
  std::unique_ptr<EncodeDiagnostics> diag_;
};

class ExternalEncoder final : public TextEncoder {
 public:
  ExternalEncoder(std::map<std::string, TextEmbedding> vectors, std::string file_sha256);
  static ExternalEncoder from_file(const std::filesystem::path& path);

  const EncoderSpec& spec() const override { return spec_; }
  // Throws DataError for an id absent from the file.
  Vector encode(std::string_view id, std::string_view text) const override;
  std::vector<Vector> encode_sentences(std::string_view text) const override;

 private:
  std::map<std::string, TextEmbedding, std::less<>> vectors_;
  EncoderSpec spec_;
};

}  // namespace sumreward::embeddings
