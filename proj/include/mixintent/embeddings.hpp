#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "mixintent/dataset.hpp"
#include "mixintent/numerics.hpp"

namespace mixintent {

// Vocabulary-aligned token vectors: row i of vectors() embeds tokens()[i].
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::vector<std::string> tokens, Matrix vectors);

  std::size_t size() const noexcept { return tokens_.size(); }
  std::size_t dim() const noexcept { return vectors_.cols(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  const Matrix& vectors() const noexcept { return vectors_; }
  std::span<const double> row(std::size_t i) const { return vectors_.row(i); }
  std::optional<std::size_t> find(std::string_view token) const;

  bool operator==(const EmbeddingTable& other) const {
    return tokens_ == other.tokens_ && vectors_ == other.vectors_;
  }

 private:
  std::vector<std::string> tokens_;
  Matrix vectors_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Fixed-dimension vectors keyed by normalized sentence text. Unknown
// sentences look up as the zero vector and bump a miss counter.
class SentenceVectorTable {
 public:
  SentenceVectorTable() = default;
  SentenceVectorTable(std::vector<std::string> keys, Matrix vectors);
  SentenceVectorTable(const SentenceVectorTable& other);
  SentenceVectorTable& operator=(const SentenceVectorTable& other);

  std::size_t size() const noexcept { return keys_.size(); }
  std::size_t dim() const noexcept { return vectors_.cols(); }
  const std::vector<std::string>& keys() const noexcept { return keys_; }
  const Matrix& vectors() const noexcept { return vectors_; }

  DenseVector lookup(std::string_view text) const;
  std::size_t misses() const noexcept { return misses_.load(); }

 private:
  std::vector<std::string> keys_;
  Matrix vectors_;
  std::unordered_map<std::string, std::size_t> index_;
  mutable std::atomic<std::size_t> misses_{0};
};

// Word file: header `V D`, then V lines `token v1 ... vD`.
void save_word_embeddings(const EmbeddingTable& table, const std::filesystem::path& path);
EmbeddingTable load_word_embeddings(const std::filesystem::path& path);
// Sentence file: header `V D`, then V lines `normalized-text<TAB>v1 ... vD`.
void save_sentence_vectors(const SentenceVectorTable& table, const std::filesystem::path& path);
SentenceVectorTable load_sentence_vectors(const std::filesystem::path& path);

enum class EmbeddingLevel { Word, Sentence };
std::variant<EmbeddingTable, SentenceVectorTable> load_external_embeddings(const std::filesystem::path& path,
                                                                           EmbeddingLevel level);

struct SgnsConfig {
  std::size_t dim = 100;
  std::size_t window = 5;
  std::size_t negatives = 5;
  std::size_t epochs = 15;
  double learning_rate = 0.025;  // decays linearly to 1e-4 of itself
  std::uint64_t seed = 1;
};

struct SgnsResult {
  EmbeddingTable table;              // center (input) vectors
  std::vector<double> epoch_losses;  // mean negative log-likelihood per pair
};

// Skip-gram with negative sampling over the dataset's token sequences.
// Noise distribution is unigram^0.75; no subsampling. Throws ArgumentError on
// an empty corpus.
SgnsResult sgns_train(const LabeledDataset& ds, const SgnsConfig& config);
SgnsResult sgns_train(const std::vector<std::vector<std::string>>& sentences, const SgnsConfig& config);

}  // namespace mixintent
