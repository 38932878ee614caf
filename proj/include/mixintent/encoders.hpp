#pragma once

// Utterance vector representations: bag-of-words counts, tf-idf, LSA topic
// projections of either, and (idf-weighted) averages of word embeddings.

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>

#include "mixintent/archive.hpp"
#include "mixintent/dataset.hpp"
#include "mixintent/embeddings.hpp"
#include "mixintent/numerics.hpp"
#include "mixintent/vocabulary.hpp"

namespace mixintent {

// Smoothed inverse document frequency, ln((1 + N) / (1 + df)) + 1. Tokens the
// table has never seen get the df = 0 weight.
class IdfTable {
 public:
  IdfTable() = default;
  IdfTable(std::unordered_map<std::string, double> weights, double default_weight);
  static IdfTable from_vocabulary(const Vocabulary& vocab);

  double weight(std::string_view token) const;
  double default_weight() const noexcept { return default_weight_; }
  std::size_t size() const noexcept { return weights_.size(); }

 private:
  std::unordered_map<std::string, double> weights_;
  double default_weight_ = 1.0;
};

IdfTable tfidf_fit(const LabeledDataset& ds);

SparseVector count_encode(const Vocabulary& vocab, const Utterance& u);
// Raw term count times idf, scaled to unit L2 norm (zero stays zero).
SparseVector tfidf_encode(const Vocabulary& vocab, const IdfTable& idf, const Utterance& u);

struct LsaProjection {
  Matrix projection;             // V x k_eff, equals V_k diag(S_k)^-1
  DenseVector singular_values;   // k_eff retained values
  std::size_t requested = 0;
  std::size_t dropped = 0;       // components with singular value < 1e-12

  std::size_t dim() const noexcept { return projection.cols(); }
};

// Truncated SVD of the (documents x terms) matrix; new documents fold in
// through V_k diag(S_k)^-1.
LsaProjection lsa_fit(const Matrix& doc_term, std::size_t k);
DenseVector lsa_encode(const LsaProjection& proj, const SparseVector& v);
DenseVector lsa_encode(const LsaProjection& proj, std::span<const double> v);

DenseVector avg_encode(const Utterance& u, const EmbeddingTable& table);
DenseVector idf_avg_encode(const Utterance& u, const EmbeddingTable& table, const IdfTable& idf);

using Feature = std::variant<DenseVector, SparseVector>;

DenseVector to_dense(const Feature& f);
std::size_t feature_dim(const Feature& f);

class Encoder {
 public:
  virtual ~Encoder() = default;

  // Must be given the training split only.
  virtual void fit(const LabeledDataset& train) = 0;
  virtual Feature encode(const Utterance& u) const = 0;
  virtual std::size_t dim() const = 0;
  virtual std::string kind() const = 0;
  virtual void save(ArchiveWriter& out) const = 0;
};

class CountEncoder final : public Encoder {
 public:
  explicit CountEncoder(std::size_t min_df = 1) : min_df_(min_df) {}
  void fit(const LabeledDataset& train) override;
  Feature encode(const Utterance& u) const override { return count_encode(vocab_, u); }
  std::size_t dim() const override { return vocab_.size(); }
  std::string kind() const override { return "count"; }
  void save(ArchiveWriter& out) const override;
  static std::unique_ptr<CountEncoder> load(ArchiveReader& in);

  const Vocabulary& vocabulary() const noexcept { return vocab_; }

 private:
  std::size_t min_df_;
  Vocabulary vocab_;
};

class TfidfEncoder final : public Encoder {
 public:
  explicit TfidfEncoder(std::size_t min_df = 1) : min_df_(min_df) {}
  void fit(const LabeledDataset& train) override;
  Feature encode(const Utterance& u) const override { return tfidf_encode(vocab_, idf_, u); }
  std::size_t dim() const override { return vocab_.size(); }
  std::string kind() const override { return "tfidf"; }
  void save(ArchiveWriter& out) const override;
  static std::unique_ptr<TfidfEncoder> load(ArchiveReader& in);

  const Vocabulary& vocabulary() const noexcept { return vocab_; }
  const IdfTable& idf() const noexcept { return idf_; }

 private:
  std::size_t min_df_;
  Vocabulary vocab_;
  IdfTable idf_;
};

// LSA on top of a Count or Tfidf encoder. The effective rank is
// min(k, min(n_docs, V) - 1), at least 1.
class LsaEncoder final : public Encoder {
 public:
  LsaEncoder(std::unique_ptr<Encoder> base, std::size_t k);
  void fit(const LabeledDataset& train) override;
  Feature encode(const Utterance& u) const override;
  std::size_t dim() const override { return projection_.dim(); }
  std::string kind() const override { return "lsa"; }
  void save(ArchiveWriter& out) const override;
  static std::unique_ptr<LsaEncoder> load(ArchiveReader& in);

  const LsaProjection& projection() const noexcept { return projection_; }

 private:
  std::unique_ptr<Encoder> base_;
  std::size_t k_;
  LsaProjection projection_;
};

// Sentence vector as the (optionally idf-weighted) mean of token embeddings.
// The embedding table is frozen; fit only learns idf weights.
class EmbeddingAverageEncoder final : public Encoder {
 public:
  EmbeddingAverageEncoder(std::shared_ptr<const EmbeddingTable> table, bool idf_weighted);
  void fit(const LabeledDataset& train) override;
  Feature encode(const Utterance& u) const override;
  std::size_t dim() const override { return table_->dim(); }
  std::string kind() const override { return idf_weighted_ ? "idf-avg" : "avg"; }
  void save(ArchiveWriter& out) const override;
  static std::unique_ptr<EmbeddingAverageEncoder> load(ArchiveReader& in, bool idf_weighted);

 private:
  std::shared_ptr<const EmbeddingTable> table_;
  bool idf_weighted_;
  IdfTable idf_;
};

// Precomputed sentence vectors (stand-in for a pretrained sentence encoder).
class SentenceVectorEncoder final : public Encoder {
 public:
  explicit SentenceVectorEncoder(std::shared_ptr<const SentenceVectorTable> table) : table_(std::move(table)) {}
  void fit(const LabeledDataset&) override {}
  Feature encode(const Utterance& u) const override { return table_->lookup(u.text); }
  std::size_t dim() const override { return table_->dim(); }
  std::string kind() const override { return "sentence"; }
  void save(ArchiveWriter& out) const override;
  static std::unique_ptr<SentenceVectorEncoder> load(ArchiveReader& in);

  const SentenceVectorTable& table() const noexcept { return *table_; }

 private:
  std::shared_ptr<const SentenceVectorTable> table_;
};

std::unique_ptr<Encoder> load_encoder(ArchiveReader& in);

// Dense n x dim matrix of encodings, one row per record.
Matrix encode_all(const Encoder& encoder, const LabeledDataset& ds);

void save_embedding_table(ArchiveWriter& out, const EmbeddingTable& table);
EmbeddingTable load_embedding_table(ArchiveReader& in);

}  // namespace mixintent
