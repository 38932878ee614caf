#include "mixintent/encoders.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "mixintent/error.hpp"
#include "mixintent/linalg.hpp"
#include "mixintent/log.hpp"
#include "mixintent/simd.hpp"

namespace mixintent {

IdfTable::IdfTable(std::unordered_map<std::string, double> weights, double default_weight)
    : weights_(std::move(weights)), default_weight_(default_weight) {
  if (!(default_weight_ > 0.0)) throw ArgumentError("idf default weight must be positive");
  for (const auto& [token, w] : weights_) {
    if (!(w > 0.0) || !std::isfinite(w)) throw ArgumentError("idf weight for '" + token + "' must be positive");
  }
}

IdfTable IdfTable::from_vocabulary(const Vocabulary& vocab) {
  const double n = static_cast<double>(vocab.n_docs());
  std::unordered_map<std::string, double> weights;
  weights.reserve(vocab.size());
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    weights.emplace(vocab.token(i), std::log((1.0 + n) / (1.0 + static_cast<double>(vocab.df(i)))) + 1.0);
  }
  return IdfTable(std::move(weights), std::log(1.0 + n) + 1.0);
}

double IdfTable::weight(std::string_view token) const {
  auto it = weights_.find(std::string(token));
  return it == weights_.end() ? default_weight_ : it->second;
}

IdfTable tfidf_fit(const LabeledDataset& ds) { return IdfTable::from_vocabulary(build_vocabulary(ds)); }

SparseVector count_encode(const Vocabulary& vocab, const Utterance& u) {
  std::map<std::size_t, double> counts;
  for (const std::string& t : u.tokens) {
    if (auto id = vocab.find(t)) counts[*id] += 1.0;
  }
  std::vector<SparseVector::Entry> entries;
  entries.reserve(counts.size());
  for (const auto& [id, c] : counts) entries.push_back({id, c});
  return SparseVector(vocab.size(), std::move(entries));
}

SparseVector tfidf_encode(const Vocabulary& vocab, const IdfTable& idf, const Utterance& u) {
  SparseVector counts = count_encode(vocab, u);
  std::vector<SparseVector::Entry> entries = counts.entries();
  for (auto& e : entries) e.value *= idf.weight(vocab.token(e.index));
  SparseVector out(vocab.size(), std::move(entries));
  const double n = out.norm();
  if (n > 0.0) out.scale(1.0 / n);
  return out;
}

LsaProjection lsa_fit(const Matrix& doc_term, std::size_t k) {
  const std::size_t limit = std::min(doc_term.rows(), doc_term.cols());
  if (k == 0 || k > limit) {
    throw ArgumentError("lsa: k = " + std::to_string(k) + " outside [1, " + std::to_string(limit) + "]");
  }
  const SvdResult svd = truncated_svd(doc_term, k);
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < svd.s.size(); ++i) {
    if (svd.s[i] >= 1e-12) kept.push_back(i);
  }
  LsaProjection proj;
  proj.requested = k;
  proj.dropped = k - kept.size();
  if (proj.dropped > 0) {
    log_warning("lsa: dropped " + std::to_string(proj.dropped) + " component(s) with singular value below 1e-12; dim " +
                std::to_string(kept.size()));
  }
  proj.projection = Matrix(doc_term.cols(), kept.size());
  proj.singular_values = DenseVector(kept.size());
  for (std::size_t j = 0; j < kept.size(); ++j) {
    const double s = svd.s[kept[j]];
    proj.singular_values[j] = s;
    for (std::size_t r = 0; r < doc_term.cols(); ++r) proj.projection(r, j) = svd.v(r, kept[j]) / s;
  }
  return proj;
}

DenseVector lsa_encode(const LsaProjection& proj, const SparseVector& v) {
  require_same_size(v.dim(), proj.projection.rows(), "lsa input");
  DenseVector out(proj.dim());
  for (const auto& e : v.entries()) simd::axpy(e.value, proj.projection.row(e.index), out.span());
  return out;
}

DenseVector lsa_encode(const LsaProjection& proj, std::span<const double> v) {
  require_same_size(v.size(), proj.projection.rows(), "lsa input");
  DenseVector out(proj.dim());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] != 0.0) simd::axpy(v[i], proj.projection.row(i), out.span());
  }
  return out;
}

DenseVector avg_encode(const Utterance& u, const EmbeddingTable& table) {
  DenseVector out(table.dim());
  std::size_t hits = 0;
  for (const std::string& t : u.tokens) {
    if (auto id = table.find(t)) {
      simd::axpy(1.0, table.row(*id), out.span());
      ++hits;
    }
  }
  if (hits > 0) simd::scale(1.0 / static_cast<double>(hits), out.span());
  return out;
}

DenseVector idf_avg_encode(const Utterance& u, const EmbeddingTable& table, const IdfTable& idf) {
  DenseVector out(table.dim());
  double total = 0.0;
  for (const std::string& t : u.tokens) {
    if (auto id = table.find(t)) {
      const double w = idf.weight(t);
      simd::axpy(w, table.row(*id), out.span());
      total += w;
    }
  }
  if (total > 0.0) simd::scale(1.0 / total, out.span());
  return out;
}

DenseVector to_dense(const Feature& f) {
  if (const auto* d = std::get_if<DenseVector>(&f)) return *d;
  return std::get<SparseVector>(f).to_dense();
}

std::size_t feature_dim(const Feature& f) {
  if (const auto* d = std::get_if<DenseVector>(&f)) return d->size();
  return std::get<SparseVector>(f).dim();
}

namespace {

void save_vocabulary(ArchiveWriter& out, const Vocabulary& v) {
  out.write("vocab.tokens", v.tokens());
  std::vector<std::size_t> df(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) df[i] = v.df(i);
  out.write("vocab.df", std::span<const std::size_t>(df));
  out.write("vocab.n_docs", static_cast<std::uint64_t>(v.n_docs()));
}

Vocabulary load_vocabulary(ArchiveReader& in) {
  auto tokens = in.read_strings("vocab.tokens");
  auto df = in.read_sizes("vocab.df");
  const std::size_t n = in.read_size("vocab.n_docs");
  return Vocabulary::from_parts(std::move(tokens), std::move(df), n);
}

void ensure_fitted(bool fitted, std::string_view what) {
  if (!fitted) throw ArgumentError(std::string(what) + " encoder used before fit");
}

}  // namespace

void CountEncoder::fit(const LabeledDataset& train) { vocab_ = build_vocabulary(train, min_df_); }

void CountEncoder::save(ArchiveWriter& out) const {
  out.write("encoder", std::string_view("count"));
  out.write("min_df", static_cast<std::uint64_t>(min_df_));
  save_vocabulary(out, vocab_);
}

std::unique_ptr<CountEncoder> CountEncoder::load(ArchiveReader& in) {
  auto enc = std::make_unique<CountEncoder>(in.read_size("min_df"));
  enc->vocab_ = load_vocabulary(in);
  return enc;
}

void TfidfEncoder::fit(const LabeledDataset& train) {
  vocab_ = build_vocabulary(train, min_df_);
  idf_ = IdfTable::from_vocabulary(vocab_);
}

void TfidfEncoder::save(ArchiveWriter& out) const {
  out.write("encoder", std::string_view("tfidf"));
  out.write("min_df", static_cast<std::uint64_t>(min_df_));
  save_vocabulary(out, vocab_);
}

std::unique_ptr<TfidfEncoder> TfidfEncoder::load(ArchiveReader& in) {
  auto enc = std::make_unique<TfidfEncoder>(in.read_size("min_df"));
  enc->vocab_ = load_vocabulary(in);
  enc->idf_ = IdfTable::from_vocabulary(enc->vocab_);
  return enc;
}

LsaEncoder::LsaEncoder(std::unique_ptr<Encoder> base, std::size_t k) : base_(std::move(base)), k_(k) {
  if (!base_) throw ArgumentError("lsa encoder needs a base encoder");
  if (k_ == 0) throw ArgumentError("lsa rank must be positive");
}

void LsaEncoder::fit(const LabeledDataset& train) {
  base_->fit(train);
  const Matrix x = encode_all(*base_, train);
  const std::size_t limit = std::min(x.rows(), x.cols());
  if (limit == 0) throw DataError("lsa: empty document-term matrix");
  const std::size_t k = std::max<std::size_t>(1, std::min(k_, limit > 1 ? limit - 1 : 1));
  projection_ = lsa_fit(x, k);
}

Feature LsaEncoder::encode(const Utterance& u) const {
  ensure_fitted(projection_.projection.rows() > 0, "lsa");
  const Feature f = base_->encode(u);
  if (const auto* s = std::get_if<SparseVector>(&f)) return lsa_encode(projection_, *s);
  return lsa_encode(projection_, std::get<DenseVector>(f).span());
}

void LsaEncoder::save(ArchiveWriter& out) const {
  out.write("encoder", std::string_view("lsa"));
  out.write("k", static_cast<std::uint64_t>(k_));
  out.write("requested", static_cast<std::uint64_t>(projection_.requested));
  out.write("dropped", static_cast<std::uint64_t>(projection_.dropped));
  out.write("singular_values", projection_.singular_values.span());
  out.write("projection", projection_.projection);
  base_->save(out);
}

std::unique_ptr<LsaEncoder> LsaEncoder::load(ArchiveReader& in) {
  const std::size_t k = in.read_size("k");
  LsaProjection proj;
  proj.requested = in.read_size("requested");
  proj.dropped = in.read_size("dropped");
  proj.singular_values = DenseVector(in.read_doubles("singular_values"));
  proj.projection = in.read_matrix("projection");
  auto enc = std::make_unique<LsaEncoder>(load_encoder(in), k);
  enc->projection_ = std::move(proj);
  return enc;
}

EmbeddingAverageEncoder::EmbeddingAverageEncoder(std::shared_ptr<const EmbeddingTable> table, bool idf_weighted)
    : table_(std::move(table)), idf_weighted_(idf_weighted) {
  if (!table_) throw ArgumentError("embedding average encoder needs a table");
}

void EmbeddingAverageEncoder::fit(const LabeledDataset& train) {
  if (idf_weighted_) idf_ = tfidf_fit(train);
}

Feature EmbeddingAverageEncoder::encode(const Utterance& u) const {
  return idf_weighted_ ? idf_avg_encode(u, *table_, idf_) : avg_encode(u, *table_);
}

void save_embedding_table(ArchiveWriter& out, const EmbeddingTable& table) {
  out.write("table.tokens", table.tokens());
  out.write("table.vectors", table.vectors());
}

EmbeddingTable load_embedding_table(ArchiveReader& in) {
  auto tokens = in.read_strings("table.tokens");
  return EmbeddingTable(std::move(tokens), in.read_matrix("table.vectors"));
}

void EmbeddingAverageEncoder::save(ArchiveWriter& out) const {
  out.write("encoder", std::string_view(idf_weighted_ ? "idf-avg" : "avg"));
  save_embedding_table(out, *table_);
  if (idf_weighted_) {
    // The idf table is rebuilt from the training vocabulary on load.
    std::vector<std::string> tokens;
    std::vector<double> weights;
    for (const std::string& t : table_->tokens()) {
      tokens.push_back(t);
      weights.push_back(idf_.weight(t));
    }
    out.write("idf.tokens", tokens);
    out.write("idf.weights", std::span<const double>(weights));
    out.write("idf.default", idf_.default_weight());
  }
}

std::unique_ptr<EmbeddingAverageEncoder> EmbeddingAverageEncoder::load(ArchiveReader& in, bool idf_weighted) {
  auto table = std::make_shared<const EmbeddingTable>(load_embedding_table(in));
  auto enc = std::make_unique<EmbeddingAverageEncoder>(std::move(table), idf_weighted);
  if (idf_weighted) {
    const auto tokens = in.read_strings("idf.tokens");
    const auto weights = in.read_doubles("idf.weights");
    require_same_size(tokens.size(), weights.size(), "idf table");
    std::unordered_map<std::string, double> map;
    for (std::size_t i = 0; i < tokens.size(); ++i) map.emplace(tokens[i], weights[i]);
    enc->idf_ = IdfTable(std::move(map), in.read_double("idf.default"));
  }
  return enc;
}

void SentenceVectorEncoder::save(ArchiveWriter& out) const {
  out.write("encoder", std::string_view("sentence"));
  out.write("sentences.keys", table_->keys());
  out.write("sentences.vectors", table_->vectors());
}

std::unique_ptr<SentenceVectorEncoder> SentenceVectorEncoder::load(ArchiveReader& in) {
  auto keys = in.read_strings("sentences.keys");
  auto table = std::make_shared<const SentenceVectorTable>(std::move(keys), in.read_matrix("sentences.vectors"));
  return std::make_unique<SentenceVectorEncoder>(std::move(table));
}

std::unique_ptr<Encoder> load_encoder(ArchiveReader& in) {
  const std::string kind = in.read_string("encoder");
  if (kind == "count") return CountEncoder::load(in);
  if (kind == "tfidf") return TfidfEncoder::load(in);
  if (kind == "lsa") return LsaEncoder::load(in);
  if (kind == "avg") return EmbeddingAverageEncoder::load(in, false);
  if (kind == "idf-avg") return EmbeddingAverageEncoder::load(in, true);
  if (kind == "sentence") return SentenceVectorEncoder::load(in);
  throw ParseError("unknown encoder kind '" + kind + "'");
}

Matrix encode_all(const Encoder& encoder, const LabeledDataset& ds) {
  const std::size_t d = encoder.dim();
  Matrix out(ds.size(), d);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const Feature f = encoder.encode(ds[i].utterance);
    require_same_size(feature_dim(f), d, "encoder output");
    if (const auto* s = std::get_if<SparseVector>(&f)) {
      s->scatter_into(out.row(i));
    } else {
      const auto& v = std::get<DenseVector>(f);
      std::copy(v.begin(), v.end(), out.row(i).begin());
    }
  }
  return out;
}

}  // namespace mixintent
