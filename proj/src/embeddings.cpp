#include "mixintent/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>

#include "mixintent/error.hpp"
#include "mixintent/log.hpp"
#include "mixintent/rng.hpp"
#include "mixintent/simd.hpp"
#include "mixintent/text.hpp"
#include "mixintent/vocabulary.hpp"

namespace mixintent {

EmbeddingTable::EmbeddingTable(std::vector<std::string> tokens, Matrix vectors)
    : tokens_(std::move(tokens)), vectors_(std::move(vectors)) {
  require_same_size(tokens_.size(), vectors_.rows(), "embedding table rows");
  require_finite(vectors_.flat(), "embedding table");
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], i).second) throw ArgumentError("duplicate embedding token '" + tokens_[i] + "'");
  }
}

std::optional<std::size_t> EmbeddingTable::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

SentenceVectorTable::SentenceVectorTable(std::vector<std::string> keys, Matrix vectors)
    : keys_(std::move(keys)), vectors_(std::move(vectors)) {
  require_same_size(keys_.size(), vectors_.rows(), "sentence table rows");
  require_finite(vectors_.flat(), "sentence table");
  for (std::size_t i = 0; i < keys_.size(); ++i) {
    keys_[i] = normalize_text(keys_[i]);
    index_.emplace(keys_[i], i);  // first occurrence wins
  }
}

SentenceVectorTable::SentenceVectorTable(const SentenceVectorTable& other)
    : keys_(other.keys_), vectors_(other.vectors_), index_(other.index_), misses_(other.misses_.load()) {}

SentenceVectorTable& SentenceVectorTable::operator=(const SentenceVectorTable& other) {
  keys_ = other.keys_;
  vectors_ = other.vectors_;
  index_ = other.index_;
  misses_.store(other.misses_.load());
  return *this;
}

DenseVector SentenceVectorTable::lookup(std::string_view text) const {
  auto it = index_.find(normalize_text(text));
  if (it == index_.end()) {
    const std::size_t n = ++misses_;
    if (n == 1 || n % 100 == 0) log_warning("sentence vector missing (" + std::to_string(n) + " so far): " + std::string(text));
    return DenseVector(dim());
  }
  const auto row = vectors_.row(it->second);
  return DenseVector(std::vector<double>(row.begin(), row.end()));
}

namespace {

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_header_and_rows(std::ostream& out, const std::vector<std::string>& keys, const Matrix& m, char sep) {
  out << keys.size() << ' ' << m.cols() << '\n';
  for (std::size_t i = 0; i < keys.size(); ++i) {
    out << keys[i];
    for (std::size_t j = 0; j < m.cols(); ++j) {
      out << (j == 0 ? sep : ' ') << format_real(m(i, j));
    }
    out << '\n';
  }
}

struct Parsed {
  std::vector<std::string> keys;
  Matrix vectors;
};

std::vector<double> parse_values(std::string_view text, std::size_t dim, std::size_t line_no) {
  std::vector<double> values;
  values.reserve(dim);
  std::string owned(text);
  const char* p = owned.c_str();
  char* end = nullptr;
  while (true) {
    while (*p == ' ') ++p;
    if (*p == '\0') break;
    const double v = std::strtod(p, &end);
    if (end == p) throw ParseError("malformed number", line_no);
    values.push_back(v);
    p = end;
  }
  if (values.size() != dim) {
    throw ParseError("row has " + std::to_string(values.size()) + " values, header declares " + std::to_string(dim), line_no);
  }
  return values;
}

Parsed parse_table(const std::filesystem::path& path, char sep) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open embedding file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing header", 1);
  std::size_t rows = 0, dim = 0;
  {
    std::istringstream header(line);
    if (!(header >> rows >> dim) || dim == 0) throw ParseError("header must be `V D` with D > 0", 1);
  }
  Parsed out;
  std::vector<double> flat;
  flat.reserve(rows * dim);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cut = line.find(sep);
    if (cut == std::string::npos || cut == 0) throw ParseError("row lacks a key and values", line_no);
    const std::vector<double> values = parse_values(std::string_view(line).substr(cut + 1), dim, line_no);
    out.keys.push_back(line.substr(0, cut));
    flat.insert(flat.end(), values.begin(), values.end());
  }
  if (out.keys.size() != rows) {
    throw ParseError("header declares " + std::to_string(rows) + " rows, file holds " + std::to_string(out.keys.size()),
                     line_no);
  }
  out.vectors = Matrix(rows, dim, std::move(flat));
  return out;
}

}  // namespace

void save_word_embeddings(const EmbeddingTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_header_and_rows(out, table.tokens(), table.vectors(), ' ');
}

EmbeddingTable load_word_embeddings(const std::filesystem::path& path) {
  Parsed p = parse_table(path, ' ');
  try {
    return EmbeddingTable(std::move(p.keys), std::move(p.vectors));
  } catch (const ArgumentError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void save_sentence_vectors(const SentenceVectorTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_header_and_rows(out, table.keys(), table.vectors(), '\t');
}

SentenceVectorTable load_sentence_vectors(const std::filesystem::path& path) {
  Parsed p = parse_table(path, '\t');
  return SentenceVectorTable(std::move(p.keys), std::move(p.vectors));
}

std::variant<EmbeddingTable, SentenceVectorTable> load_external_embeddings(const std::filesystem::path& path,
                                                                           EmbeddingLevel level) {
  if (level == EmbeddingLevel::Word) return load_word_embeddings(path);
  return load_sentence_vectors(path);
}

namespace {

double log_sigmoid(double x) { return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }
double sigmoid(double x) { return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

}  // namespace

SgnsResult sgns_train(const std::vector<std::vector<std::string>>& sentences, const SgnsConfig& config) {
  if (config.dim == 0 || config.window == 0 || config.epochs == 0) {
    throw ArgumentError("sgns: dim, window and epochs must be positive");
  }
  const Vocabulary vocab = build_vocabulary(sentences, 1);
  if (vocab.empty()) throw ArgumentError("sgns: corpus has no tokens");

  std::vector<std::vector<std::size_t>> corpus;
  std::vector<double> counts(vocab.size(), 0.0);
  std::size_t total_tokens = 0;
  for (const auto& s : sentences) {
    std::vector<std::size_t> ids;
    for (const std::string& t : s) {
      const std::size_t id = *vocab.find(t);
      ids.push_back(id);
      counts[id] += 1.0;
    }
    total_tokens += ids.size();
    if (ids.size() > 1) corpus.push_back(std::move(ids));
  }

  std::vector<double> noise_cdf(vocab.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) noise_cdf[i] = (acc += std::pow(counts[i], 0.75));

  const std::size_t dim = config.dim;
  RngStream rng(mix_seed(config.seed, "sgns"));
  Matrix center(vocab.size(), dim);
  Matrix context(vocab.size(), dim);
  for (double& x : center.flat()) x = (rng.uniform() - 0.5) / static_cast<double>(dim);

  auto draw_noise = [&] {
    const double u = rng.uniform() * acc;
    const auto it = std::upper_bound(noise_cdf.begin(), noise_cdf.end(), u);
    return static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - noise_cdf.begin(), noise_cdf.size() - 1));
  };

  SgnsResult result;
  std::vector<double> grad(dim);
  const double total_steps = static_cast<double>(config.epochs) * static_cast<double>(std::max<std::size_t>(total_tokens, 1));
  double step = 0.0;
  std::vector<std::size_t> order(corpus.size());
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(std::span<std::size_t>(order));
    double loss = 0.0;
    std::size_t pairs = 0;
    for (std::size_t si : order) {
      const auto& ids = corpus[si];
      for (std::size_t c = 0; c < ids.size(); ++c, step += 1.0) {
        const double lr = config.learning_rate * std::max(1.0 - step / total_steps, 1e-4);
        const std::size_t lo = c >= config.window ? c - config.window : 0;
        const std::size_t hi = std::min(ids.size() - 1, c + config.window);
        auto in = center.row(ids[c]);
        for (std::size_t o = lo; o <= hi; ++o) {
          if (o == c) continue;
          std::fill(grad.begin(), grad.end(), 0.0);
          for (std::size_t k = 0; k <= config.negatives; ++k) {
            std::size_t target = ids[o];
            double label = 1.0;
            if (k > 0) {
              target = draw_noise();
              if (target == ids[o]) continue;
              label = 0.0;
            }
            auto out = context.row(target);
            const double score = simd::dot(in, out);
            loss -= label > 0.0 ? log_sigmoid(score) : log_sigmoid(-score);
            const double g = (label - sigmoid(score)) * lr;
            simd::axpy(g, out, grad);
            simd::axpy(g, in, out);
          }
          simd::axpy(1.0, grad, in);
          ++pairs;
        }
      }
    }
    result.epoch_losses.push_back(pairs == 0 ? 0.0 : loss / static_cast<double>(pairs));
  }
  if (!result.epoch_losses.empty() && !std::isfinite(result.epoch_losses.back())) {
    throw NumericError("sgns: final epoch loss is not finite");
  }
  result.table = EmbeddingTable(vocab.tokens(), std::move(center));
  return result;
}

SgnsResult sgns_train(const LabeledDataset& ds, const SgnsConfig& config) {
  if (ds.empty()) throw ArgumentError("sgns: empty corpus");
  return sgns_train(ds.token_sequences(), config);
}

}  // namespace mixintent
