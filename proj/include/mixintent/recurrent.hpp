#pragma once

// Stacked RNN / GRU / LSTM sequence classifiers over frozen word embeddings.
// The top layer's final hidden state feeds a softmax output layer.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mixintent/archive.hpp"
#include "mixintent/dataset.hpp"
#include "mixintent/embeddings.hpp"
#include "mixintent/numerics.hpp"

namespace mixintent {

enum class CellKind { Rnn, Gru, Lstm };

std::size_t gate_count(CellKind kind);
std::string cell_name(CellKind kind);  // "RNN", "GRU", "LSTM"
CellKind parse_cell_kind(std::string_view name);

// Gates are stored side by side: column block g of w, u and b belongs to gate
// g. Order: RNN [h], GRU [z, r, candidate], LSTM [i, f, g, o].
struct CellParams {
  CellKind kind = CellKind::Rnn;
  std::size_t input = 0, hidden = 0;
  Matrix w;               // input x (gates * hidden)
  Matrix u;               // hidden x (gates * hidden)
  std::vector<double> b;  // gates * hidden

  CellParams() = default;
  CellParams(CellKind kind, std::size_t input, std::size_t hidden);
  void validate() const;
};

DenseVector rnn_cell(std::span<const double> x, std::span<const double> h, const CellParams& p);
DenseVector gru_cell(std::span<const double> x, std::span<const double> h, const CellParams& p);
// Returns (h', c').
std::pair<DenseVector, DenseVector> lstm_cell(std::span<const double> x, std::span<const double> h,
                                              std::span<const double> c, const CellParams& p);

struct SequenceShape {
  CellKind kind = CellKind::Gru;
  std::size_t input = 0, hidden = 0, classes = 0, layers = 2;

  std::size_t layer_size(std::size_t layer) const;
  std::size_t size() const;
};

// Mean cross-entropy over the sequences (each a T x input matrix, T >= 1),
// classifying from the top layer's last hidden state. Parameters are laid
// out per layer as w, u, b, then the output weights (hidden x classes) and
// biases. Fills grad (same size as params) when it is nonempty. Gradients
// with respect to the inputs are not formed: embeddings are frozen.
double sequence_objective(std::span<const double> params, const SequenceShape& shape,
                          const std::vector<Matrix>& sequences, std::span<const std::size_t> y,
                          std::span<double> grad);

// Uniform(-1/sqrt(H), 1/sqrt(H)) weights; LSTM forget-gate biases 1.
std::vector<double> sequence_initial_params(const SequenceShape& shape, std::uint64_t seed);

struct SequenceConfig {
  std::size_t hidden = 64;
  std::size_t layers = 2;
  double learning_rate = 0.01;  // Adam
  double clip_norm = 5.0;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 50;
  std::size_t patience = 5;
  double validation_fraction = 0.1;
  std::size_t max_tokens = 64;
  std::uint64_t seed = 1;

  void validate() const;
};

struct TrainHistory {
  std::vector<double> train_loss;
  std::vector<double> validation_f1;
  std::size_t best_epoch = 0;  // 0-based

  std::size_t epochs() const noexcept { return train_loss.size(); }
};

enum class StopDecision { Continue, StopRestoreBest };

// Stop once validation macro-F1 has gone `patience` consecutive epochs
// without a strict improvement over the best so far.
StopDecision early_stop(const TrainHistory& history, std::size_t patience);
// Index of the first strict maximum of validation_f1.
std::size_t best_epoch(const TrainHistory& history);

class SequenceModel {
 public:
  SequenceModel(SequenceShape shape, std::vector<double> params, std::vector<std::string> labels,
                std::shared_ptr<const EmbeddingTable> table, std::size_t max_tokens);

  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const SequenceShape& shape() const noexcept { return shape_; }
  std::span<const double> params() const noexcept { return params_; }

  // Softmax probabilities.
  DenseVector predict_scores(const Utterance& u) const;
  std::size_t predict_index(const Utterance& u) const;
  const std::string& predict(const Utterance& u) const { return labels_[predict_index(u)]; }

  // T x input embedding matrix: OOV tokens are zero rows, an empty utterance
  // is one zero row, and only the first max_tokens tokens are kept.
  Matrix embed(const Utterance& u) const;

  void save(ArchiveWriter& out) const;
  static SequenceModel load(ArchiveReader& in);

 private:
  SequenceShape shape_;
  std::vector<double> params_;
  std::vector<std::string> labels_;
  std::shared_ptr<const EmbeddingTable> table_;
  std::size_t max_tokens_;
};

struct TrainedSequenceModel {
  SequenceModel model;
  TrainHistory history;
};

// Records are put in a canonical order before any seeded shuffling, so the
// result does not depend on the order of `ds`.
TrainedSequenceModel train_sequence_model(CellKind kind, const LabeledDataset& ds,
                                          std::shared_ptr<const EmbeddingTable> table, const SequenceConfig& cfg);

}  // namespace mixintent
