#include "mixintent/recurrent.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mixintent/error.hpp"
#include "mixintent/metrics.hpp"
#include "mixintent/rng.hpp"
#include "mixintent/simd.hpp"

namespace mixintent {

std::size_t gate_count(CellKind kind) {
  switch (kind) {
    case CellKind::Rnn: return 1;
    case CellKind::Gru: return 3;
    case CellKind::Lstm: return 4;
  }
  return 1;
}

std::string cell_name(CellKind kind) {
  switch (kind) {
    case CellKind::Rnn: return "RNN";
    case CellKind::Gru: return "GRU";
    case CellKind::Lstm: return "LSTM";
  }
  return "?";
}

CellKind parse_cell_kind(std::string_view name) {
  if (name == "RNN") return CellKind::Rnn;
  if (name == "GRU") return CellKind::Gru;
  if (name == "LSTM") return CellKind::Lstm;
  throw ArgumentError("unknown recurrent cell '" + std::string(name) + "'");
}

CellParams::CellParams(CellKind k, std::size_t in, std::size_t h)
    : kind(k), input(in), hidden(h), w(in, gate_count(k) * h), u(h, gate_count(k) * h), b(gate_count(k) * h, 0.0) {}

void CellParams::validate() const {
  const std::size_t gh = gate_count(kind) * hidden;
  require_same_size(w.rows(), input, "cell W rows");
  require_same_size(w.cols(), gh, "cell W columns");
  require_same_size(u.rows(), hidden, "cell U rows");
  require_same_size(u.cols(), gh, "cell U columns");
  require_same_size(b.size(), gh, "cell biases");
}

namespace {

double sigmoid(double x) { return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

// Row-major views into one layer's slice of the flat parameter vector.
template <typename T>
struct LayerSpan {
  std::span<T> w, u, b;
  std::size_t in, h, g;

  std::span<T> w_row(std::size_t i) const { return w.subspan(i * g * h, g * h); }
  std::span<T> u_row(std::size_t j) const { return u.subspan(j * g * h, g * h); }
};

template <typename T>
LayerSpan<T> layer_span(std::span<T> params, const SequenceShape& s, std::size_t layer, std::size_t& at) {
  const std::size_t in = layer == 0 ? s.input : s.hidden;
  const std::size_t g = gate_count(s.kind);
  const std::size_t gh = g * s.hidden;
  LayerSpan<T> v{params.subspan(at, in * gh), params.subspan(at + in * gh, s.hidden * gh),
                 params.subspan(at + in * gh + s.hidden * gh, gh), in, s.hidden, g};
  at += in * gh + s.hidden * gh + gh;
  return v;
}

// One time step. `act` receives post-activation gates (g*h), `h_out` the new
// hidden state and, for LSTM, `c_out` the new cell state.
void step(CellKind kind, const LayerSpan<const double>& p, std::span<const double> x, std::span<const double> h_prev,
          std::span<const double> c_prev, std::span<double> act, std::span<double> h_out, std::span<double> c_out) {
  const std::size_t h = p.h;
  std::copy(p.b.begin(), p.b.end(), act.begin());
  for (std::size_t i = 0; i < p.in; ++i) {
    if (x[i] != 0.0) simd::axpy(x[i], p.w_row(i), act);
  }
  if (kind == CellKind::Gru) {
    for (std::size_t j = 0; j < h; ++j) {
      if (h_prev[j] != 0.0) simd::axpy(h_prev[j], p.u_row(j).first(2 * h), act.first(2 * h));
    }
    for (std::size_t k = 0; k < 2 * h; ++k) act[k] = sigmoid(act[k]);
    const auto z = act.first(h), r = act.subspan(h, h), cand = act.subspan(2 * h, h);
    for (std::size_t j = 0; j < h; ++j) {
      const double rh = r[j] * h_prev[j];
      if (rh != 0.0) simd::axpy(rh, p.u_row(j).subspan(2 * h, h), cand);
    }
    for (std::size_t k = 0; k < h; ++k) {
      cand[k] = std::tanh(cand[k]);
      h_out[k] = (1.0 - z[k]) * h_prev[k] + z[k] * cand[k];
    }
    return;
  }
  for (std::size_t j = 0; j < h; ++j) {
    if (h_prev[j] != 0.0) simd::axpy(h_prev[j], p.u_row(j), act);
  }
  if (kind == CellKind::Rnn) {
    for (std::size_t k = 0; k < h; ++k) h_out[k] = act[k] = std::tanh(act[k]);
    return;
  }
  // LSTM [i, f, g, o]
  for (std::size_t k = 0; k < h; ++k) {
    const double ig = act[k] = sigmoid(act[k]);
    const double fg = act[h + k] = sigmoid(act[h + k]);
    const double gg = act[2 * h + k] = std::tanh(act[2 * h + k]);
    const double og = act[3 * h + k] = sigmoid(act[3 * h + k]);
    c_out[k] = fg * c_prev[k] + ig * gg;
    h_out[k] = og * std::tanh(c_out[k]);
  }
}

LayerSpan<const double> cell_view(const CellParams& p) {
  p.validate();
  const std::size_t g = gate_count(p.kind);
  return {p.w.flat(), p.u.flat(), std::span<const double>(p.b), p.input, p.hidden, g};
}

void check_cell_inputs(const CellParams& p, std::span<const double> x, std::span<const double> h) {
  require_same_size(x.size(), p.input, "cell input");
  require_same_size(h.size(), p.hidden, "cell hidden state");
}

struct LayerCache {
  Matrix out;   // T x H hidden states
  Matrix act;   // T x GH gate activations
  Matrix cell;  // T x H (LSTM only)
};

void layer_forward(CellKind kind, const LayerSpan<const double>& p, const Matrix& x, LayerCache& cache) {
  const std::size_t t_len = x.rows(), h = p.h;
  cache.out = Matrix(t_len, h);
  cache.act = Matrix(t_len, p.g * h);
  if (kind == CellKind::Lstm) cache.cell = Matrix(t_len, h);
  const std::vector<double> zeros(h, 0.0);
  for (std::size_t t = 0; t < t_len; ++t) {
    const std::span<const double> h_prev = t == 0 ? std::span<const double>(zeros) : cache.out.row(t - 1);
    std::span<const double> c_prev = zeros;
    std::span<double> c_out;
    if (kind == CellKind::Lstm) {
      if (t > 0) c_prev = cache.cell.row(t - 1);
      c_out = cache.cell.row(t);
    }
    step(kind, p, x.row(t), h_prev, c_prev, cache.act.row(t), cache.out.row(t), c_out);
  }
}

// Backpropagates dH (gradient w.r.t. each step's output) through the layer,
// accumulating parameter gradients; fills dx when it is non-null.
void layer_backward(CellKind kind, const LayerSpan<const double>& p, const LayerSpan<double>& g, const Matrix& x,
                    const LayerCache& cache, const Matrix& d_out, Matrix* dx) {
  const std::size_t t_len = x.rows(), h = p.h, gh = p.g * h;
  std::vector<double> dh(h), dh_next(h, 0.0), dc(h), dc_next(h, 0.0), dpre(gh), rh(h), drh(h);
  const std::vector<double> zeros(h, 0.0);
  if (dx != nullptr) *dx = Matrix(t_len, p.in);
  for (std::size_t t = t_len; t-- > 0;) {
    const auto act = cache.act.row(t);
    const auto h_prev = t == 0 ? std::span<const double>(zeros) : cache.out.row(t - 1);
    for (std::size_t k = 0; k < h; ++k) dh[k] = d_out(t, k) + dh_next[k];
    std::fill(dh_next.begin(), dh_next.end(), 0.0);

    if (kind == CellKind::Rnn) {
      for (std::size_t k = 0; k < h; ++k) dpre[k] = dh[k] * (1.0 - act[k] * act[k]);
      for (std::size_t j = 0; j < h; ++j) {
        dh_next[j] = simd::dot(p.u_row(j), dpre);
        if (h_prev[j] != 0.0) simd::axpy(h_prev[j], dpre, g.u_row(j));
      }
    } else if (kind == CellKind::Lstm) {
      const auto c = cache.cell.row(t);
      const auto c_prev = t == 0 ? std::span<const double>(zeros) : cache.cell.row(t - 1);
      for (std::size_t k = 0; k < h; ++k) {
        const double ig = act[k], fg = act[h + k], gg = act[2 * h + k], og = act[3 * h + k];
        const double tc = std::tanh(c[k]);
        dc[k] = dc_next[k] + dh[k] * og * (1.0 - tc * tc);
        dpre[k] = dc[k] * gg * ig * (1.0 - ig);
        dpre[h + k] = dc[k] * c_prev[k] * fg * (1.0 - fg);
        dpre[2 * h + k] = dc[k] * ig * (1.0 - gg * gg);
        dpre[3 * h + k] = dh[k] * tc * og * (1.0 - og);
        dc_next[k] = dc[k] * fg;
      }
      for (std::size_t j = 0; j < h; ++j) {
        dh_next[j] = simd::dot(p.u_row(j), dpre);
        if (h_prev[j] != 0.0) simd::axpy(h_prev[j], dpre, g.u_row(j));
      }
    } else {
      // GRU [z, r, candidate]
      std::span<double> dz(dpre.data(), h), dr(dpre.data() + h, h), dcand(dpre.data() + 2 * h, h);
      for (std::size_t k = 0; k < h; ++k) {
        const double z = act[k], cand = act[2 * h + k];
        dz[k] = dh[k] * (cand - h_prev[k]) * z * (1.0 - z);
        dcand[k] = dh[k] * z * (1.0 - cand * cand);
        dh_next[k] = dh[k] * (1.0 - z);
        rh[k] = act[h + k] * h_prev[k];
      }
      for (std::size_t j = 0; j < h; ++j) {
        drh[j] = simd::dot(p.u_row(j).subspan(2 * h, h), dcand);
        if (rh[j] != 0.0) simd::axpy(rh[j], dcand, g.u_row(j).subspan(2 * h, h));
      }
      for (std::size_t k = 0; k < h; ++k) {
        const double r = act[h + k];
        dr[k] = drh[k] * h_prev[k] * r * (1.0 - r);
        dh_next[k] += drh[k] * r;
      }
      const std::span<const double> dzr(dpre.data(), 2 * h);
      for (std::size_t j = 0; j < h; ++j) {
        dh_next[j] += simd::dot(p.u_row(j).first(2 * h), dzr);
        if (h_prev[j] != 0.0) simd::axpy(h_prev[j], dzr, g.u_row(j).first(2 * h));
      }
    }
    simd::axpy(1.0, dpre, g.b);
    const auto xt = x.row(t);
    for (std::size_t i = 0; i < p.in; ++i) {
      if (xt[i] != 0.0) simd::axpy(xt[i], dpre, g.w_row(i));
      if (dx != nullptr) (*dx)(t, i) = simd::dot(p.w_row(i), dpre);
    }
  }
}

}  // namespace

DenseVector rnn_cell(std::span<const double> x, std::span<const double> h, const CellParams& p) {
  if (p.kind != CellKind::Rnn) throw ArgumentError("rnn_cell needs RNN parameters");
  check_cell_inputs(p, x, h);
  std::vector<double> act(p.hidden);
  DenseVector out(p.hidden);
  step(p.kind, cell_view(p), x, h, {}, act, out.span(), {});
  return out;
}

DenseVector gru_cell(std::span<const double> x, std::span<const double> h, const CellParams& p) {
  if (p.kind != CellKind::Gru) throw ArgumentError("gru_cell needs GRU parameters");
  check_cell_inputs(p, x, h);
  std::vector<double> act(3 * p.hidden);
  DenseVector out(p.hidden);
  step(p.kind, cell_view(p), x, h, {}, act, out.span(), {});
  return out;
}

std::pair<DenseVector, DenseVector> lstm_cell(std::span<const double> x, std::span<const double> h,
                                              std::span<const double> c, const CellParams& p) {
  if (p.kind != CellKind::Lstm) throw ArgumentError("lstm_cell needs LSTM parameters");
  check_cell_inputs(p, x, h);
  require_same_size(c.size(), p.hidden, "cell state");
  std::vector<double> act(4 * p.hidden);
  DenseVector h_out(p.hidden), c_out(p.hidden);
  step(p.kind, cell_view(p), x, h, c, act, h_out.span(), c_out.span());
  return {std::move(h_out), std::move(c_out)};
}

std::size_t SequenceShape::layer_size(std::size_t layer) const {
  const std::size_t in = layer == 0 ? input : hidden;
  const std::size_t gh = gate_count(kind) * hidden;
  return in * gh + hidden * gh + gh;
}

std::size_t SequenceShape::size() const {
  std::size_t total = hidden * classes + classes;
  for (std::size_t l = 0; l < layers; ++l) total += layer_size(l);
  return total;
}

namespace {

void check_shape(const SequenceShape& s) {
  if (s.input == 0 || s.hidden == 0 || s.classes == 0 || s.layers == 0) {
    throw ArgumentError("sequence model dimensions must be positive");
  }
}

// Forward pass through all layers; returns the output logits.
std::vector<double> forward_all(std::span<const double> params, const SequenceShape& s, const Matrix& seq,
                                std::vector<LayerCache>& caches) {
  caches.resize(s.layers);
  std::size_t at = 0;
  const Matrix* input = &seq;
  for (std::size_t l = 0; l < s.layers; ++l) {
    const auto view = layer_span(params, s, l, at);
    layer_forward(s.kind, view, *input, caches[l]);
    input = &caches[l].out;
  }
  const auto v = params.subspan(at, s.hidden * s.classes);
  const auto c = params.subspan(at + s.hidden * s.classes, s.classes);
  const auto last = caches.back().out.row(seq.rows() - 1);
  std::vector<double> logits(c.begin(), c.end());
  for (std::size_t j = 0; j < s.hidden; ++j) simd::axpy(last[j], v.subspan(j * s.classes, s.classes), logits);
  return logits;
}

}  // namespace

double sequence_objective(std::span<const double> params, const SequenceShape& s, const std::vector<Matrix>& sequences,
                          std::span<const std::size_t> y, std::span<double> grad) {
  check_shape(s);
  require_same_size(params.size(), s.size(), "sequence model parameters");
  require_same_size(sequences.size(), y.size(), "sequences vs labels");
  if (sequences.empty()) throw ArgumentError("sequence_objective: no sequences");
  const bool want_grad = !grad.empty();
  if (want_grad) {
    require_same_size(grad.size(), params.size(), "sequence model gradient");
    std::fill(grad.begin(), grad.end(), 0.0);
  }
  const double inv_n = 1.0 / static_cast<double>(sequences.size());
  std::vector<LayerCache> caches;
  std::vector<double> dlogits(s.classes);
  double loss = 0.0;
  for (std::size_t n = 0; n < sequences.size(); ++n) {
    const Matrix& seq = sequences[n];
    if (seq.rows() == 0) throw ArgumentError("sequence of length 0");
    require_same_size(seq.cols(), s.input, "sequence width");
    if (y[n] >= s.classes) throw ArgumentError("sequence label out of range");
    const std::vector<double> logits = forward_all(params, s, seq, caches);
    const double m = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (double v : logits) z += std::exp(v - m);
    loss += (std::log(z) + m - logits[y[n]]) * inv_n;
    if (!want_grad) continue;

    for (std::size_t c = 0; c < s.classes; ++c) {
      dlogits[c] = (std::exp(logits[c] - m) / z - (y[n] == c ? 1.0 : 0.0)) * inv_n;
    }
    std::size_t at = 0;
    std::vector<LayerSpan<const double>> views;
    std::vector<LayerSpan<double>> grads;
    for (std::size_t l = 0; l < s.layers; ++l) {
      std::size_t at_g = at;
      views.push_back(layer_span(params, s, l, at));
      grads.push_back(layer_span(grad, s, l, at_g));
    }
    const auto v = params.subspan(at, s.hidden * s.classes);
    const auto gv = grad.subspan(at, s.hidden * s.classes);
    const auto gc = grad.subspan(at + s.hidden * s.classes, s.classes);
    const std::size_t t_last = seq.rows() - 1;
    const auto last = caches.back().out.row(t_last);
    simd::axpy(1.0, dlogits, gc);
    Matrix d_out(seq.rows(), s.hidden);
    for (std::size_t j = 0; j < s.hidden; ++j) {
      simd::axpy(last[j], dlogits, gv.subspan(j * s.classes, s.classes));
      d_out(t_last, j) = simd::dot(v.subspan(j * s.classes, s.classes), dlogits);
    }
    for (std::size_t l = s.layers; l-- > 0;) {
      const Matrix& input = l == 0 ? seq : caches[l - 1].out;
      Matrix d_in;
      layer_backward(s.kind, views[l], grads[l], input, caches[l], d_out, l == 0 ? nullptr : &d_in);
      if (l > 0) d_out = std::move(d_in);
    }
  }
  return loss;
}

std::vector<double> sequence_initial_params(const SequenceShape& s, std::uint64_t seed) {
  check_shape(s);
  std::vector<double> params(s.size());
  RngStream rng(mix_seed(seed, "sequence-init"));
  const double bound = 1.0 / std::sqrt(static_cast<double>(s.hidden));
  for (double& p : params) p = rng.uniform(-bound, bound);
  std::size_t at = 0;
  for (std::size_t l = 0; l < s.layers; ++l) {
    const auto view = layer_span(std::span<double>(params), s, l, at);
    std::fill(view.b.begin(), view.b.end(), 0.0);
    if (s.kind == CellKind::Lstm) std::fill(view.b.begin() + static_cast<std::ptrdiff_t>(s.hidden),
                                            view.b.begin() + static_cast<std::ptrdiff_t>(2 * s.hidden), 1.0);
  }
  std::fill(params.end() - static_cast<std::ptrdiff_t>(s.classes), params.end(), 0.0);
  return params;
}

void SequenceConfig::validate() const {
  if (hidden == 0 || layers == 0 || batch_size == 0 || max_epochs == 0 || patience == 0 || max_tokens == 0) {
    throw ArgumentError("sequence config: sizes and counts must be positive");
  }
  if (!(learning_rate > 0.0) || !(clip_norm > 0.0)) throw ArgumentError("sequence config: rates must be positive");
  if (!(validation_fraction > 0.0 && validation_fraction <= 0.5)) {
    throw ArgumentError("sequence config: validation_fraction must lie in (0, 0.5]");
  }
}

std::size_t best_epoch(const TrainHistory& history) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < history.validation_f1.size(); ++i) {
    if (history.validation_f1[i] > history.validation_f1[best]) best = i;
  }
  return best;
}

StopDecision early_stop(const TrainHistory& history, std::size_t patience) {
  if (patience == 0) throw ArgumentError("patience must be at least 1");
  const auto& f1 = history.validation_f1;
  if (f1.empty()) return StopDecision::Continue;
  const std::size_t best = best_epoch(history);
  return f1.size() - 1 - best >= patience ? StopDecision::StopRestoreBest : StopDecision::Continue;
}

SequenceModel::SequenceModel(SequenceShape shape, std::vector<double> params, std::vector<std::string> labels,
                             std::shared_ptr<const EmbeddingTable> table, std::size_t max_tokens)
    : shape_(shape), params_(std::move(params)), labels_(std::move(labels)), table_(std::move(table)),
      max_tokens_(max_tokens) {
  check_shape(shape_);
  if (!table_) throw ArgumentError("sequence model needs an embedding table");
  require_same_size(table_->dim(), shape_.input, "embedding width");
  require_same_size(params_.size(), shape_.size(), "sequence model parameters");
  require_same_size(labels_.size(), shape_.classes, "sequence model labels");
  require_finite(params_, "sequence model parameters");
}

Matrix SequenceModel::embed(const Utterance& u) const {
  const std::size_t t_len = std::max<std::size_t>(1, std::min(u.tokens.size(), max_tokens_));
  Matrix out(t_len, shape_.input);
  for (std::size_t t = 0; t < t_len && t < u.tokens.size(); ++t) {
    if (auto id = table_->find(u.tokens[t])) {
      const auto row = table_->row(*id);
      std::copy(row.begin(), row.end(), out.row(t).begin());
    }
  }
  return out;
}

DenseVector SequenceModel::predict_scores(const Utterance& u) const {
  std::vector<LayerCache> caches;
  std::vector<double> logits = forward_all(params_, shape_, embed(u), caches);
  const double m = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double& v : logits) z += (v = std::exp(v - m));
  for (double& v : logits) v /= z;
  return DenseVector(std::move(logits));
}

std::size_t SequenceModel::predict_index(const Utterance& u) const {
  const DenseVector s = predict_scores(u);
  std::size_t best = 0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (s[i] > s[best]) best = i;
  }
  return best;
}

void SequenceModel::save(ArchiveWriter& out) const {
  out.write("sequence_model", std::string_view(cell_name(shape_.kind)));
  out.write("labels", labels_);
  out.write("input", static_cast<std::uint64_t>(shape_.input));
  out.write("hidden", static_cast<std::uint64_t>(shape_.hidden));
  out.write("layers", static_cast<std::uint64_t>(shape_.layers));
  out.write("max_tokens", static_cast<std::uint64_t>(max_tokens_));
  out.write("weights", std::span<const double>(params_));
  out.write("table.tokens", table_->tokens());
  out.write("table.vectors", table_->vectors());
}

SequenceModel SequenceModel::load(ArchiveReader& in) {
  SequenceShape s;
  s.kind = parse_cell_kind(in.read_string("sequence_model"));
  std::vector<std::string> labels = in.read_strings("labels");
  s.input = in.read_size("input");
  s.hidden = in.read_size("hidden");
  s.layers = in.read_size("layers");
  s.classes = labels.size();
  const std::size_t max_tokens = in.read_size("max_tokens");
  std::vector<double> params = in.read_doubles("weights");
  std::vector<std::string> tokens = in.read_strings("table.tokens");
  auto table = std::make_shared<const EmbeddingTable>(std::move(tokens), in.read_matrix("table.vectors"));
  return SequenceModel(s, std::move(params), std::move(labels), std::move(table), max_tokens);
}

TrainedSequenceModel train_sequence_model(CellKind kind, const LabeledDataset& ds,
                                          std::shared_ptr<const EmbeddingTable> table, const SequenceConfig& cfg) {
  cfg.validate();
  if (ds.empty()) throw ArgumentError("sequence training: empty dataset");
  if (!table) throw ArgumentError("sequence training: no embedding table");

  // Canonical order: by label, then text.
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Record& ra = ds[a];
    const Record& rb = ds[b];
    if (ra.label != rb.label) return ra.label < rb.label;
    return ra.utterance.text < rb.utterance.text;
  });
  std::vector<std::string> labels;
  for (const std::string& l : ds.labels()) {
    for (const Record& r : ds.records()) {
      if (r.label == l) {
        labels.push_back(l);
        break;
      }
    }
  }
  if (labels.size() < 2) throw DegenerateError("sequence training: fewer than two classes present");

  SequenceShape shape{kind, table->dim(), cfg.hidden, labels.size(), cfg.layers};
  const SequenceModel embedder(shape, std::vector<double>(shape.size(), 0.0), labels, table, cfg.max_tokens);
  std::vector<Matrix> sequences;
  std::vector<std::size_t> y;
  for (std::size_t i : order) {
    sequences.push_back(embedder.embed(ds[i].utterance));
    y.push_back(static_cast<std::size_t>(std::lower_bound(labels.begin(), labels.end(), ds[i].label) - labels.begin()));
  }

  auto [fit_rows, val_rows] =
      stratified_indices(y, labels.size(), cfg.validation_fraction, mix_seed(cfg.seed, "sequence-validation"));
  if (fit_rows.empty()) std::swap(fit_rows, val_rows);

  std::vector<double> params = sequence_initial_params(shape, cfg.seed);
  std::vector<double> best = params, grad(params.size()), m1(params.size(), 0.0), m2(params.size(), 0.0);
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  std::size_t adam_t = 0;
  TrainHistory history;
  RngStream rng(mix_seed(cfg.seed, "sequence-batches"));
  std::vector<Matrix> batch;
  std::vector<std::size_t> batch_y;

  auto predict_rows = [&](const std::vector<std::size_t>& rows) {
    std::vector<std::size_t> preds;
    std::vector<LayerCache> caches;
    for (std::size_t r : rows) {
      const std::vector<double> logits = forward_all(params, shape, sequences[r], caches);
      preds.push_back(static_cast<std::size_t>(std::max_element(logits.begin(), logits.end()) - logits.begin()));
    }
    return preds;
  };
  std::vector<std::size_t> val_gold;
  for (std::size_t r : val_rows) val_gold.push_back(y[r]);

  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(fit_rows));
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < fit_rows.size(); start += cfg.batch_size) {
      const std::size_t len = std::min(cfg.batch_size, fit_rows.size() - start);
      batch.clear();
      batch_y.clear();
      for (std::size_t k = 0; k < len; ++k) {
        batch.push_back(sequences[fit_rows[start + k]]);
        batch_y.push_back(y[fit_rows[start + k]]);
      }
      epoch_loss += sequence_objective(params, shape, batch, batch_y, grad) * static_cast<double>(len);
      const double gnorm = norm(grad);
      if (!std::isfinite(gnorm)) throw NumericError("sequence training: non-finite gradient");
      if (gnorm > cfg.clip_norm) simd::scale(cfg.clip_norm / gnorm, grad);
      ++adam_t;
      const double c1 = 1.0 - std::pow(beta1, static_cast<double>(adam_t));
      const double c2 = 1.0 - std::pow(beta2, static_cast<double>(adam_t));
      for (std::size_t j = 0; j < params.size(); ++j) {
        m1[j] = beta1 * m1[j] + (1.0 - beta1) * grad[j];
        m2[j] = beta2 * m2[j] + (1.0 - beta2) * grad[j] * grad[j];
        params[j] -= cfg.learning_rate * (m1[j] / c1) / (std::sqrt(m2[j] / c2) + eps);
      }
    }
    history.train_loss.push_back(epoch_loss / static_cast<double>(fit_rows.size()));
    const double score =
        val_rows.empty() ? -history.train_loss.back() : macro_f1(predict_rows(val_rows), val_gold, labels.size());
    history.validation_f1.push_back(score);
    if (best_epoch(history) == epoch) best = params;
    if (early_stop(history, cfg.patience) == StopDecision::StopRestoreBest) break;
  }
  history.best_epoch = best_epoch(history);
  return {SequenceModel(shape, std::move(best), std::move(labels), std::move(table), cfg.max_tokens),
          std::move(history)};
}

}  // namespace mixintent
