#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mixintent/classifiers.hpp"
#include "mixintent/encoders.hpp"
#include "mixintent/error.hpp"
#include "mixintent/gradcheck.hpp"
#include "mixintent/metrics.hpp"
#include "mixintent/recurrent.hpp"
#include "mixintent/rng.hpp"
#include "mixintent/synthetic.hpp"

using namespace mixintent;

namespace {

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

CellParams filled(CellKind kind, double w, double u, double b) {
  CellParams p(kind, 1, 1);
  for (double& v : p.w.flat()) v = w;
  for (double& v : p.u.flat()) v = u;
  for (double& v : p.b) v = b;
  return p;
}

Matrix random_matrix(std::size_t r, std::size_t c, RngStream& rng) {
  Matrix m(r, c);
  for (double& v : m.flat()) v = rng.normal();
  return m;
}

std::shared_ptr<const EmbeddingTable> random_table(const LabeledDataset& ds, std::size_t dim, std::uint64_t seed) {
  std::vector<std::string> tokens;
  for (const Record& r : ds.records()) tokens.insert(tokens.end(), r.utterance.tokens.begin(), r.utterance.tokens.end());
  std::sort(tokens.begin(), tokens.end());
  tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
  RngStream rng(seed);
  return std::make_shared<const EmbeddingTable>(tokens, random_matrix(tokens.size(), dim, rng));
}

double sequence_f1(const SequenceModel& m, const LabeledDataset& ds) {
  std::vector<std::string> preds, golds;
  for (const Record& r : ds.records()) {
    preds.push_back(m.predict(r.utterance));
    golds.push_back(r.label);
  }
  return evaluate(preds, golds, ds.labels()).macro_f1;
}

double gradcheck_error(const SequenceShape& s, std::size_t t_len, std::uint64_t seed) {
  RngStream rng(seed);
  std::vector<Matrix> seqs;
  std::vector<std::size_t> y;
  for (std::size_t n = 0; n < 3; ++n) {
    seqs.push_back(random_matrix(t_len - n % 2, s.input, rng));
    y.push_back(n % s.classes);
  }
  std::vector<double> theta(s.size());
  for (double& v : theta) v = rng.uniform(-0.8, 0.8);
  std::vector<double> grad(theta.size());
  sequence_objective(theta, s, seqs, y, grad);
  auto f = [&](std::span<const double> p) { return sequence_objective(p, s, seqs, y, {}); };
  return check_gradient(f, grad, theta).max_relative_error;
}

}  // namespace

TEST_CASE("cell hand values") {
  const std::vector<double> one{1.0}, zero{0.0};
  CHECK(std::abs(rnn_cell(one, zero, filled(CellKind::Rnn, 1, 1, 0))[0] - 0.761594) < 1e-6);
  CHECK(std::abs(rnn_cell(one, zero, filled(CellKind::Rnn, 1, 1, 0))[0] - std::tanh(1.0)) < 1e-15);

  const double z = sig(2.0);
  const double cand = std::tanh(1.0 + z);
  const double gru = gru_cell(one, one, filled(CellKind::Gru, 1, 1, 0))[0];
  CHECK(std::abs(gru - ((1 - z) + z * cand)) < 1e-14);
  // Decimal evaluation of the equations: tanh(1 + sigma(2)) = 0.954563.
  CHECK(std::abs(gru - 0.959979) < 1e-5);

  const auto [h, c] = lstm_cell(one, zero, zero, filled(CellKind::Lstm, 1, 1, 0));
  CHECK(std::abs(c[0] - 0.556770) < 1e-5);
  CHECK(std::abs(h[0] - 0.369606) < 1e-5);
  CHECK(std::abs(c[0] - sig(1) * std::tanh(1)) < 1e-14);
}

TEST_CASE("zero parameters and forced gates") {
  const std::vector<double> x{0.3, -2.0}, h0(3, 0.0);
  for (CellKind k : {CellKind::Rnn, CellKind::Gru, CellKind::Lstm}) {
    CellParams p(k, 2, 3);
    const std::vector<double> zx(2, 0.0);
    if (k == CellKind::Lstm) {
      const auto [h, c] = lstm_cell(zx, h0, h0, p);
      for (std::size_t i = 0; i < 3; ++i) CHECK((h[i] == 0.0 && c[i] == 0.0));
    } else {
      const DenseVector h = k == CellKind::Rnn ? rnn_cell(zx, h0, p) : gru_cell(zx, h0, p);
      for (double v : h) CHECK(v == 0.0);
    }
  }
  // A very negative update-gate bias drives z to exactly 0 in double precision.
  RngStream rng(4);
  CellParams p(CellKind::Gru, 2, 3);
  for (double& v : p.w.flat()) v = rng.normal();
  for (double& v : p.u.flat()) v = rng.normal();
  for (std::size_t i = 0; i < 3; ++i) p.b[i] = -1000.0;
  const std::vector<double> h{0.25, -0.5, 0.9};
  const DenseVector out = gru_cell(x, h, p);
  for (std::size_t i = 0; i < 3; ++i) CHECK(out[i] == h[i]);

  CHECK_THROWS_AS(gru_cell(std::vector<double>{1.0}, h, p), DimensionError);
  CHECK_THROWS_AS(rnn_cell(x, h, p), ArgumentError);
}

TEST_CASE("hidden states stay bounded") {
  RngStream rng(9);
  for (CellKind k : {CellKind::Rnn, CellKind::Gru}) {
    CellParams p(k, 4, 5);
    for (double& v : p.w.flat()) v = 20.0 * rng.normal();
    for (double& v : p.u.flat()) v = 20.0 * rng.normal();
    std::vector<double> h(5, 0.0);
    for (int t = 0; t < 20; ++t) {
      std::vector<double> x(4);
      for (double& v : x) v = 10.0 * rng.normal();
      const DenseVector next = k == CellKind::Rnn ? rnn_cell(x, h, p) : gru_cell(x, h, p);
      h.assign(next.begin(), next.end());
      for (double v : h) CHECK((std::isfinite(v) && std::abs(v) <= 1.0));
    }
  }
}

TEST_CASE("single-layer objective matches chained cells") {
  RngStream rng(21);
  for (CellKind k : {CellKind::Rnn, CellKind::Gru, CellKind::Lstm}) {
    const SequenceShape s{k, 3, 2, 2, 1};
    std::vector<double> theta(s.size());
    for (double& v : theta) v = rng.uniform(-1, 1);
    CellParams p(k, 3, 2);
    std::size_t at = 0;
    for (double& v : p.w.flat()) v = theta[at++];
    for (double& v : p.u.flat()) v = theta[at++];
    for (double& v : p.b) v = theta[at++];
    const Matrix seq = random_matrix(5, 3, rng);
    std::vector<double> h(2, 0.0), c(2, 0.0);
    for (std::size_t t = 0; t < 5; ++t) {
      if (k == CellKind::Lstm) {
        auto [hn, cn] = lstm_cell(seq.row(t), h, c, p);
        h.assign(hn.begin(), hn.end());
        c.assign(cn.begin(), cn.end());
      } else {
        const DenseVector hn = k == CellKind::Rnn ? rnn_cell(seq.row(t), h, p) : gru_cell(seq.row(t), h, p);
        h.assign(hn.begin(), hn.end());
      }
    }
    double logits[2];
    for (std::size_t cl = 0; cl < 2; ++cl) logits[cl] = theta[at + 4 + cl] + h[0] * theta[at + cl] + h[1] * theta[at + 2 + cl];
    const double expect = std::log(std::exp(logits[0]) + std::exp(logits[1])) - logits[1];
    const std::vector<std::size_t> y{1};
    CHECK(std::abs(sequence_objective(theta, s, {seq}, y, {}) - expect) < 1e-12);
  }
}

TEST_CASE("bptt gradients match finite differences") {
  for (CellKind k : {CellKind::Rnn, CellKind::Gru, CellKind::Lstm}) {
    CAPTURE(cell_name(k));
    CHECK(gradcheck_error({k, 3, 3, 2, 1}, 5, 31) <= 1e-4);
    CHECK(gradcheck_error({k, 3, 4, 3, 2}, 8, 32) <= 1e-4);
  }
}

TEST_CASE("early stopping rule") {
  TrainHistory h;
  h.validation_f1 = {0.1, 0.2, 0.3, 0.4};
  for (std::size_t p = 1; p <= 3; ++p) CHECK(early_stop(h, p) == StopDecision::Continue);

  h.validation_f1 = {0.8, 0.8};
  CHECK(early_stop(h, 2) == StopDecision::Continue);
  h.validation_f1 = {0.8, 0.8, 0.8};
  CHECK(early_stop(h, 2) == StopDecision::StopRestoreBest);
  CHECK(best_epoch(h) == 0);

  for (std::size_t n = 1; n <= 4; ++n) {
    h.validation_f1.assign({0.7, 0.9, 0.85, 0.91});
    h.validation_f1.resize(n);
    CHECK(early_stop(h, 2) == StopDecision::Continue);
  }
  CHECK(best_epoch(h) == 3);
  CHECK_THROWS_AS(early_stop(h, 0), ArgumentError);
}

TEST_CASE("order task needs a recurrent model") {
  const LabeledDataset train = make_order_task(400, 1);
  const LabeledDataset test = make_order_task(200, 2);
  const auto table = random_table(train, 8, 3);

  CountEncoder bow(1);
  bow.fit(train);
  const auto linear = train_linear_svm(encode_all(bow, train), train.label_indices(), train.labels(), TrainConfig{});
  const Matrix xt = encode_all(bow, test);
  std::vector<std::string> preds, golds;
  for (std::size_t i = 0; i < test.size(); ++i) {
    preds.push_back(linear->predict(xt.row(i)));
    golds.push_back(test[i].label);
  }
  const double bow_f1 = evaluate(preds, golds, test.labels()).macro_f1;
  MESSAGE("bag-of-words linear macro-F1 " << bow_f1);
  CHECK(bow_f1 <= 0.6);

  SequenceConfig cfg;
  cfg.hidden = 16;
  cfg.layers = 1;
  for (CellKind k : {CellKind::Gru, CellKind::Lstm}) {
    const auto trained = train_sequence_model(k, train, table, cfg);
    const double f1 = sequence_f1(trained.model, test);
    MESSAGE(cell_name(k) << " macro-F1 " << f1 << " after " << trained.history.epochs() << " epochs");
    CHECK(f1 >= 0.95);
  }
}

TEST_CASE("training is deterministic, order invariant and persistent") {
  const LabeledDataset ds = make_order_task(120, 5);
  const auto table = random_table(ds, 6, 6);
  SequenceConfig cfg;
  cfg.hidden = 6;
  cfg.max_epochs = 4;
  const auto a = train_sequence_model(CellKind::Lstm, ds, table, cfg);
  const auto b = train_sequence_model(CellKind::Lstm, ds, table, cfg);
  CHECK(a.history.validation_f1 == b.history.validation_f1);
  CHECK(a.history.train_loss == b.history.train_loss);
  CHECK(std::equal(a.model.params().begin(), a.model.params().end(), b.model.params().begin()));

  std::vector<Record> reversed(ds.records().rbegin(), ds.records().rend());
  const auto c = train_sequence_model(CellKind::Lstm, LabeledDataset(reversed), table, cfg);
  CHECK(std::equal(a.model.params().begin(), a.model.params().end(), c.model.params().begin()));

  std::ostringstream out;
  ArchiveWriter w(out);
  a.model.save(w);
  std::istringstream in(out.str());
  ArchiveReader r(in);
  const SequenceModel loaded = SequenceModel::load(r);
  CHECK(std::equal(a.model.params().begin(), a.model.params().end(), loaded.params().begin()));
  for (const Record& rec : ds.records()) {
    const DenseVector p = a.model.predict_scores(rec.utterance);
    CHECK(p == loaded.predict_scores(rec.utterance));
    double sum = 0.0;
    for (double v : p) sum += v;
    CHECK(std::abs(sum - 1.0) < 1e-9);
  }
  CHECK(a.model.embed(Utterance("")).rows() == 1);
  CHECK(a.model.embed(Utterance("zzz a")).row(0)[0] == 0.0);
}

TEST_CASE("degenerate sequence training") {
  LabeledDataset ds;
  ds.add("x", "a b");
  ds.add("x", "b a");
  const auto table = random_table(ds, 3, 1);
  CHECK_THROWS_AS(train_sequence_model(CellKind::Rnn, ds, table, SequenceConfig{}), DegenerateError);
  CHECK_THROWS_AS(train_sequence_model(CellKind::Rnn, LabeledDataset{}, table, SequenceConfig{}), ArgumentError);
}
