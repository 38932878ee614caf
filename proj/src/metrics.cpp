#include "mixintent/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <unordered_map>

#include "mixintent/error.hpp"

namespace mixintent {

EvalReport evaluate_indices(std::span<const std::size_t> preds, std::span<const std::size_t> golds,
                            const std::vector<std::string>& label_set) {
  if (preds.size() != golds.size()) {
    throw ArgumentError("evaluate: " + std::to_string(preds.size()) + " predictions for " +
                        std::to_string(golds.size()) + " gold labels");
  }
  if (preds.empty()) throw ArgumentError("evaluate: empty evaluation set");
  const std::size_t c = label_set.size();
  EvalReport r;
  r.labels = label_set;
  r.confusion.assign(c, std::vector<std::size_t>(c, 0));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] >= c || golds[i] >= c) throw ArgumentError("evaluate: label index out of range");
    ++r.confusion[golds[i]][preds[i]];
    if (preds[i] == golds[i]) ++correct;
  }
  r.precision.assign(c, 0.0);
  r.recall.assign(c, 0.0);
  r.f1.assign(c, 0.0);
  double sum = 0.0;
  for (std::size_t k = 0; k < c; ++k) {
    std::size_t predicted = 0, actual = 0;
    for (std::size_t j = 0; j < c; ++j) {
      predicted += r.confusion[j][k];
      actual += r.confusion[k][j];
    }
    const double tp = static_cast<double>(r.confusion[k][k]);
    const double p = predicted == 0 ? 0.0 : tp / static_cast<double>(predicted);
    const double rc = actual == 0 ? 0.0 : tp / static_cast<double>(actual);
    r.precision[k] = p;
    r.recall[k] = rc;
    r.f1[k] = p + rc == 0.0 ? 0.0 : 2.0 * p * rc / (p + rc);
    sum += r.f1[k];
  }
  r.macro_f1 = c == 0 ? 0.0 : sum / static_cast<double>(c);
  r.accuracy = static_cast<double>(correct) / static_cast<double>(preds.size());
  return r;
}

EvalReport evaluate(const std::vector<std::string>& preds, const std::vector<std::string>& golds,
                    const std::vector<std::string>& label_set) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < label_set.size(); ++i) index.emplace(label_set[i], i);
  auto map = [&](const std::vector<std::string>& labels) {
    std::vector<std::size_t> out;
    out.reserve(labels.size());
    for (const std::string& l : labels) {
      auto it = index.find(l);
      if (it == index.end()) throw ArgumentError("evaluate: unknown label '" + l + "'");
      out.push_back(it->second);
    }
    return out;
  };
  if (preds.size() != golds.size()) {
    throw ArgumentError("evaluate: " + std::to_string(preds.size()) + " predictions for " +
                        std::to_string(golds.size()) + " gold labels");
  }
  const auto p = map(preds);
  const auto g = map(golds);
  return evaluate_indices(p, g, label_set);
}

double macro_f1(std::span<const std::size_t> preds, std::span<const std::size_t> golds, std::size_t n_classes) {
  std::vector<std::string> names(n_classes);
  return evaluate_indices(preds, golds, names).macro_f1;
}

std::string EvalReport::to_text() const {
  std::size_t width = 5;
  for (const auto& l : labels) width = std::max(width, l.size());
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-*s %9s %9s %9s %7s\n", static_cast<int>(width), "label", "precision", "recall",
                "f1", "support");
  out += buf;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    std::size_t support = 0;
    for (std::size_t v : confusion[k]) support += v;
    std::snprintf(buf, sizeof buf, "%-*s %9.4f %9.4f %9.4f %7zu\n", static_cast<int>(width), labels[k].c_str(),
                  precision[k], recall[k], f1[k], support);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "macro-F1 %.4f\naccuracy %.4f\n", macro_f1, accuracy);
  out += buf;
  out += "confusion (rows gold, columns predicted)\n";
  for (std::size_t k = 0; k < labels.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%-*s", static_cast<int>(width), labels[k].c_str());
    out += buf;
    for (std::size_t v : confusion[k]) {
      std::snprintf(buf, sizeof buf, " %6zu", v);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace mixintent
