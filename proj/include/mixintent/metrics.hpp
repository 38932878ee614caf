#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace mixintent {

struct EvalReport {
  std::vector<std::string> labels;
  std::vector<std::vector<std::size_t>> confusion;  // [gold][predicted]
  std::vector<double> precision;
  std::vector<double> recall;
  std::vector<double> f1;
  double macro_f1 = 0.0;
  double accuracy = 0.0;

  std::string to_text() const;
};

// Per-class F1 = 2PR / (P + R), 0 when P + R = 0. The macro mean runs over
// the whole label set, so classes absent from both sides count as 0.
EvalReport evaluate(const std::vector<std::string>& preds, const std::vector<std::string>& golds,
                    const std::vector<std::string>& label_set);
EvalReport evaluate_indices(std::span<const std::size_t> preds, std::span<const std::size_t> golds,
                            const std::vector<std::string>& label_set);
double macro_f1(std::span<const std::size_t> preds, std::span<const std::size_t> golds, std::size_t n_classes);

}  // namespace mixintent
