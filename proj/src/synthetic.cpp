#include "mixintent/synthetic.hpp"

#include <cmath>
#include <numbers>

#include "mixintent/rng.hpp"
#include "mixintent/text.hpp"

namespace mixintent {

VectorProblem make_blobs(std::size_t n, std::size_t classes, std::uint64_t seed) {
  VectorProblem p;
  for (std::size_t c = 0; c < classes; ++c) p.labels.push_back("blob" + std::to_string(c));
  p.x = Matrix(n, 2);
  RngStream rng(mix_seed(seed, "blobs"));
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = i % classes;
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(c) / static_cast<double>(classes);
    p.x(i, 0) = 6.0 * std::cos(angle) + 0.6 * rng.normal();
    p.x(i, 1) = 6.0 * std::sin(angle) + 0.6 * rng.normal();
    p.y.push_back(c);
  }
  return p;
}

VectorProblem make_xor(std::size_t n, std::uint64_t seed) {
  VectorProblem p;
  p.labels = {"even", "odd"};
  p.x = Matrix(n, 2);
  RngStream rng(mix_seed(seed, "xor"));
  for (std::size_t i = 0; i < n; ++i) {
    const double sx = (i % 2 == 0) ? 1.0 : -1.0;
    const double sy = ((i / 2) % 2 == 0) ? 1.0 : -1.0;
    p.x(i, 0) = sx + 0.2 * rng.normal();
    p.x(i, 1) = sy + 0.2 * rng.normal();
    p.y.push_back(sx * sy > 0 ? 0 : 1);
  }
  return p;
}

VectorProblem take_rows(const VectorProblem& p, const std::vector<std::size_t>& rows) {
  VectorProblem out;
  out.labels = p.labels;
  out.x = Matrix(rows.size(), p.x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = p.x.row(rows[i]);
    std::copy(src.begin(), src.end(), out.x.row(i).begin());
    out.y.push_back(p.y[rows[i]]);
  }
  return out;
}

LabeledDataset make_order_task(std::size_t n, std::uint64_t seed) {
  static const std::vector<std::string> filler = {"kya", "hai", "mera", "the", "please", "abhi",
                                                  "order", "yaar", "ok", "bhai", "jaldi", "now"};
  RngStream rng(mix_seed(seed, "order-task"));
  LabeledDataset ds;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t len = 3 + rng.below(6);
    std::vector<std::string> tokens;
    for (std::size_t t = 0; t < len; ++t) tokens.push_back(filler[rng.below(filler.size())]);
    const bool a_first = i % 2 == 0;
    const std::size_t p1 = rng.below(len + 1);
    tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(p1), a_first ? "a" : "b");
    const std::size_t p2 = p1 + 1 + rng.below(len + 1 - p1);
    tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(p2), a_first ? "b" : "a");
    ds.add(a_first ? "a-first" : "b-first", join(tokens, " "));
  }
  return ds;
}

}  // namespace mixintent
