#pragma once

// Seeded toy problems with known structure, used by tests and the acceptance
// suite: separable blobs, XOR clusters and an order-sensitive token task.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mixintent/dataset.hpp"
#include "mixintent/numerics.hpp"

namespace mixintent {

struct VectorProblem {
  Matrix x;
  std::vector<std::size_t> y;
  std::vector<std::string> labels;  // sorted
};

// n points split evenly over `classes` Gaussian blobs (sd 0.6) whose centers
// sit 6 units from the origin, evenly spaced on a circle.
VectorProblem make_blobs(std::size_t n, std::size_t classes, std::uint64_t seed);
// Four corner clusters at (+-1, +-1), sd 0.2; label = sign parity.
VectorProblem make_xor(std::size_t n, std::uint64_t seed);

// Rows of `p` at `rows`, keeping the label list.
VectorProblem take_rows(const VectorProblem& p, const std::vector<std::size_t>& rows);

// Each utterance holds filler tokens plus exactly one "a" and one "b"; the
// label says which comes first ("a-first" / "b-first"). Token multisets carry
// no signal about the label.
LabeledDataset make_order_task(std::size_t n, std::uint64_t seed);

}  // namespace mixintent
