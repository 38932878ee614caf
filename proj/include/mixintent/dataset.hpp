#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mixintent {

struct Utterance {
  Utterance() = default;
  explicit Utterance(std::string text);

  std::string text;
  std::vector<std::string> tokens;  // lowercase, never empty strings

  bool operator==(const Utterance&) const = default;
};

struct Record {
  Utterance utterance;
  std::string label;

  bool operator==(const Record&) const = default;
};

// Ordered records plus the distinct label set (kept sorted ascending, which
// is the tie-break order used by every classifier).
class LabeledDataset {
 public:
  LabeledDataset() = default;
  explicit LabeledDataset(std::vector<Record> records);
  // `labels` may name labels no record carries (e.g. a split that drew none).
  LabeledDataset(std::vector<Record> records, std::vector<std::string> labels);

  void add(std::string label, std::string text);

  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  const Record& operator[](std::size_t i) const { return records_[i]; }
  const std::vector<Record>& records() const noexcept { return records_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  // Index of `label` in labels(); throws ArgumentError if unknown.
  std::size_t label_index(std::string_view label) const;
  std::vector<std::size_t> label_indices() const;
  std::vector<std::vector<std::string>> token_sequences() const;

  // Records at `indices`, in the given order, keeping this dataset's label set.
  LabeledDataset subset(std::span<const std::size_t> indices) const;

  bool operator==(const LabeledDataset&) const = default;

 private:
  std::vector<Record> records_;
  std::vector<std::string> labels_;
};

// TSV: one `label<TAB>text` record per nonempty line, no header.
LabeledDataset load_dataset(const std::filesystem::path& path);
LabeledDataset read_dataset(std::istream& in);
void save_dataset(const LabeledDataset& ds, const std::filesystem::path& path);
void write_dataset(const LabeledDataset& ds, std::ostream& out);

// 64-bit FNV-1a over the serialized records, as 16 hex digits.
std::string dataset_digest(const LabeledDataset& ds);

struct Split {
  LabeledDataset train;
  LabeledDataset test;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
};

// Per-class test count is round-half-up(count * fraction); if the total misses
// round-half-up(n * fraction) the largest classes absorb the difference one
// record each. Both halves keep the original record order.
Split stratified_split(const LabeledDataset& ds, double test_fraction, std::uint64_t seed);

// Index-level core of stratified_split over integer class ids.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_indices(
    std::span<const std::size_t> classes, std::size_t n_classes, double test_fraction, std::uint64_t seed);

}  // namespace mixintent
