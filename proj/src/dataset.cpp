#include "mixintent/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>

#include "mixintent/error.hpp"
#include "mixintent/rng.hpp"
#include "mixintent/text.hpp"

namespace mixintent {

Utterance::Utterance(std::string t) : text(std::move(t)), tokens(tokenize(text)) {}

LabeledDataset::LabeledDataset(std::vector<Record> records) : records_(std::move(records)) {
  std::set<std::string> distinct;
  for (const Record& r : records_) distinct.insert(r.label);
  labels_.assign(distinct.begin(), distinct.end());
}

LabeledDataset::LabeledDataset(std::vector<Record> records, std::vector<std::string> labels)
    : records_(std::move(records)), labels_(std::move(labels)) {
  std::sort(labels_.begin(), labels_.end());
  labels_.erase(std::unique(labels_.begin(), labels_.end()), labels_.end());
  for (const Record& r : records_) {
    if (!std::binary_search(labels_.begin(), labels_.end(), r.label)) {
      throw ArgumentError("record label '" + r.label + "' missing from the label set");
    }
  }
}

void LabeledDataset::add(std::string label, std::string text) {
  auto pos = std::lower_bound(labels_.begin(), labels_.end(), label);
  if (pos == labels_.end() || *pos != label) labels_.insert(pos, label);
  records_.push_back({Utterance(std::move(text)), std::move(label)});
}

std::size_t LabeledDataset::label_index(std::string_view label) const {
  auto pos = std::lower_bound(labels_.begin(), labels_.end(), label);
  if (pos == labels_.end() || *pos != label) throw ArgumentError("unknown label '" + std::string(label) + "'");
  return static_cast<std::size_t>(pos - labels_.begin());
}

std::vector<std::size_t> LabeledDataset::label_indices() const {
  std::vector<std::size_t> out;
  out.reserve(records_.size());
  for (const Record& r : records_) out.push_back(label_index(r.label));
  return out;
}

std::vector<std::vector<std::string>> LabeledDataset::token_sequences() const {
  std::vector<std::vector<std::string>> out;
  out.reserve(records_.size());
  for (const Record& r : records_) out.push_back(r.utterance.tokens);
  return out;
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices) const {
  std::vector<Record> picked;
  picked.reserve(indices.size());
  for (std::size_t i : indices) picked.push_back(records_.at(i));
  LabeledDataset out;
  out.records_ = std::move(picked);
  out.labels_ = labels_;
  return out;
}

LabeledDataset read_dataset(std::istream& in) {
  std::vector<Record> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError("missing tab between label and text", line_no);
    if (tab == 0) throw ParseError("empty label", line_no);
    records.push_back({Utterance(line.substr(tab + 1)), line.substr(0, tab)});
  }
  if (records.empty()) throw DataError("dataset is empty");
  return LabeledDataset(std::move(records));
}

LabeledDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset " + path.string());
  try {
    return read_dataset(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_dataset(const LabeledDataset& ds, std::ostream& out) {
  for (const Record& r : ds.records()) out << r.label << '\t' << r.utterance.text << '\n';
}

void save_dataset(const LabeledDataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write dataset " + path.string());
  write_dataset(ds, out);
}

std::string dataset_digest(const LabeledDataset& ds) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  auto feed = [&h](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001B3ULL;
    }
  };
  for (const Record& r : ds.records()) {
    feed(r.label);
    feed("\t");
    feed(r.utterance.text);
    feed("\n");
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {
std::size_t round_half_up(double x) { return static_cast<std::size_t>(std::floor(x + 0.5)); }
}  // namespace

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_indices(
    std::span<const std::size_t> classes, std::size_t n_classes, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) {
    throw ArgumentError("test fraction must lie in [0, 1), got " + std::to_string(test_fraction));
  }
  std::vector<std::vector<std::size_t>> members(n_classes);
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (classes[i] >= n_classes) throw ArgumentError("class id out of range");
    members[classes[i]].push_back(i);
  }

  std::vector<std::size_t> n_test(n_classes);
  std::size_t total = 0;
  for (std::size_t c = 0; c < n_classes; ++c) {
    n_test[c] = round_half_up(static_cast<double>(members[c].size()) * test_fraction);
    total += n_test[c];
  }
  const std::size_t target = round_half_up(static_cast<double>(classes.size()) * test_fraction);
  if (total != target) {
    std::vector<std::size_t> by_size(n_classes);
    std::iota(by_size.begin(), by_size.end(), 0);
    std::stable_sort(by_size.begin(), by_size.end(),
                     [&](std::size_t a, std::size_t b) { return members[a].size() > members[b].size(); });
    // One record per class per round, largest first, until the total matches.
    for (std::size_t k = 0; total != target && k < 4 * n_classes * n_classes + 4; ++k) {
      const std::size_t c = by_size[k % n_classes];
      if (total < target && n_test[c] < members[c].size()) {
        ++n_test[c];
        ++total;
      } else if (total > target && n_test[c] > 0) {
        --n_test[c];
        --total;
      }
    }
  }

  const RngStream root(seed);
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  for (std::size_t c = 0; c < n_classes; ++c) {
    std::vector<std::size_t>& m = members[c];
    RngStream rng = root.derive(static_cast<std::uint64_t>(c));
    rng.shuffle(std::span<std::size_t>(m));
    test.insert(test.end(), m.begin(), m.begin() + static_cast<std::ptrdiff_t>(n_test[c]));
    train.insert(train.end(), m.begin() + static_cast<std::ptrdiff_t>(n_test[c]), m.end());
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {std::move(train), std::move(test)};
}

Split stratified_split(const LabeledDataset& ds, double test_fraction, std::uint64_t seed) {
  const std::vector<std::size_t> classes = ds.label_indices();
  auto [train, test] = stratified_indices(classes, ds.labels().size(), test_fraction, seed);
  Split out;
  out.train = ds.subset(train);
  out.test = ds.subset(test);
  out.train_indices = std::move(train);
  out.test_indices = std::move(test);
  return out;
}

}  // namespace mixintent
