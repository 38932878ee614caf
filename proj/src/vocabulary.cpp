#include "mixintent/vocabulary.hpp"

#include <unordered_set>

#include "mixintent/error.hpp"

namespace mixintent {

std::optional<std::size_t> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Vocabulary Vocabulary::from_parts(std::vector<std::string> tokens, std::vector<std::size_t> df, std::size_t n_docs) {
  if (tokens.size() != df.size()) throw DimensionError("vocabulary token/df length mismatch");
  Vocabulary v;
  v.n_docs_ = n_docs;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (df[i] < 1 || df[i] > n_docs) throw ArgumentError("document frequency out of range for '" + tokens[i] + "'");
    if (!v.index_.emplace(tokens[i], i).second) throw ArgumentError("duplicate vocabulary token '" + tokens[i] + "'");
  }
  v.tokens_ = std::move(tokens);
  v.df_ = std::move(df);
  return v;
}

Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& docs, std::size_t min_df) {
  if (min_df == 0) throw ArgumentError("min_df must be positive");
  std::vector<std::string> order;
  std::unordered_map<std::string, std::size_t> counts;
  std::unordered_set<std::string_view> seen;
  for (const auto& doc : docs) {
    seen.clear();
    for (const std::string& t : doc) {
      if (!seen.insert(t).second) continue;
      auto [it, inserted] = counts.emplace(t, 0);
      if (inserted) order.push_back(t);
      ++it->second;
    }
  }
  Vocabulary v;
  v.n_docs_ = docs.size();
  for (const std::string& t : order) {
    const std::size_t df = counts[t];
    if (df < min_df) continue;
    v.index_.emplace(t, v.tokens_.size());
    v.tokens_.push_back(t);
    v.df_.push_back(df);
  }
  return v;
}

Vocabulary build_vocabulary(const LabeledDataset& ds, std::size_t min_df) {
  return build_vocabulary(ds.token_sequences(), min_df);
}

}  // namespace mixintent
