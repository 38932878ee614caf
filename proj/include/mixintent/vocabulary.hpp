#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mixintent/dataset.hpp"

namespace mixintent {

// Token -> dense index in first-occurrence order, with document frequencies.
class Vocabulary {
 public:
  Vocabulary() = default;

  std::size_t size() const noexcept { return tokens_.size(); }
  bool empty() const noexcept { return tokens_.empty(); }
  std::size_t n_docs() const noexcept { return n_docs_; }

  std::optional<std::size_t> find(std::string_view token) const;
  const std::string& token(std::size_t index) const { return tokens_.at(index); }
  std::size_t df(std::size_t index) const { return df_.at(index); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  // Rebuild from stored parts (persistence). Validates the df invariant.
  static Vocabulary from_parts(std::vector<std::string> tokens, std::vector<std::size_t> df, std::size_t n_docs);

  bool operator==(const Vocabulary& other) const {
    return tokens_ == other.tokens_ && df_ == other.df_ && n_docs_ == other.n_docs_;
  }

 private:
  friend Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>&, std::size_t);

  std::vector<std::string> tokens_;
  std::vector<std::size_t> df_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t n_docs_ = 0;
};

// Tokens whose document frequency reaches min_df; df counts a document once per token.
Vocabulary build_vocabulary(const LabeledDataset& ds, std::size_t min_df = 1);
Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& docs, std::size_t min_df = 1);

}  // namespace mixintent
