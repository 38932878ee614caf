#pragma once

// Grid runner: {classifier} x {encoder} macro-F1 tables plus a
// {recurrent cell} x {embedding} table, driven by a plain-text spec.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mixintent/classifiers.hpp"
#include "mixintent/dataset.hpp"
#include "mixintent/embeddings.hpp"
#include "mixintent/encoders.hpp"
#include "mixintent/recurrent.hpp"

namespace mixintent {

inline constexpr std::string_view kToolVersion = "0.1.0";

// Text access to the scalar fields of the config structs, in declaration
// order. Setting an unknown key throws ArgumentError naming it.
using FieldList = std::vector<std::pair<std::string, std::string>>;
FieldList config_fields(const TrainConfig& cfg);
FieldList config_fields(const SequenceConfig& cfg);
FieldList config_fields(const SgnsConfig& cfg);
void set_config_field(TrainConfig& cfg, std::string_view key, std::string_view value);
void set_config_field(SequenceConfig& cfg, std::string_view key, std::string_view value);
void set_config_field(SgnsConfig& cfg, std::string_view key, std::string_view value);

// Canonical text for a double: shortest form that round-trips.
std::string format_double(double v);

// One encoder column. Types: count, tfidf, count-lsa, tfidf-lsa, avg, idf-avg
// (embedding source sgns=DIM or file=PATH), sentence (file=PATH).
struct EncoderSpec {
  std::string name;
  std::string type;
  std::size_t min_df = 1;
  std::size_t k = 100;
  std::size_t sgns_dim = 0;  // 0 when the table comes from a file
  std::filesystem::path file;

  std::string to_text() const;
};

// `text` is the right-hand side of an [encoders] line, e.g. "count-lsa k=50".
EncoderSpec parse_encoder_spec(std::string name, std::string_view text, const std::filesystem::path& base_dir);
// Unfitted encoder for `spec`. SGNS tables are trained on `train` with
// sgns_table_seed(seed, dim); files are read from disk.
std::unique_ptr<Encoder> make_encoder(const EncoderSpec& spec, const LabeledDataset& train, const SgnsConfig& sgns,
                                      std::uint64_t seed);

struct ClassifierSpec {
  std::string name;
  ClassifierKind kind = ClassifierKind::LinearSvm;
  FieldList overrides;  // applied on top of GridSpec::train
};

// Word embeddings feeding the recurrent table: SGNS of a given width or a
// word file.
struct EmbeddingSource {
  std::string name;
  std::size_t sgns_dim = 0;
  std::filesystem::path file;

  std::string to_text() const;
};

struct GridSpec {
  // [data]: either a TSV path or the code-mix generator.
  std::filesystem::path data_path;
  std::uint64_t data_seed = 1;
  std::size_t per_intent = 200;
  double test_fraction = 0.2;
  // Verified when nonempty: whole dataset and the two halves of the split.
  std::string expected_digest, expected_train_digest, expected_test_digest;

  std::uint64_t seed = 0;  // [run]
  bool has_seed = false;

  SgnsConfig sgns;  // dim and seed are set per table
  TrainConfig train;
  SequenceConfig sequence;

  std::vector<EncoderSpec> encoders;
  std::vector<ClassifierSpec> classifiers;
  std::vector<CellKind> cells;
  std::vector<EmbeddingSource> embeddings;

  TrainConfig classifier_config(std::size_t row) const;
  // Canonical spec text; parsing it back gives an equivalent spec.
  std::string to_text() const;
};

// Paths in the spec are resolved against `base_dir`. Errors carry the line.
GridSpec parse_grid_spec_text(std::string_view text, const std::filesystem::path& base_dir);
GridSpec parse_grid_spec(const std::filesystem::path& path);

std::uint64_t cell_seed(std::uint64_t master, std::size_t row, std::size_t col);
std::uint64_t recurrent_cell_seed(std::uint64_t master, std::size_t row, std::size_t col);
std::uint64_t sgns_table_seed(std::uint64_t master, std::size_t dim);

LabeledDataset load_grid_dataset(const GridSpec& spec);
Split split_grid_dataset(const GridSpec& spec, const LabeledDataset& ds);

struct CellResult {
  bool ok = false;
  double macro_f1 = 0.0;
  std::string error;
  double seconds = 0.0;
};

struct ScoreTable {
  std::vector<std::string> rows, cols;
  std::vector<CellResult> cells;  // row-major

  CellResult& at(std::size_t r, std::size_t c) { return cells[r * cols.size() + c]; }
  const CellResult& at(std::size_t r, std::size_t c) const { return cells[r * cols.size() + c]; }
  // Header row plus one row per classifier; scores x100 with 2 decimals,
  // "FAILED" for failed cells.
  std::string to_tsv(std::string_view corner) const;
  std::string to_aligned(std::string_view title) const;
};

struct GridResult {
  ScoreTable classic, recurrent;
  std::string dataset_digest, train_digest, test_digest;
  double seconds = 0.0;
};

// Dataset problems abort before any cell runs; failures inside a cell are
// recorded in that cell. Results do not depend on `jobs`.
GridResult run_grid(const GridSpec& spec, std::size_t jobs = 1);

// results.tsv, recurrent.tsv, results.txt and manifest.cfg. Only the manifest
// carries wall times; it is itself a valid spec that reruns the grid.
void write_grid_outputs(const GridSpec& spec, const GridResult& result, const std::filesystem::path& out_dir);

// Stand-ins for pretrained external encoders: word vectors trained on an
// independent generated corpus, and sentence vectors (normalized mean of
// those word vectors) keyed by every text in `keys`.
struct StandinEmbeddings {
  EmbeddingTable words;
  SentenceVectorTable sentences;
};
StandinEmbeddings make_standin_embeddings(const LabeledDataset& keys, std::size_t dim, std::uint64_t seed);

}  // namespace mixintent
