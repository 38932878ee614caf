#include "mixintent/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <thread>
#include <type_traits>
#include <variant>

#include "mixintent/codemix.hpp"
#include "mixintent/encoders.hpp"
#include "mixintent/error.hpp"
#include "mixintent/log.hpp"
#include "mixintent/metrics.hpp"
#include "mixintent/rng.hpp"
#include "mixintent/text.hpp"

namespace mixintent {
namespace {

static_assert(std::is_same_v<std::uint64_t, std::size_t>, "seed fields share the size_t parser");

template <typename C>
struct Field {
  std::string_view name;
  std::variant<double C::*, std::size_t C::*, bool C::*> member;
};

const std::vector<Field<TrainConfig>>& train_fields() {
  using T = TrainConfig;
  static const std::vector<Field<T>> fields = {
      {"lambda", &T::lambda},
      {"seed", &T::seed},
      {"learning_rate", &T::learning_rate},
      {"lr_decay", &T::lr_decay},
      {"epochs", &T::epochs},
      {"gamma", &T::gamma},
      {"svm_c", &T::svm_c},
      {"smo_tolerance", &T::smo_tolerance},
      {"smo_max_passes", &T::smo_max_passes},
      {"logreg_iterations", &T::logreg_iterations},
      {"k", &T::k},
      {"trees", &T::trees},
      {"max_depth", &T::max_depth},
      {"min_samples_split", &T::min_samples_split},
      {"max_features", &T::max_features},
      {"bootstrap", &T::bootstrap},
      {"hidden1", &T::hidden1},
      {"hidden2", &T::hidden2},
      {"nn_learning_rate", &T::nn_learning_rate},
      {"nn_lr_decay", &T::nn_lr_decay},
      {"nn_momentum", &T::nn_momentum},
      {"nn_epochs", &T::nn_epochs},
      {"batch_size", &T::batch_size},
      {"patience", &T::patience},
      {"validation_fraction", &T::validation_fraction},
  };
  return fields;
}

const std::vector<Field<SequenceConfig>>& sequence_fields() {
  using T = SequenceConfig;
  static const std::vector<Field<T>> fields = {
      {"hidden", &T::hidden},
      {"layers", &T::layers},
      {"learning_rate", &T::learning_rate},
      {"clip_norm", &T::clip_norm},
      {"batch_size", &T::batch_size},
      {"max_epochs", &T::max_epochs},
      {"patience", &T::patience},
      {"validation_fraction", &T::validation_fraction},
      {"max_tokens", &T::max_tokens},
      {"seed", &T::seed},
  };
  return fields;
}

const std::vector<Field<SgnsConfig>>& sgns_fields() {
  using T = SgnsConfig;
  static const std::vector<Field<T>> fields = {
      {"dim", &T::dim},
      {"window", &T::window},
      {"negatives", &T::negatives},
      {"epochs", &T::epochs},
      {"learning_rate", &T::learning_rate},
      {"seed", &T::seed},
  };
  return fields;
}

double parse_double(std::string_view key, std::string_view s) {
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size() || !std::isfinite(v)) {
    throw ArgumentError("'" + std::string(key) + "' expects a number, got '" + std::string(s) + "'");
  }
  return v;
}

std::size_t parse_size(std::string_view key, std::string_view s) {
  std::size_t v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) {
    throw ArgumentError("'" + std::string(key) + "' expects a nonnegative integer, got '" + std::string(s) + "'");
  }
  return v;
}

bool parse_bool(std::string_view key, std::string_view s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ArgumentError("'" + std::string(key) + "' expects true or false, got '" + std::string(s) + "'");
}

template <typename C>
FieldList list_fields(const C& cfg, const std::vector<Field<C>>& fields) {
  FieldList out;
  for (const auto& f : fields) {
    std::string text = std::visit(
        [&](auto m) -> std::string {
          using V = std::remove_cvref_t<decltype(cfg.*m)>;
          if constexpr (std::is_same_v<V, double>) return format_double(cfg.*m);
          else if constexpr (std::is_same_v<V, bool>) return cfg.*m ? "true" : "false";
          else return std::to_string(cfg.*m);
        },
        f.member);
    out.emplace_back(std::string(f.name), std::move(text));
  }
  return out;
}

template <typename C>
void set_field(C& cfg, const std::vector<Field<C>>& fields, std::string_view key, std::string_view value) {
  for (const auto& f : fields) {
    if (f.name != key) continue;
    std::visit(
        [&](auto m) {
          using V = std::remove_cvref_t<decltype(cfg.*m)>;
          if constexpr (std::is_same_v<V, double>) cfg.*m = parse_double(key, value);
          else if constexpr (std::is_same_v<V, bool>) cfg.*m = parse_bool(key, value);
          else cfg.*m = parse_size(key, value);
        },
        f.member);
    return;
  }
  throw ArgumentError("unknown key '" + std::string(key) + "'");
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::pair<std::string, std::string> split_option(const std::string& word) {
  const auto eq = word.find('=');
  if (eq == std::string::npos || eq == 0) throw ArgumentError("expected key=value, got '" + word + "'");
  return {word.substr(0, eq), word.substr(eq + 1)};
}

std::filesystem::path resolve(const std::filesystem::path& base, std::string_view p) {
  const std::filesystem::path path{std::string(p)};
  return (path.is_absolute() ? path : base / path).lexically_normal();
}

bool is_word_type(const std::string& t) { return t == "avg" || t == "idf-avg"; }

EncoderSpec parse_encoder_impl(std::string name, std::string_view value, const std::filesystem::path& base) {
  const std::vector<std::string> w = words(value);
  if (w.empty()) throw ArgumentError("encoder '" + name + "' has no type");
  EncoderSpec e;
  e.name = std::move(name);
  e.type = w[0];
  static const std::set<std::string> types = {"count", "tfidf", "count-lsa", "tfidf-lsa", "avg", "idf-avg", "sentence"};
  if (!types.count(e.type)) throw ArgumentError("unknown encoder type '" + e.type + "'");
  for (std::size_t i = 1; i < w.size(); ++i) {
    const auto [k, v] = split_option(w[i]);
    if (k == "min_df" && !is_word_type(e.type) && e.type != "sentence") e.min_df = parse_size(k, v);
    else if (k == "k" && e.type.ends_with("-lsa")) e.k = parse_size(k, v);
    else if (k == "sgns" && is_word_type(e.type)) e.sgns_dim = parse_size(k, v);
    else if (k == "file" && (is_word_type(e.type) || e.type == "sentence")) e.file = resolve(base, v);
    else throw ArgumentError("unknown key '" + k + "' for encoder type " + e.type);
  }
  if (e.min_df == 0 || e.k == 0) throw ArgumentError("encoder '" + e.name + "': min_df and k must be positive");
  if (is_word_type(e.type) && (e.sgns_dim == 0) == e.file.empty()) {
    throw ArgumentError("encoder '" + e.name + "' needs exactly one of sgns=DIM or file=PATH");
  }
  if (e.type == "sentence" && e.file.empty()) throw ArgumentError("encoder '" + e.name + "' needs file=PATH");
  return e;
}

EmbeddingSource parse_embedding(std::string name, std::string_view value, const std::filesystem::path& base) {
  EmbeddingSource s;
  s.name = std::move(name);
  const std::vector<std::string> w = words(value);
  if (w.size() != 1) throw ArgumentError("embedding '" + s.name + "' expects sgns=DIM or file=PATH");
  const auto [k, v] = split_option(w[0]);
  if (k == "sgns") s.sgns_dim = parse_size(k, v);
  else if (k == "file") s.file = resolve(base, v);
  else throw ArgumentError("unknown key '" + k + "' for embedding '" + s.name + "'");
  if (s.file.empty() && s.sgns_dim == 0) throw ArgumentError("embedding '" + s.name + "': sgns width must be positive");
  return s;
}

void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t j = 0; j < jobs; ++j) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next++) < n;) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

double since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string format_score(const CellResult& c) {
  if (!c.ok) return "FAILED";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", c.macro_f1 * 100.0);
  return buf;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

FieldList config_fields(const TrainConfig& cfg) { return list_fields(cfg, train_fields()); }
FieldList config_fields(const SequenceConfig& cfg) { return list_fields(cfg, sequence_fields()); }
FieldList config_fields(const SgnsConfig& cfg) { return list_fields(cfg, sgns_fields()); }
void set_config_field(TrainConfig& cfg, std::string_view key, std::string_view value) {
  set_field(cfg, train_fields(), key, value);
}
void set_config_field(SequenceConfig& cfg, std::string_view key, std::string_view value) {
  set_field(cfg, sequence_fields(), key, value);
}
void set_config_field(SgnsConfig& cfg, std::string_view key, std::string_view value) {
  set_field(cfg, sgns_fields(), key, value);
}

EncoderSpec parse_encoder_spec(std::string name, std::string_view text, const std::filesystem::path& base_dir) {
  return parse_encoder_impl(std::move(name), text, base_dir);
}

std::unique_ptr<Encoder> make_encoder(const EncoderSpec& e, const LabeledDataset& train, const SgnsConfig& sgns,
                                      std::uint64_t seed) {
  if (e.type == "count") return std::make_unique<CountEncoder>(e.min_df);
  if (e.type == "tfidf") return std::make_unique<TfidfEncoder>(e.min_df);
  if (e.type == "count-lsa") return std::make_unique<LsaEncoder>(std::make_unique<CountEncoder>(e.min_df), e.k);
  if (e.type == "tfidf-lsa") return std::make_unique<LsaEncoder>(std::make_unique<TfidfEncoder>(e.min_df), e.k);
  if (e.type == "sentence") {
    return std::make_unique<SentenceVectorEncoder>(std::make_shared<const SentenceVectorTable>(load_sentence_vectors(e.file)));
  }
  std::shared_ptr<const EmbeddingTable> table;
  if (e.sgns_dim > 0) {
    SgnsConfig cfg = sgns;
    cfg.dim = e.sgns_dim;
    cfg.seed = sgns_table_seed(seed, e.sgns_dim);
    table = std::make_shared<const EmbeddingTable>(sgns_train(train, cfg).table);
  } else {
    table = std::make_shared<const EmbeddingTable>(load_word_embeddings(e.file));
  }
  return std::make_unique<EmbeddingAverageEncoder>(std::move(table), e.type == "idf-avg");
}

std::string EncoderSpec::to_text() const {
  std::string out = type;
  if (type == "count" || type.ends_with("-lsa") || type == "tfidf") out += " min_df=" + std::to_string(min_df);
  if (type.ends_with("-lsa")) out += " k=" + std::to_string(k);
  if (sgns_dim > 0) out += " sgns=" + std::to_string(sgns_dim);
  if (!file.empty()) out += " file=" + file.string();
  return out;
}

std::string EmbeddingSource::to_text() const {
  return sgns_dim > 0 ? "sgns=" + std::to_string(sgns_dim) : "file=" + file.string();
}

TrainConfig GridSpec::classifier_config(std::size_t row) const {
  TrainConfig cfg = train;
  for (const auto& [k, v] : classifiers.at(row).overrides) set_config_field(cfg, k, v);
  return cfg;
}

std::string GridSpec::to_text() const {
  std::ostringstream out;
  out << "[data]\n";
  if (data_path.empty()) {
    out << "generator = codemix\ndata_seed = " << data_seed << "\nper_intent = " << per_intent << '\n';
  } else {
    out << "path = " << data_path.string() << '\n';
  }
  out << "test_fraction = " << format_double(test_fraction) << '\n';
  if (!expected_digest.empty()) out << "digest = " << expected_digest << '\n';
  if (!expected_train_digest.empty()) out << "train_digest = " << expected_train_digest << '\n';
  if (!expected_test_digest.empty()) out << "test_digest = " << expected_test_digest << '\n';

  out << "\n[run]\nseed = " << seed << "\nversion = " << kToolVersion << '\n';
  out << "\n[sgns]\n";
  for (const auto& [k, v] : config_fields(sgns)) {
    if (k != "dim" && k != "seed") out << k << " = " << v << '\n';
  }
  out << "\n[train]\n";
  for (const auto& [k, v] : config_fields(train)) {
    if (k != "seed") out << k << " = " << v << '\n';
  }
  out << "\n[encoders]\n";
  for (const EncoderSpec& e : encoders) out << e.name << " = " << e.to_text() << '\n';
  out << "\n[classifiers]\n";
  for (const ClassifierSpec& c : classifiers) {
    out << c.name << " = " << classifier_name(c.kind);
    for (const auto& [k, v] : c.overrides) out << ' ' << k << '=' << v;
    out << '\n';
  }
  out << "\n[recurrent]\n";
  if (!cells.empty()) {
    out << "cells =";
    for (CellKind k : cells) out << ' ' << cell_name(k);
    out << '\n';
  }
  for (const auto& [k, v] : config_fields(sequence)) {
    if (k != "seed") out << k << " = " << v << '\n';
  }
  for (const EmbeddingSource& e : embeddings) out << "embedding." << e.name << " = " << e.to_text() << '\n';
  return out.str();
}

GridSpec parse_grid_spec_text(std::string_view text, const std::filesystem::path& base_dir) {
  GridSpec spec;
  std::string section;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  bool generator = false;
  std::istringstream in{std::string(text)};
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    std::string_view line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    try {
      if (line.front() == '[') {
        if (line.back() != ']') throw ArgumentError("unterminated section header");
        section = std::string(trim(line.substr(1, line.size() - 2)));
        static const std::set<std::string> known = {"data", "run", "sgns", "train", "encoders", "classifiers",
                                                    "recurrent", "timing"};
        if (!known.count(section)) throw ArgumentError("unknown section [" + section + "]");
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) throw ArgumentError("expected key = value");
      const std::string key(trim(line.substr(0, eq)));
      const std::string_view value = trim(line.substr(eq + 1));
      if (key.empty()) throw ArgumentError("empty key");
      if (section.empty()) throw ArgumentError("key '" + key + "' outside any section");
      if (section == "timing") continue;
      if (!seen.insert(section + "." + key).second) throw ArgumentError("duplicate key '" + key + "'");

      if (section == "data") {
        if (key == "path") spec.data_path = resolve(base_dir, value);
        else if (key == "generator") {
          if (value != "codemix") throw ArgumentError("unknown generator '" + std::string(value) + "'");
          generator = true;
        } else if (key == "data_seed") spec.data_seed = parse_size(key, value);
        else if (key == "per_intent") spec.per_intent = parse_size(key, value);
        else if (key == "test_fraction") spec.test_fraction = parse_double(key, value);
        else if (key == "digest") spec.expected_digest = value;
        else if (key == "train_digest") spec.expected_train_digest = value;
        else if (key == "test_digest") spec.expected_test_digest = value;
        else throw ArgumentError("unknown key '" + key + "' in [data]");
      } else if (section == "run") {
        if (key == "seed") {
          spec.seed = parse_size(key, value);
          spec.has_seed = true;
        } else if (key == "version") {
          if (value != kToolVersion) log_warning("spec written by version " + std::string(value));
        } else {
          throw ArgumentError("unknown key '" + key + "' in [run]");
        }
      } else if (section == "sgns" || section == "train") {
        if (key == "seed" || (section == "sgns" && key == "dim")) {
          throw ArgumentError("key '" + key + "' is derived per table or cell and cannot be set in [" + section + "]");
        }
        if (section == "sgns") set_config_field(spec.sgns, key, value);
        else set_config_field(spec.train, key, value);
      } else if (section == "encoders") {
        spec.encoders.push_back(parse_encoder_impl(key, value, base_dir));
      } else if (section == "classifiers") {
        const std::vector<std::string> w = words(value);
        if (w.empty()) throw ArgumentError("classifier '" + key + "' has no kind");
        ClassifierSpec c{key, parse_classifier_kind(w[0]), {}};
        TrainConfig probe;
        for (std::size_t i = 1; i < w.size(); ++i) {
          auto opt = split_option(w[i]);
          if (opt.first == "seed") throw ArgumentError("key 'seed' is derived per cell");
          set_config_field(probe, opt.first, opt.second);
          c.overrides.push_back(std::move(opt));
        }
        spec.classifiers.push_back(std::move(c));
      } else {  // recurrent
        if (key == "cells") {
          for (const std::string& w : words(value)) spec.cells.push_back(parse_cell_kind(w));
        } else if (key.starts_with("embedding.")) {
          spec.embeddings.push_back(parse_embedding(key.substr(10), value, base_dir));
        } else if (key == "seed") {
          throw ArgumentError("key 'seed' is derived per cell and cannot be set in [recurrent]");
        } else {
          set_config_field(spec.sequence, key, value);
        }
      }
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  if (!spec.has_seed) throw ParseError("seed required");
  if (generator == !spec.data_path.empty()) throw ParseError("[data] needs exactly one of path or generator");
  if (spec.encoders.empty() != spec.classifiers.empty()) {
    throw ParseError("[encoders] and [classifiers] must both be nonempty or both empty");
  }
  if (spec.cells.empty() != spec.embeddings.empty()) {
    throw ParseError("[recurrent] needs both cells and at least one embedding, or neither");
  }
  if (spec.encoders.empty() && spec.cells.empty()) throw ParseError("grid has no cells");
  if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0)) throw ParseError("test_fraction must lie in (0, 1)");
  try {
    spec.train.validate();
    spec.sequence.validate();
    for (std::size_t r = 0; r < spec.classifiers.size(); ++r) spec.classifier_config(r).validate();
  } catch (const Error& e) {
    throw ParseError(e.what());
  }
  return spec;
}

GridSpec parse_grid_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read grid spec " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_grid_spec_text(text.str(), std::filesystem::absolute(path).parent_path());
}

std::uint64_t cell_seed(std::uint64_t master, std::size_t row, std::size_t col) {
  return mix_seed(mix_seed(master, row), col);
}

std::uint64_t recurrent_cell_seed(std::uint64_t master, std::size_t row, std::size_t col) {
  return cell_seed(mix_seed(master, "recurrent"), row, col);
}

std::uint64_t sgns_table_seed(std::uint64_t master, std::size_t dim) { return mix_seed(mix_seed(master, "sgns"), dim); }

LabeledDataset load_grid_dataset(const GridSpec& spec) {
  LabeledDataset ds = spec.data_path.empty() ? generate_codemix(spec.data_seed, spec.per_intent)
                                             : load_dataset(spec.data_path);
  if (ds.size() < 2) throw DataError("grid dataset has fewer than two records");
  if (!spec.expected_digest.empty() && dataset_digest(ds) != spec.expected_digest) {
    throw DataError("dataset digest " + dataset_digest(ds) + " does not match the spec's " + spec.expected_digest);
  }
  return ds;
}

Split split_grid_dataset(const GridSpec& spec, const LabeledDataset& ds) {
  return stratified_split(ds, spec.test_fraction, mix_seed(spec.seed, "split"));
}

std::string ScoreTable::to_tsv(std::string_view corner) const {
  std::string out(corner);
  for (const auto& c : cols) out += "\t" + c;
  out += '\n';
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out += rows[r];
    for (std::size_t c = 0; c < cols.size(); ++c) out += "\t" + format_score(at(r, c));
    out += '\n';
  }
  return out;
}

std::string ScoreTable::to_aligned(std::string_view title) const {
  std::size_t first = 0;
  for (const auto& r : rows) first = std::max(first, r.size());
  std::vector<std::size_t> width;
  for (const auto& c : cols) width.push_back(std::max<std::size_t>(c.size(), 6));
  auto pad = [](const std::string& s, std::size_t w, bool left) {
    const std::string fill(w > s.size() ? w - s.size() : 0, ' ');
    return left ? s + fill : fill + s;
  };
  std::string out = std::string(title) + "\n" + std::string(first, ' ');
  for (std::size_t c = 0; c < cols.size(); ++c) out += "  " + pad(cols[c], width[c], false);
  out += '\n';
  std::string failures;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out += pad(rows[r], first, true);
    for (std::size_t c = 0; c < cols.size(); ++c) {
      out += "  " + pad(format_score(at(r, c)), width[c], false);
      if (!at(r, c).ok) failures += "  " + rows[r] + " x " + cols[c] + ": " + at(r, c).error + "\n";
    }
    out += '\n';
  }
  if (!failures.empty()) out += "failed cells:\n" + failures;
  return out;
}

namespace {

struct Column {
  Matrix train, test;
  std::string error;
};

// Builds every word table the grid needs: SGNS tables by width (trained on
// the train split) and word files by path.
struct TableCache {
  std::map<std::size_t, std::shared_ptr<const EmbeddingTable>> sgns;
  std::map<std::filesystem::path, std::shared_ptr<const EmbeddingTable>> words;
  std::map<std::filesystem::path, std::shared_ptr<const SentenceVectorTable>> sentences;
  std::map<std::string, std::string> errors;  // "sgns:25" or path -> message

  std::shared_ptr<const EmbeddingTable> word_table(std::size_t dim, const std::filesystem::path& file) const {
    const std::string key = dim > 0 ? "sgns:" + std::to_string(dim) : file.string();
    if (auto it = errors.find(key); it != errors.end()) throw DataError(it->second);
    return dim > 0 ? sgns.at(dim) : words.at(file);
  }
};

TableCache build_tables(const GridSpec& spec, const LabeledDataset& train, std::size_t jobs) {
  std::set<std::size_t> dims;
  std::set<std::filesystem::path> word_files, sentence_files;
  for (const EncoderSpec& e : spec.encoders) {
    if (e.sgns_dim > 0) dims.insert(e.sgns_dim);
    if (!e.file.empty()) (e.type == "sentence" ? sentence_files : word_files).insert(e.file);
  }
  for (const EmbeddingSource& s : spec.embeddings) {
    if (s.sgns_dim > 0) dims.insert(s.sgns_dim);
    else word_files.insert(s.file);
  }
  TableCache cache;
  const std::vector<std::size_t> dim_list(dims.begin(), dims.end());
  std::vector<std::shared_ptr<const EmbeddingTable>> built(dim_list.size());
  std::vector<std::string> errs(dim_list.size());
  parallel_for(dim_list.size(), jobs, [&](std::size_t i) {
    try {
      SgnsConfig cfg = spec.sgns;
      cfg.dim = dim_list[i];
      cfg.seed = sgns_table_seed(spec.seed, cfg.dim);
      built[i] = std::make_shared<const EmbeddingTable>(sgns_train(train, cfg).table);
    } catch (const std::exception& e) {
      errs[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < dim_list.size(); ++i) {
    if (built[i]) cache.sgns[dim_list[i]] = built[i];
    else cache.errors["sgns:" + std::to_string(dim_list[i])] = errs[i];
  }
  for (const auto& f : word_files) {
    try {
      cache.words[f] = std::make_shared<const EmbeddingTable>(load_word_embeddings(f));
    } catch (const std::exception& e) {
      cache.errors[f.string()] = e.what();
    }
  }
  for (const auto& f : sentence_files) {
    try {
      cache.sentences[f] = std::make_shared<const SentenceVectorTable>(load_sentence_vectors(f));
    } catch (const std::exception& e) {
      cache.errors[f.string()] = e.what();
    }
  }
  return cache;
}

std::unique_ptr<Encoder> make_grid_encoder(const EncoderSpec& e, const TableCache& tables) {
  if (e.type == "count") return std::make_unique<CountEncoder>(e.min_df);
  if (e.type == "tfidf") return std::make_unique<TfidfEncoder>(e.min_df);
  if (e.type == "count-lsa") return std::make_unique<LsaEncoder>(std::make_unique<CountEncoder>(e.min_df), e.k);
  if (e.type == "tfidf-lsa") return std::make_unique<LsaEncoder>(std::make_unique<TfidfEncoder>(e.min_df), e.k);
  if (e.type == "sentence") {
    if (auto it = tables.errors.find(e.file.string()); it != tables.errors.end()) throw DataError(it->second);
    return std::make_unique<SentenceVectorEncoder>(tables.sentences.at(e.file));
  }
  return std::make_unique<EmbeddingAverageEncoder>(tables.word_table(e.sgns_dim, e.file), e.type == "idf-avg");
}

template <typename Predict>
double score_test(const LabeledDataset& test, const std::vector<std::string>& labels, Predict&& predict) {
  std::vector<std::string> preds, golds;
  preds.reserve(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) {
    preds.push_back(predict(i));
    golds.push_back(test[i].label);
  }
  return evaluate(preds, golds, labels).macro_f1;
}

}  // namespace

GridResult run_grid(const GridSpec& spec, std::size_t jobs) {
  const auto start = std::chrono::steady_clock::now();
  GridResult result;
  const LabeledDataset ds = load_grid_dataset(spec);
  const Split split = split_grid_dataset(spec, ds);
  if (split.train.empty() || split.test.empty()) throw DataError("split left an empty train or test half");
  result.dataset_digest = dataset_digest(ds);
  result.train_digest = dataset_digest(split.train);
  result.test_digest = dataset_digest(split.test);
  {
    std::vector<std::size_t> a = split.train_indices, b = split.test_indices;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::vector<std::size_t> both;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both));
    if (!both.empty()) throw DataError("train and test splits overlap");
  }
  if (!spec.expected_train_digest.empty() && spec.expected_train_digest != result.train_digest) {
    throw DataError("train split digest does not match the spec");
  }
  if (!spec.expected_test_digest.empty() && spec.expected_test_digest != result.test_digest) {
    throw DataError("test split digest does not match the spec");
  }
  const std::vector<std::string>& labels = ds.labels();
  const std::vector<std::size_t> y_train = split.train.label_indices();

  // Everything below sees only the train half until prediction time.
  const TableCache tables = build_tables(spec, split.train, jobs);
  if (dataset_digest(split.train) != result.train_digest) throw DataError("train split changed during fitting");

  const std::size_t n_cols = spec.encoders.size();
  std::vector<Column> columns(n_cols);
  parallel_for(n_cols, jobs, [&](std::size_t c) {
    try {
      auto enc = make_grid_encoder(spec.encoders[c], tables);
      enc->fit(split.train);
      columns[c].train = encode_all(*enc, split.train);
      columns[c].test = encode_all(*enc, split.test);
    } catch (const std::exception& e) {
      columns[c].error = std::string("encoder: ") + e.what();
    }
  });

  ScoreTable& classic = result.classic;
  for (const ClassifierSpec& c : spec.classifiers) classic.rows.push_back(c.name);
  for (const EncoderSpec& e : spec.encoders) classic.cols.push_back(e.name);
  classic.cells.resize(classic.rows.size() * n_cols);
  parallel_for(classic.cells.size(), jobs, [&](std::size_t i) {
    const std::size_t r = i / n_cols, c = i % n_cols;
    CellResult& cell = classic.cells[i];
    const auto t0 = std::chrono::steady_clock::now();
    try {
      if (!columns[c].error.empty()) throw DataError(columns[c].error);
      TrainConfig cfg = spec.classifier_config(r);
      cfg.seed = cell_seed(spec.seed, r, c);
      const auto model = train_classifier(spec.classifiers[r].kind, columns[c].train, y_train, labels, cfg);
      cell.macro_f1 = score_test(split.test, labels, [&](std::size_t k) { return model->predict(columns[c].test.row(k)); });
      cell.ok = true;
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
    cell.seconds = since(t0);
    log_info(classic.rows[r] + " x " + classic.cols[c] + ": " + format_score(cell) +
             (cell.ok ? "" : " (" + cell.error + ")"));
  });

  ScoreTable& rec = result.recurrent;
  for (CellKind k : spec.cells) rec.rows.push_back(cell_name(k));
  for (const EmbeddingSource& e : spec.embeddings) rec.cols.push_back(e.name);
  const std::size_t n_emb = rec.cols.size();
  rec.cells.resize(rec.rows.size() * n_emb);
  parallel_for(rec.cells.size(), jobs, [&](std::size_t i) {
    const std::size_t r = i / n_emb, c = i % n_emb;
    CellResult& cell = rec.cells[i];
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const EmbeddingSource& src = spec.embeddings[c];
      SequenceConfig cfg = spec.sequence;
      cfg.seed = recurrent_cell_seed(spec.seed, r, c);
      const auto trained = train_sequence_model(spec.cells[r], split.train, tables.word_table(src.sgns_dim, src.file), cfg);
      cell.macro_f1 =
          score_test(split.test, labels, [&](std::size_t k) { return trained.model.predict(split.test[k].utterance); });
      cell.ok = true;
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
    cell.seconds = since(t0);
    log_info(rec.rows[r] + " x " + rec.cols[c] + ": " + format_score(cell) + (cell.ok ? "" : " (" + cell.error + ")"));
  });
  result.seconds = since(start);
  return result;
}

void write_grid_outputs(const GridSpec& spec, const GridResult& result, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream out(out_dir / name, std::ios::binary);
    out << text;
    if (!out) throw DataError("cannot write " + (out_dir / name).string());
  };
  write("results.tsv", result.classic.to_tsv("classifier"));
  write("recurrent.tsv", result.recurrent.to_tsv("cell"));
  std::string table;
  if (!result.classic.rows.empty()) table += result.classic.to_aligned("Macro-F1 x100, classifier x encoder");
  if (!result.recurrent.rows.empty()) {
    if (!table.empty()) table += '\n';
    table += result.recurrent.to_aligned("Macro-F1 x100, recurrent cell x embedding");
  }
  write("results.txt", table);

  GridSpec pinned = spec;
  pinned.expected_digest = result.dataset_digest;
  pinned.expected_train_digest = result.train_digest;
  pinned.expected_test_digest = result.test_digest;
  std::ostringstream m;
  m << pinned.to_text() << "\n[timing]\ntotal_seconds = " << format_double(result.seconds) << '\n';
  auto times = [&](const ScoreTable& t, std::string_view prefix) {
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      for (std::size_t c = 0; c < t.cols.size(); ++c) {
        m << prefix << t.rows[r] << '.' << t.cols[c] << " = " << format_double(t.at(r, c).seconds) << '\n';
      }
    }
  };
  times(result.classic, "cell.");
  times(result.recurrent, "recurrent.");
  write("manifest.cfg", m.str());
}

StandinEmbeddings make_standin_embeddings(const LabeledDataset& keys, std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw ArgumentError("stand-in embedding width must be positive");
  const LabeledDataset corpus = generate_codemix(mix_seed(seed, "standin-corpus"), 300);
  SgnsConfig cfg;
  cfg.dim = dim;
  cfg.seed = mix_seed(seed, "standin-sgns");
  EmbeddingTable words = sgns_train(corpus, cfg).table;

  std::vector<std::string> texts;
  Matrix vectors(keys.size(), dim);
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const Utterance& u = keys[i].utterance;
    texts.push_back(u.text);
    const DenseVector v = avg_encode(u, words);
    const double n = norm(v);
    if (n > 0.0) {
      for (std::size_t j = 0; j < dim; ++j) vectors(i, j) = v[j] / n;
    }
  }
  return {std::move(words), SentenceVectorTable(std::move(texts), std::move(vectors))};
}

}  // namespace mixintent
