#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "mixintent/archive.hpp"
#include "mixintent/classifiers.hpp"
#include "mixintent/codemix.hpp"
#include "mixintent/embeddings.hpp"
#include "mixintent/encoders.hpp"
#include "mixintent/error.hpp"
#include "mixintent/harness.hpp"
#include "mixintent/log.hpp"
#include "mixintent/metrics.hpp"
#include "mixintent/recurrent.hpp"

namespace mixintent {
namespace {

namespace fs = std::filesystem;

int exit_code(const std::exception& e) {
  if (dynamic_cast<const ArgumentError*>(&e) || dynamic_cast<const DimensionError*>(&e)) return 1;
  if (dynamic_cast<const ConvergenceError*>(&e) || dynamic_cast<const DegenerateError*>(&e) ||
      dynamic_cast<const NumericError*>(&e)) {
    return 3;
  }
  return 2;
}

std::pair<std::string, std::string> key_value(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) throw ArgumentError("--set expects key=value, got '" + s + "'");
  return {s.substr(0, eq), s.substr(eq + 1)};
}

// A trained model file: either an encoder followed by a classifier, or a
// recurrent sequence model.
struct LoadedModel {
  std::unique_ptr<Encoder> encoder;
  std::unique_ptr<Classifier> classifier;
  std::unique_ptr<SequenceModel> sequence;

  const std::string& predict(const Utterance& u) const {
    if (sequence) return sequence->predict(u);
    const DenseVector x = to_dense(encoder->encode(u));
    return classifier->predict(x);
  }
  const std::vector<std::string>& labels() const { return sequence ? sequence->labels() : classifier->labels(); }
};

LoadedModel load_model(const fs::path& path) {
  std::ifstream file(path);
  if (!file) throw DataError("cannot read model " + path.string());
  ArchiveReader in(file);
  LoadedModel m;
  const std::string kind = in.read_string("model");
  if (kind == "pipeline") {
    m.encoder = load_encoder(in);
    m.classifier = load_classifier(in);
  } else if (kind == "sequence") {
    m.sequence = std::make_unique<SequenceModel>(SequenceModel::load(in));
  } else {
    throw ParseError("unknown model kind '" + kind + "'");
  }
  return m;
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw DataError("cannot write " + path.string());
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Intent detection toolkit: encoders, classifiers, recurrent models and grid runs", "mixintent"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));
  bool quiet = false, verbose = false;
  app.add_flag("-q,--quiet", quiet, "Only print errors");
  app.add_flag("-v,--verbose", verbose, "Log progress lines");

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Generate the synthetic code-mix intent corpus as TSV");
  std::uint64_t gen_seed = 1;
  std::size_t per_intent = 200;
  std::string gen_out = "codemix.tsv";
  gen->add_option("--seed", gen_seed, "Generator seed");
  gen->add_option("--per-intent", per_intent, "Records per intent");
  gen->add_option("--out", gen_out, "Output TSV");

  // embed
  auto* embed = app.add_subcommand("embed", "Train skip-gram word vectors, or write stand-in external files");
  std::string embed_data = "codemix.tsv", embed_out = "words.txt", sentences_out = "sentences.txt";
  SgnsConfig sgns;
  bool standin = false;
  embed->add_option("--data", embed_data, "Training TSV (keys of the sentence file with --standin)");
  embed->add_option("--dim", sgns.dim, "Vector width");
  embed->add_option("--window", sgns.window, "Context window");
  embed->add_option("--negatives", sgns.negatives, "Negative samples per pair");
  embed->add_option("--epochs", sgns.epochs, "Passes over the corpus");
  embed->add_option("--lr", sgns.learning_rate, "Initial learning rate");
  embed->add_option("--seed", sgns.seed, "Seed");
  embed->add_option("--out", embed_out, "Word vector file");
  embed->add_flag("--standin", standin,
                  "Write stand-ins for pretrained external encoders: word vectors from an independent corpus "
                  "and a sentence file keyed by every text in --data");
  embed->add_option("--sentences-out", sentences_out, "Sentence vector file written with --standin");

  // train
  auto* train = app.add_subcommand("train", "Fit one encoder and classifier (or one recurrent model) and save it");
  std::string train_data = "codemix.tsv", encoder_text = "tfidf", classifier_text = "LinearSVM", model_out = "model.mdl";
  std::string recurrent_text, embeddings_path;
  std::uint64_t train_seed = 1;
  std::vector<std::string> overrides;
  train->add_option("--data", train_data, "Training TSV");
  train->add_option("--encoder", encoder_text, "Encoder spec, e.g. \"count-lsa k=50\" or \"avg sgns=25\"");
  train->add_option("--classifier", classifier_text,
                    "LinearSVM, SVM, LogisticRegression, KNeighbors, DecisionTree, RandomForest, NeuralNetwork "
                    "or CosineSimilarity");
  train->add_option("--recurrent", recurrent_text, "RNN, GRU or LSTM; replaces --encoder/--classifier")
      ->default_str("none");
  train->add_option("--embeddings", embeddings_path, "Word vector file for --recurrent")->default_str("none");
  train->add_option("--seed", train_seed, "Seed");
  train->add_option("--set", overrides, "Hyperparameter override key=value (repeatable)");
  train->add_option("--out", model_out, "Model file");

  // predict
  auto* predict = app.add_subcommand("predict", "Classify one utterance per line; prints label<TAB>text");
  std::string predict_model = "model.mdl", predict_input;
  predict->add_option("--model", predict_model, "Model file");
  predict->add_option("--input", predict_input, "Text file")->default_str("stdin");

  // eval
  auto* eval = app.add_subcommand("eval", "Score a model on a labelled TSV");
  std::string eval_model = "model.mdl", eval_data = "test.tsv";
  eval->add_option("--model", eval_model, "Model file");
  eval->add_option("--data", eval_data, "Labelled TSV");

  // grid
  auto* grid = app.add_subcommand("grid", "Run a classifier x encoder grid from a spec file");
  std::string spec_path = "grid.cfg", grid_out = "results";
  std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
  grid->add_option("--spec", spec_path, "Grid spec file");
  grid->add_option("--out", grid_out, "Output directory");
  grid->add_option("--jobs", jobs, "Parallel cell workers")->check(CLI::PositiveNumber);

  std::vector<std::string> argv_rest(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(argv_rest.begin(), argv_rest.end());
  try {
    app.parse(argv_rest);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  set_verbosity(quiet ? Verbosity::Quiet : verbose ? Verbosity::Info : Verbosity::Warn);
  try {
    if (gen->parsed()) {
      const LabeledDataset ds = generate_codemix(gen_seed, per_intent);
      save_dataset(ds, gen_out);
      if (!quiet) out << "wrote " << ds.size() << " records to " << gen_out << '\n';
    } else if (embed->parsed()) {
      const LabeledDataset ds = load_dataset(embed_data);
      if (standin) {
        const StandinEmbeddings s = make_standin_embeddings(ds, sgns.dim, sgns.seed);
        save_word_embeddings(s.words, embed_out);
        save_sentence_vectors(s.sentences, sentences_out);
        if (!quiet) out << "wrote " << embed_out << " and " << sentences_out << '\n';
      } else {
        const SgnsResult r = sgns_train(ds, sgns);
        save_word_embeddings(r.table, embed_out);
        if (!quiet) out << "wrote " << r.table.size() << " vectors to " << embed_out << '\n';
      }
    } else if (train->parsed()) {
      const LabeledDataset ds = load_dataset(train_data);
      std::ostringstream model;
      ArchiveWriter w(model);
      if (!recurrent_text.empty()) {
        if (embeddings_path.empty()) throw ArgumentError("--recurrent needs --embeddings");
        SequenceConfig cfg;
        for (const auto& o : overrides) {
          const auto [k, v] = key_value(o);
          set_config_field(cfg, k, v);
        }
        cfg.seed = train_seed;
        auto table = std::make_shared<const EmbeddingTable>(load_word_embeddings(embeddings_path));
        const auto trained = train_sequence_model(parse_cell_kind(recurrent_text), ds, table, cfg);
        w.write("model", std::string_view("sequence"));
        trained.model.save(w);
      } else {
        TrainConfig cfg;
        for (const auto& o : overrides) {
          const auto [k, v] = key_value(o);
          set_config_field(cfg, k, v);
        }
        cfg.seed = train_seed;
        const ClassifierKind kind = parse_classifier_kind(classifier_text);
        const EncoderSpec spec = parse_encoder_spec("encoder", encoder_text, fs::current_path());
        auto encoder = make_encoder(spec, ds, SgnsConfig{}, train_seed);
        encoder->fit(ds);
        const auto clf = train_classifier(kind, encode_all(*encoder, ds), ds.label_indices(), ds.labels(), cfg);
        w.write("model", std::string_view("pipeline"));
        encoder->save(w);
        clf->save(w);
      }
      write_file(model_out, model.str());
      if (!quiet) out << "wrote " << model_out << '\n';
    } else if (predict->parsed()) {
      const LoadedModel m = load_model(predict_model);
      std::ifstream file;
      if (!predict_input.empty()) {
        file.open(predict_input);
        if (!file) throw DataError("cannot read " + predict_input);
      }
      std::istream& src = predict_input.empty() ? in : file;
      for (std::string line; std::getline(src, line);) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        out << m.predict(Utterance(line)) << '\t' << line << '\n';
        out.flush();
      }
    } else if (eval->parsed()) {
      const LoadedModel m = load_model(eval_model);
      const LabeledDataset ds = load_dataset(eval_data);
      std::vector<std::string> labels = ds.labels();
      labels.insert(labels.end(), m.labels().begin(), m.labels().end());
      std::sort(labels.begin(), labels.end());
      labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
      std::vector<std::string> preds, golds;
      for (const Record& r : ds.records()) {
        preds.push_back(m.predict(r.utterance));
        golds.push_back(r.label);
      }
      out << evaluate(preds, golds, labels).to_text();
    } else if (grid->parsed()) {
      const GridSpec spec = parse_grid_spec(spec_path);
      const GridResult result = run_grid(spec, jobs);
      write_grid_outputs(spec, result, grid_out);
      if (!quiet) {
        std::ifstream table(fs::path(grid_out) / "results.txt");
        out << table.rdbuf();
      }
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code(e);
  }
  return 0;
}

}  // namespace mixintent
