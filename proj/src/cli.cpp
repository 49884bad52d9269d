#include "cardnet/cli.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cardnet/card.hpp"
#include "cardnet/card_bank.hpp"
#include "cardnet/card_encoding.hpp"
#include "cardnet/dataset.hpp"
#include "cardnet/error.hpp"
#include "cardnet/fetch.hpp"
#include "cardnet/image_classifier.hpp"
#include "cardnet/matcher.hpp"
#include "cardnet/pipeline.hpp"
#include "cardnet/text_classifier.hpp"
#include "cardnet/text_generator.hpp"
#include "io.hpp"

namespace cardnet::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

const auto kLabelCheck = CLI::IsMember({"color", "type"});

struct Options {
  // global
  std::uint64_t seed = 0;
  bool verbose = false;
  std::string artifacts = "artifacts";

  // shared by several subcommands
  std::string corpus, format, out, labels = "color", report, data, model;

  // stats
  std::string stats_csv;

  // fetch
  std::string ids_file, record_url, image_url;
  double rate_limit = 5.0;
  int timeout = 30;

  // build-dataset
  std::string kind = "image", images;
  int height = 32, width = 32;
  std::string train_fraction = "5/6";
  double augment_ratio = 0.2;
  int crop_margin = 8, max_displacement = 4;
  std::size_t records_per_batch = 10000, max_len = 128, min_count = 1;

  // train-image
  CNNConfig cnn;
  // train-text
  TextCNNConfig text;
  // train-generator
  GeneratorConfig gen;

  // build-bank
  std::string generator, color_model, type_model;
  std::size_t count = 30000;
  double temperature = 0.8;

  // classify / match
  std::string image, text_input, text_file, type_line, name, bank, json_out;
  std::size_t k = 1;
  double w_color = 1.0, w_type = 1.0;
  bool include_malformed = false, print_json = false;
};

struct Io {
  std::ostream& out;
  std::ostream& err;
  bool verbose;
};

fs::path or_default(const std::string& value, const fs::path& fallback) {
  return value.empty() ? fallback : fs::path(value);
}

Corpus read_corpus(const Options& o) {
  if (o.corpus.empty()) throw ConfigError("--corpus is required");
  const auto format = o.format.empty() ? corpus_format_for(o.corpus) : parse_corpus_format(o.format);
  return load_corpus(o.corpus, format);
}

EpochCallback progress(const Io& io) {
  if (!io.verbose) return {};
  return [&io](const EpochRecord& r) {
    io.err << "epoch " << r.epoch << "  loss " << fixed(r.train_loss, 4);
    if (r.eval_accuracy) io.err << "  eval accuracy " << fixed(*r.eval_accuracy, 4);
    io.err << "  lr " << r.learning_rate << "  " << fixed(r.wall_seconds, 1) << "s\n";
  };
}

void write_report(const TrainReport& report, const fs::path& model_path, const std::string& report_opt) {
  auto path = report_opt.empty() ? fs::path(model_path.string() + ".report.jsonl") : fs::path(report_opt);
  report.write(path);
}

std::string train_summary(const TrainReport& report, const fs::path& model_path) {
  std::string s = report.kind + ": " + std::to_string(report.epochs.size()) + " epochs, final loss " +
                  fixed(report.epochs.back().train_loss, 4);
  if (report.final_accuracy) s += ", eval accuracy " + fixed(*report.final_accuracy, 4);
  return s + " -> " + model_path.string() + "\n";
}

// ---------------------------------------------------------------------------

void cmd_ingest(const Options& o, const Io& io) {
  const auto corpus = read_corpus(o);
  const auto out = or_default(o.out, fs::path(o.artifacts) / "corpus.json");
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  detail::write_text(out, corpus_to_json(corpus));
  const auto rejects = or_default(o.report, fs::path(out.string() + ".rejects.txt"));
  detail::write_text(rejects, rejects_report(corpus));
  io.out << corpus.cards.size() << " cards, " << corpus.rejects.size() << " rejects -> " << out.string() << "\n";
  for (const auto& r : corpus.rejects) io.err << "reject: row " << r.row << " " << r.field << ": " << r.reason << "\n";
}

void cmd_stats(const Options& o, const Io& io) {
  const auto corpus = read_corpus(o);
  const auto stats = corpus_stats(corpus);
  std::ostringstream s;
  s << "cards: " << stats.total << "\n";
  s << "multicolored: " << stats.multicolored << " (" << fixed(stats.multicolored_percent, 2) << "%)\n\n";
  s << std::left << std::setw(16) << "color identity" << std::right << std::setw(10) << "count" << std::setw(10)
    << "percent" << "\n";
  for (const auto& r : stats.colors)
    s << std::left << std::setw(16) << r.category << std::right << std::setw(10) << r.count << std::setw(10)
      << fixed(r.percent, 2) << "\n";
  s << "\n"
    << std::left << std::setw(40) << "type" << std::right << std::setw(10) << "count" << std::setw(10) << "percent"
    << "\n";
  for (const auto& r : stats.types)
    s << std::left << std::setw(40) << r.category << std::right << std::setw(10) << r.count << std::setw(10)
      << fixed(r.percent, 2) << "\n";
  io.out << s.str();
  if (!o.stats_csv.empty()) detail::write_text(o.stats_csv, stats_csv(stats));
}

void cmd_fetch(const Options& o, const Io& io) {
  if (o.ids_file.empty()) throw ConfigError("--ids is required");
  std::vector<std::string> ids;
  std::istringstream in(detail::read_text(o.ids_file));
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) ids.push_back(line);
  FetchConfig config{o.record_url, o.image_url, o.rate_limit, o.timeout};
  const auto out = or_default(o.out, fs::path(o.artifacts) / "fetched");
  const auto report = fetch_card_data(ids, config, out);
  io.out << report.to_json().dump() << "\n";
  if (!report.complete())
    throw NetworkError("transport failure; rerun to resume at id #" + std::to_string(*report.resume_cursor));
}

void cmd_build_dataset(const Options& o, const Io& io) {
  const auto corpus = read_corpus(o);
  const auto labels = parse_label_set(o.labels);
  SplitSpec split{SplitSpec::parse_fraction(o.train_fraction), o.seed};
  const auto out = or_default(o.out, fs::path(o.artifacts) / "data" / (o.kind + "-" + o.labels));

  if (o.kind == "image") {
    if (o.images.empty()) throw ConfigError("--images is required for image datasets");
    ImageDatasetOptions opt;
    opt.labels = labels;
    opt.dims = {o.height, o.width};
    opt.split = split;
    opt.augment = {o.crop_margin, o.max_displacement};
    opt.augment_ratio = o.augment_ratio;
    opt.seed = o.seed;
    const auto ds = build_image_dataset(corpus, o.images, opt);
    BatchManifest manifest;
    manifest.label_set = std::string(label_set_name(labels));
    manifest.height = o.height;
    manifest.width = o.width;
    manifest.seed = o.seed;
    manifest.augmentation = {{"crop_margin", o.crop_margin},
                             {"max_displacement", o.max_displacement},
                             {"ratio", o.augment_ratio},
                             {"copies", ds.augmented}};
    write_batches(ds.train, manifest, out / "train", o.records_per_batch);
    manifest.augmentation["copies"] = 0;
    write_batches(ds.eval, manifest, out / "eval", o.records_per_batch);
    io.out << ds.train.size() << " training samples (" << ds.augmented << " augmented), " << ds.eval.size()
           << " evaluation samples -> " << out.string() << "\n";
    if (!ds.missing_images.empty())
      io.err << "warning: " << ds.missing_images.size() << " cards skipped without an image\n";
  } else {
    TextDatasetOptions opt{labels, o.max_len, o.min_count, split};
    const auto ds = build_text_dataset(corpus, opt);
    fs::create_directories(out);
    ds.vocab.save(out / "vocab.txt");
    write_text_samples(out / "train.jsonl", ds.train);
    write_text_samples(out / "eval.jsonl", ds.eval);
    json manifest{{"label_set", label_set_name(labels)}, {"max_len", o.max_len},
                  {"vocab_size", ds.vocab.size()},        {"seed", o.seed},
                  {"train_fraction", o.train_fraction},   {"train_count", ds.train.size()},
                  {"eval_count", ds.eval.size()}};
    detail::write_text(out / "manifest.json", manifest.dump(2) + "\n");
    io.out << ds.train.size() << " training samples, " << ds.eval.size() << " evaluation samples, vocabulary "
           << ds.vocab.size() << " -> " << out.string() << "\n";
  }
}

void check_label_set(const std::string& stored, const std::string& requested, const fs::path& where) {
  if (stored != requested)
    throw ConfigError(where.string() + " holds '" + stored + "' labels but --labels is '" + requested + "'");
}

void cmd_train_image(const Options& o, const Io& io) {
  const auto data = or_default(o.data, fs::path(o.artifacts) / "data" / ("image-" + o.labels));
  auto train_set = open_batches(data / "train");
  check_label_set(train_set.manifest.label_set, o.labels, data / "train");
  const auto train = read_batches(data / "train");
  std::vector<ImageSample> eval;
  if (fs::exists(data / "eval" / "manifest.json")) eval = read_batches(data / "eval");

  CNNConfig config = o.cnn;
  config.labels = parse_label_set(o.labels);
  config.input = {train_set.manifest.height, train_set.manifest.width};
  config.seed = o.seed;
  auto result = train_image(config, train, eval, progress(io));
  const auto out = or_default(o.out, fs::path(o.artifacts) / ("image-" + o.labels + ".model"));
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  result.model.save(out);
  write_report(result.report, out, o.report);
  io.out << train_summary(result.report, out);
}

void cmd_train_text(const Options& o, const Io& io) {
  const auto data = or_default(o.data, fs::path(o.artifacts) / "data" / ("text-" + o.labels));
  json manifest;
  try {
    manifest = json::parse(detail::read_text(data / "manifest.json"));
  } catch (const json::parse_error& e) {
    throw FormatError((data / "manifest.json").string() + ": " + e.what());
  }
  check_label_set(manifest.value("label_set", ""), o.labels, data);
  auto vocab = Vocabulary::load(data / "vocab.txt");
  const auto train = read_text_samples(data / "train.jsonl");
  const auto eval = read_text_samples(data / "eval.jsonl");

  TextCNNConfig config = o.text;
  config.labels = parse_label_set(o.labels);
  config.vocab_size = vocab.size();
  config.max_len = manifest.value("max_len", config.max_len);
  config.seed = o.seed;
  auto result = train_text(config, vocab, train, eval, progress(io));
  const auto out = or_default(o.out, fs::path(o.artifacts) / ("text-" + o.labels + ".model"));
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  result.model.save(out);
  write_report(result.report, out, o.report);
  io.out << train_summary(result.report, out);
}

void cmd_train_generator(const Options& o, const Io& io) {
  const auto corpus = read_corpus(o);
  GeneratorConfig config = o.gen;
  config.seed = o.seed;
  auto result = train_generator(config, encode_corpus(corpus), progress(io));
  const auto out = or_default(o.out, fs::path(o.artifacts) / "generator.model");
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  result.model.save(out);
  write_report(result.report, out, o.report);
  io.out << train_summary(result.report, out);
}

void cmd_build_bank(const Options& o, const Io& io) {
  const fs::path dir(o.artifacts);
  const auto out = or_default(o.out, dir / "bank.jsonl");
  const auto manifest =
      build_card_bank(or_default(o.generator, dir / "generator.model"), or_default(o.color_model, dir / "text-color.model"),
                      or_default(o.type_model, dir / "text-type.model"), o.count, o.temperature, o.seed, out);
  io.out << manifest.count << " cards (" << manifest.malformed_count << " malformed, rate "
         << fixed(manifest.malformed_rate, 4) << ") -> " << out.string() << "\n";
}

Image read_for(const ImageClassifier& model, const std::string& path) {
  try {
    return decode_and_resize(detail::read_bytes(path), model.config().input);
  } catch (const DecodeError& e) {
    throw DecodeError(path + ": " + e.what());
  }
}

void cmd_classify_image(const Options& o, const Io& io) {
  if (o.image.empty()) throw ConfigError("--image is required");
  const auto model = ImageClassifier::load(or_default(o.model, fs::path(o.artifacts) / ("image-" + o.labels + ".model")));
  const auto pred = model.predict(read_for(model, o.image));
  io.out << json{{"labels", label_set_name(pred.label_set())}, {"argmax", pred.argmax_label()},
                 {"scores", pred.to_json()}}
                .dump()
         << "\n";
}

void cmd_classify_text(const Options& o, const Io& io) {
  std::string text = o.text_input;
  if (!o.text_file.empty()) text = detail::read_text(o.text_file);
  const auto model = TextClassifier::load(or_default(o.model, fs::path(o.artifacts) / ("text-" + o.labels + ".model")));
  const auto pred = model.predict_text(o.type_line.empty() ? mask_name(text, o.name)
                                                           : classifier_text(o.name, o.type_line, text));
  io.out << json{{"labels", label_set_name(pred.label_set())}, {"argmax", pred.argmax_label()},
                 {"scores", pred.to_json()}}
                .dump()
         << "\n";
}

void cmd_match(const Options& o, const Io& io) {
  if (o.image.empty()) throw ConfigError("--image is required");
  const fs::path dir(o.artifacts);
  const auto color_model = ImageClassifier::load(or_default(o.color_model, dir / "image-color.model"));
  const auto type_model = ImageClassifier::load(or_default(o.type_model, dir / "image-type.model"));
  if (color_model.label_set() != LabelSet::Color || type_model.label_set() != LabelSet::Type)
    throw ConfigError("match needs an image color model and an image type model");
  const auto bank = load_bank(or_default(o.bank, dir / "bank.jsonl"));

  auto color = color_model.predict(read_for(color_model, o.image));
  auto type = type_model.predict(read_for(type_model, o.image));
  MatchQuery query{normalize(LabelSet::Color, color.scores()), normalize(LabelSet::Type, type.scores()), o.w_color,
                   o.w_type, o.k, o.include_malformed};
  const auto results = match(query, bank);
  const auto doc = match_to_json(query, results);
  // Malformed raw records may hold stray bytes; those are written as U+FFFD.
  constexpr auto lossy = nlohmann::json::error_handler_t::replace;
  if (!o.json_out.empty()) detail::write_text(o.json_out, doc.dump(2, ' ', false, lossy) + "\n");
  if (o.print_json) {
    io.out << doc.dump(-1, ' ', false, lossy) << "\n";
    return;
  }
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    if (i) io.out << "\n";
    io.out << "#" << i + 1 << "  C_d " << fixed(r.color_distance, 4) << "  T_d " << fixed(r.type_distance, 4)
           << "  score " << fixed(r.score, 4) << "\n";
    io.out << render_card(bank[r.bank_index]);
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Card corpus, classifier, generator and matcher pipeline", "cardnet"};
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.set_config("--config", "", "Read option values from a TOML/INI file; command-line flags take precedence");
  app.add_option("--seed", o.seed, "Seed for every random choice")->capture_default_str();
  app.add_flag("-v,--verbose", o.verbose, "Print the effective config and training progress to stderr");
  app.add_option("--artifacts", o.artifacts, "Directory for default input/output paths")->capture_default_str();
  app.require_subcommand(1, 1);
  app.fallthrough();

  auto corpus_opts = [&](CLI::App* s) {
    s->add_option("--corpus", o.corpus, "Corpus file (CSV or JSON)");
    s->add_option("--format", o.format, "Corpus format; inferred from the extension when absent")
        ->check(CLI::IsMember({"csv", "json"}));
  };

  auto* ingest = app.add_subcommand("ingest", "Parse a corpus, write normalized JSON and a rejects report");
  corpus_opts(ingest);
  ingest->add_option("--out", o.out, "Normalized corpus output [<artifacts>/corpus.json]");
  ingest->add_option("--rejects", o.report, "Rejects report [<out>.rejects.txt]");

  auto* stats = app.add_subcommand("stats", "Print color and type distributions of a corpus");
  corpus_opts(stats);
  stats->add_option("--out", o.stats_csv, "Also write the statistics as CSV");

  auto* fetch = app.add_subcommand("fetch", "Download card records and images from a card database mirror");
  fetch->add_option("--ids", o.ids_file, "File with one card id per line");
  fetch->add_option("--record-url", o.record_url, "Record URL template containing {id}");
  fetch->add_option("--image-url", o.image_url, "Image URL template containing {id}");
  fetch->add_option("--rate-limit", o.rate_limit, "Requests per second")->capture_default_str();
  fetch->add_option("--timeout", o.timeout, "Per-request timeout in seconds")->capture_default_str();
  fetch->add_option("--out", o.out, "Output directory [<artifacts>/fetched]");

  auto* build = app.add_subcommand("build-dataset", "Build labeled, split image batches or text samples");
  corpus_opts(build);
  build->add_option("--kind", o.kind, "image or text")->check(CLI::IsMember({"image", "text"}))->capture_default_str();
  build->add_option("--labels", o.labels, "color or type")->check(kLabelCheck)->capture_default_str();
  build->add_option("--images", o.images, "Directory holding card images");
  build->add_option("--out", o.out, "Output directory [<artifacts>/data/<kind>-<labels>]");
  build->add_option("--height", o.height)->capture_default_str()->check(CLI::PositiveNumber);
  build->add_option("--width", o.width)->capture_default_str()->check(CLI::PositiveNumber);
  build->add_option("--train-fraction", o.train_fraction, "e.g. 5/6 or 0.8")->capture_default_str();
  build->add_option("--augment-ratio", o.augment_ratio, "Augmented copies per training sample")->capture_default_str();
  build->add_option("--crop-margin", o.crop_margin)->capture_default_str();
  build->add_option("--max-displacement", o.max_displacement)->capture_default_str();
  build->add_option("--records-per-batch", o.records_per_batch)->capture_default_str();
  build->add_option("--max-len", o.max_len, "Tokens per text sample")->capture_default_str();
  build->add_option("--min-count", o.min_count, "Minimum token count for the vocabulary")->capture_default_str();

  auto* ti = app.add_subcommand("train-image", "Train the image classifier");
  ti->add_option("--labels", o.labels, "color or type")->check(kLabelCheck)->capture_default_str();
  ti->add_option("--data", o.data, "Dataset directory [<artifacts>/data/image-<labels>]");
  ti->add_option("--out", o.out, "Model output [<artifacts>/image-<labels>.model]");
  ti->add_option("--report", o.report, "Training report [<out>.report.jsonl]");
  ti->add_option("--epochs", o.cnn.epochs)->capture_default_str();
  ti->add_option("--batch-size", o.cnn.batch_size)->capture_default_str();
  ti->add_option("--learning-rate", o.cnn.learning_rate)->capture_default_str();
  ti->add_option("--momentum", o.cnn.momentum)->capture_default_str();
  ti->add_option("--lr-decay", o.cnn.lr_decay)->capture_default_str();
  ti->add_option("--plateau-epochs", o.cnn.plateau_epochs)->capture_default_str();
  ti->add_option("--conv1-maps", o.cnn.conv1_maps)->capture_default_str();
  ti->add_option("--conv2-maps", o.cnn.conv2_maps)->capture_default_str();
  ti->add_option("--fc-width", o.cnn.fc_width)->capture_default_str();

  auto* tt = app.add_subcommand("train-text", "Train the text classifier");
  tt->add_option("--labels", o.labels, "color or type")->check(kLabelCheck)->capture_default_str();
  tt->add_option("--data", o.data, "Dataset directory [<artifacts>/data/text-<labels>]");
  tt->add_option("--out", o.out, "Model output [<artifacts>/text-<labels>.model]");
  tt->add_option("--report", o.report, "Training report [<out>.report.jsonl]");
  tt->add_option("--epochs", o.text.epochs)->capture_default_str();
  tt->add_option("--batch-size", o.text.batch_size)->capture_default_str();
  tt->add_option("--learning-rate", o.text.learning_rate)->capture_default_str();
  tt->add_option("--embedding-dim", o.text.embedding_dim)->capture_default_str();
  tt->add_option("--filter-widths", o.text.filter_widths)->capture_default_str();
  tt->add_option("--filters-per-width", o.text.filters_per_width)->capture_default_str();
  tt->add_option("--dropout", o.text.dropout)->capture_default_str();

  auto* tg = app.add_subcommand("train-generator", "Train the character-level card text generator");
  corpus_opts(tg);
  tg->add_option("--out", o.out, "Model output [<artifacts>/generator.model]");
  tg->add_option("--report", o.report, "Training report [<out>.report.jsonl]");
  tg->add_option("--hidden-size", o.gen.hidden_size)->capture_default_str();
  tg->add_option("--layers", o.gen.layers)->capture_default_str();
  tg->add_option("--sequence-length", o.gen.sequence_length)->capture_default_str();
  tg->add_option("--batch-size", o.gen.batch_size, "Parallel training streams")->capture_default_str();
  tg->add_option("--learning-rate", o.gen.learning_rate)->capture_default_str();
  tg->add_option("--epochs", o.gen.epochs)->capture_default_str();
  tg->add_option("--grad-clip", o.gen.grad_clip)->capture_default_str();
  tg->add_option("--max-record-chars", o.gen.max_record_chars)->capture_default_str();

  auto* bb = app.add_subcommand("build-bank", "Generate cards and tag them with both text classifiers");
  bb->add_option("--generator", o.generator, "[<artifacts>/generator.model]");
  bb->add_option("--color-model", o.color_model, "[<artifacts>/text-color.model]");
  bb->add_option("--type-model", o.type_model, "[<artifacts>/text-type.model]");
  bb->add_option("--count", o.count)->capture_default_str()->check(CLI::PositiveNumber);
  bb->add_option("--temperature", o.temperature)->capture_default_str();
  bb->add_option("--out", o.out, "Bank output [<artifacts>/bank.jsonl]");

  auto* ci = app.add_subcommand("classify-image", "Print the prediction vector of an image");
  ci->add_option("--image", o.image, "Image file (JPEG, PNG or PPM)");
  ci->add_option("--labels", o.labels, "Selects the default model")->check(kLabelCheck)->capture_default_str();
  ci->add_option("--model", o.model, "[<artifacts>/image-<labels>.model]");

  auto* ct = app.add_subcommand("classify-text", "Print the prediction vector of card text");
  ct->add_option("--text", o.text_input, "Rules text");
  ct->add_option("--text-file", o.text_file, "Read the rules text from a file");
  ct->add_option("--type-line", o.type_line, "Type line prepended to the rules text");
  ct->add_option("--name", o.name, "Card name to mask in the rules text");
  ct->add_option("--labels", o.labels, "Selects the default model")->check(kLabelCheck)->capture_default_str();
  ct->add_option("--model", o.model, "[<artifacts>/text-<labels>.model]");

  auto* mt = app.add_subcommand("match", "Find the generated card closest to an image");
  mt->add_option("--image", o.image, "Image file (JPEG, PNG or PPM)");
  mt->add_option("--bank", o.bank, "[<artifacts>/bank.jsonl]");
  mt->add_option("--color-model", o.color_model, "Image color model [<artifacts>/image-color.model]");
  mt->add_option("--type-model", o.type_model, "Image type model [<artifacts>/image-type.model]");
  mt->add_option("--k", o.k, "Number of results")->capture_default_str()->check(CLI::PositiveNumber);
  mt->add_option("--w-color", o.w_color)->capture_default_str();
  mt->add_option("--w-type", o.w_type)->capture_default_str();
  mt->add_flag("--include-malformed", o.include_malformed, "Also match malformed bank entries");
  mt->add_flag("--json", o.print_json, "Print the JSON result instead of the rendering");
  mt->add_option("--out", o.json_out, "Also write the JSON result to a file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::FileError& e) {
    err << "error: load: " << e.what() << "\n";
    return 1;
  } catch (const CLI::ParseError& e) {
    err << "error: usage: " << e.what() << "\n";
    return 2;
  }

  Io io{out, err, o.verbose};
  CLI::App* sub = app.get_subcommands().front();
  if (o.verbose) {
    err << "# effective config\n" << app.config_to_str(true, false);
  }
  try {
    const std::string name = sub->get_name();
    if (name == "ingest") cmd_ingest(o, io);
    else if (name == "stats") cmd_stats(o, io);
    else if (name == "fetch") cmd_fetch(o, io);
    else if (name == "build-dataset") cmd_build_dataset(o, io);
    else if (name == "train-image") cmd_train_image(o, io);
    else if (name == "train-text") cmd_train_text(o, io);
    else if (name == "train-generator") cmd_train_generator(o, io);
    else if (name == "build-bank") cmd_build_bank(o, io);
    else if (name == "classify-image") cmd_classify_image(o, io);
    else if (name == "classify-text") cmd_classify_text(o, io);
    else if (name == "match") cmd_match(o, io);
  } catch (const Error& e) {
    err << "error: " << e.kind() << ": " << e.what() << "\n";
    return 1;
  } catch (const fs::filesystem_error& e) {
    err << "error: io: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace cardnet::cli
