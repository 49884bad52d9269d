#include "cardnet/card_bank.hpp"

#include <sstream>

#include "cardnet/error.hpp"
#include "cardnet/text.hpp"
#include "io.hpp"

namespace cardnet {

using nlohmann::json;

namespace {

json fields_to_json(const CardFields& f) {
  return json{{"name", f.name},
              {"mana_cost", f.mana_cost},
              {"type_line", f.type_line},
              {"power_toughness", f.power_toughness},
              {"rules_text", f.rules_text}};
}

CardFields fields_from_json(const json& j) {
  return {j.at("name").get<std::string>(), j.at("mana_cost").get<std::string>(), j.at("type_line").get<std::string>(),
          j.at("power_toughness").get<std::string>(), j.at("rules_text").get<std::string>()};
}

}  // namespace

json BankEntry::to_json() const {
  json j;
  j["bank_index"] = bank_index;
  j["raw"] = raw;
  j["decoded"] = decoded ? fields_to_json(*decoded) : json(nullptr);
  j["color_pred"] = color_pred.to_json();
  j["type_pred"] = type_pred.to_json();
  j["malformed"] = malformed;
  return j;
}

BankEntry BankEntry::from_json(const json& j) {
  try {
    std::optional<CardFields> decoded;
    if (!j.at("decoded").is_null()) decoded = fields_from_json(j.at("decoded"));
    BankEntry e{j.at("bank_index").get<std::size_t>(),
                j.at("raw").get<std::string>(),
                std::move(decoded),
                PredictionVector::from_json(LabelSet::Color, j.at("color_pred")),
                PredictionVector::from_json(LabelSet::Type, j.at("type_pred")),
                j.at("malformed").get<bool>()};
    if (e.malformed == e.decoded.has_value()) throw FormatError("bank entry's malformed flag contradicts its fields");
    return e;
  } catch (const json::exception& e) {
    throw FormatError(std::string("bank entry: ") + e.what());
  }
}

json BankManifest::to_json() const {
  return json{{"generator_seed", generator_seed},
              {"temperature", temperature},
              {"count", count},
              {"generator_sha256", generator_sha256},
              {"color_model_sha256", color_model_sha256},
              {"type_model_sha256", type_model_sha256},
              {"malformed_count", malformed_count},
              {"malformed_rate", malformed_rate}};
}

BankManifest BankManifest::from_json(const json& j) {
  try {
    BankManifest m;
    m.generator_seed = j.at("generator_seed");
    m.temperature = j.at("temperature");
    m.count = j.at("count");
    m.generator_sha256 = j.at("generator_sha256");
    m.color_model_sha256 = j.at("color_model_sha256");
    m.type_model_sha256 = j.at("type_model_sha256");
    m.malformed_count = j.at("malformed_count");
    m.malformed_rate = j.at("malformed_rate");
    return m;
  } catch (const json::exception& e) {
    throw FormatError(std::string("bank manifest: ") + e.what());
  }
}

std::string bank_classifier_text(const DecodedCard& decoded, std::string_view raw) {
  if (!decoded.fields) return std::string(raw);
  const auto& f = *decoded.fields;
  return classifier_text(f.name, f.type_line, f.rules_text);
}

std::vector<BankEntry> classify_records(std::span<const std::string> records, const TextClassifier& color_model,
                                        const TextClassifier& type_model) {
  if (color_model.label_set() != LabelSet::Color)
    throw ConfigError("color classifier is trained on the '" + std::string(label_set_name(color_model.label_set())) +
                      "' label set");
  if (type_model.label_set() != LabelSet::Type)
    throw ConfigError("type classifier is trained on the '" + std::string(label_set_name(type_model.label_set())) +
                      "' label set");
  std::vector<BankEntry> out;
  out.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto decoded = decode_card(records[i]);
    const auto text = bank_classifier_text(decoded, records[i]);
    const bool malformed = decoded.malformed();
    out.push_back({i, records[i], std::move(decoded.fields), color_model.predict_text(text),
                   type_model.predict_text(text), malformed});
  }
  return out;
}

Bank build_card_bank(const TextGenerator& generator, std::size_t count, double temperature, std::uint64_t seed,
                     const TextClassifier& color_model, const TextClassifier& type_model) {
  if (color_model.label_set() != LabelSet::Color || type_model.label_set() != LabelSet::Type)
    throw ConfigError("bank needs a color classifier and a type classifier");
  Bank bank;
  auto records = generator.sample(count, temperature, seed);
  bank.entries = classify_records(records, color_model, type_model);
  bank.manifest.generator_seed = seed;
  bank.manifest.temperature = temperature;
  bank.manifest.count = count;
  for (const auto& e : bank.entries) bank.manifest.malformed_count += e.malformed;
  bank.manifest.malformed_rate = double(bank.manifest.malformed_count) / double(count);
  return bank;
}

BankManifest build_card_bank(const std::filesystem::path& generator_path, const std::filesystem::path& color_path,
                             const std::filesystem::path& type_path, std::size_t count, double temperature,
                             std::uint64_t seed, const std::filesystem::path& out) {
  auto generator = TextGenerator::load(generator_path);
  auto color = TextClassifier::load(color_path);
  auto type = TextClassifier::load(type_path);
  auto bank = build_card_bank(generator, count, temperature, seed, color, type);
  bank.manifest.generator_sha256 = detail::sha256_file(generator_path);
  bank.manifest.color_model_sha256 = detail::sha256_file(color_path);
  bank.manifest.type_model_sha256 = detail::sha256_file(type_path);
  write_bank(out, bank);
  return bank.manifest;
}

std::filesystem::path bank_manifest_path(const std::filesystem::path& bank) {
  auto p = bank;
  return p.replace_extension(".manifest.json");
}

void write_bank(const std::filesystem::path& path, const Bank& bank) {
  std::string text;
  for (const auto& e : bank.entries)
    text += e.to_json().dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  detail::write_text(path, text);
  detail::write_text(bank_manifest_path(path), bank.manifest.to_json().dump(2) + "\n");
}

std::vector<BankEntry> load_bank(const std::filesystem::path& path) {
  std::istringstream in(detail::read_text(path));
  std::vector<BankEntry> out;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(BankEntry::from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (out.back().bank_index != out.size() - 1)
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": bank_index " +
                        std::to_string(out.back().bank_index) + " out of sequence");
  }
  return out;
}

}  // namespace cardnet
