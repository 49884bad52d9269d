#include "cardnet/labels.hpp"

#include "cardnet/error.hpp"

namespace cardnet {
namespace {

constexpr std::array<std::string_view, kColorLabelCount> kColorNames = {
    "White", "Blue", "Black", "Red", "Green", "Colorless"};
constexpr std::array<std::string_view, kTypeLabelCount> kTypeNames = {
    "Creature", "Artifact", "Enchantment", "InstantSorcery", "Land"};

}  // namespace

std::size_t label_count(LabelSet set) {
  return set == LabelSet::Color ? kColorLabelCount : kTypeLabelCount;
}

std::string_view label_set_name(LabelSet set) { return set == LabelSet::Color ? "color" : "type"; }

LabelSet parse_label_set(std::string_view name) {
  if (name == "color") return LabelSet::Color;
  if (name == "type") return LabelSet::Type;
  throw ConfigError("unknown label set '" + std::string(name) + "' (expected color or type)");
}

std::span<const std::string_view> label_names(LabelSet set) {
  if (set == LabelSet::Color) return kColorNames;
  return kTypeNames;
}

std::optional<std::size_t> label_index(LabelSet set, std::string_view name) {
  auto names = label_names(set);
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return i;
  return std::nullopt;
}

std::string_view to_string(ColorLabel label) { return kColorNames[static_cast<std::size_t>(label)]; }
std::string_view to_string(TypeLabel label) { return kTypeNames[static_cast<std::size_t>(label)]; }

}  // namespace cardnet
