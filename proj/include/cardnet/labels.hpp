#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace cardnet {

/// Order matches the color-identity bit order (W, U, B, R, G); Colorless last.
enum class ColorLabel : std::uint8_t { White = 0, Blue, Black, Red, Green, Colorless };

/// Main card types with Instant and Sorcery merged.
enum class TypeLabel : std::uint8_t { Creature = 0, Artifact, Enchantment, InstantSorcery, Land };

inline constexpr std::size_t kColorLabelCount = 6;
inline constexpr std::size_t kTypeLabelCount = 5;

enum class LabelSet : std::uint8_t { Color, Type };

std::size_t label_count(LabelSet set);
std::string_view label_set_name(LabelSet set);
LabelSet parse_label_set(std::string_view name);

/// Display names, indexed by label id.
std::span<const std::string_view> label_names(LabelSet set);
std::optional<std::size_t> label_index(LabelSet set, std::string_view name);

std::string_view to_string(ColorLabel label);
std::string_view to_string(TypeLabel label);

}  // namespace cardnet
