// Preset YAML files embedded at build time.
#pragma once

#include <span>
#include <string_view>

namespace ehsc::detail {

struct PresetEntry {
    std::string_view name;
    std::string_view text;
};

std::span<const PresetEntry> preset_table();

} // namespace ehsc::detail
