#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "wgdet/model.hpp"

namespace wgdet {

/// Shortest decimal that round-trips; locale independent. NaN prints as "nan".
std::string format_double(double value);

/// JSON layout {"geometry", "positions", "lattice", "sigma"}.
void to_json(nlohmann::json& j, const AtomArray& array);
void from_json(const nlohmann::json& j, AtomArray& array);

/// Writes `content` to `path`, creating parent directories.
void write_text_file(const std::filesystem::path& path, std::string_view content);
std::string read_text_file(const std::filesystem::path& path);

/// Version string recorded in experiment sidecars.
std::string_view library_version();

}  // namespace wgdet
