#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

namespace dgn {

/// Writes to a sibling temporary file and renames it over the target, so the
/// target is never observed partially written.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace dgn
