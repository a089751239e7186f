#pragma once

#include <filesystem>
#include <string>

namespace marsupial {

/// Writes `text` to a sibling temporary file and renames it over `path`, so
/// readers never see a partial file. Throws IoError.
void write_text(const std::filesystem::path& path, const std::string& text);

/// Whole file as bytes. Throws IoError.
std::string read_text(const std::filesystem::path& path);

}  // namespace marsupial
