#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace marsupial::cli {

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view bytes);
/// Digest of a file's contents; throws IoError.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace marsupial::cli
