#include "marsupial/common/io.hpp"

#include <fstream>
#include <sstream>
#include <system_error>

#include <fmt/format.h>

#include "marsupial/common/error.hpp"

namespace marsupial {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw IoError(fmt::format("cannot write {}", path.string()));
    f << text;
    if (!f) throw IoError(fmt::format("failed writing {}", path.string()));
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError(fmt::format("cannot move {} into place: {}", path.string(), ec.message()));
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError(fmt::format("cannot open {}", path.string()));
  std::ostringstream ss;
  ss << f.rdbuf();
  if (f.bad()) throw IoError(fmt::format("failed reading {}", path.string()));
  return ss.str();
}

}  // namespace marsupial
