#include "marsupial/world/point_cloud.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "marsupial/common/error.hpp"

namespace marsupial::world {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Reads one whitespace-separated number; accepts nan/inf spellings, which
// iostream extraction rejects.
bool read_number(std::istream& in, double& out) {
  std::string token;
  if (!(in >> token)) return false;
  char* end = nullptr;
  out = std::strtod(token.c_str(), &end);
  return end == token.c_str() + token.size();
}

std::optional<Vec3> parse_xyz_line(const std::string& line, std::size_t line_no,
                                   const std::filesystem::path& path) {
  std::istringstream in(line);
  double x = 0.0, y = 0.0, z = 0.0;
  if (!read_number(in, x) || !read_number(in, y) || !read_number(in, z)) {
    throw ParseError(fmt::format("{}:{}: malformed line '{}'", path.string(), line_no, line));
  }
  std::string rest;
  if (in >> rest) {
    throw ParseError(fmt::format("{}:{}: trailing data '{}'", path.string(), line_no, rest));
  }
  if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z)) return std::nullopt;
  return Vec3(x, y, z);
}

PointCloud parse_ply(std::istream& in, const std::filesystem::path& path) {
  std::string line;
  std::size_t line_no = 1;
  std::size_t vertex_count = 0;
  bool in_vertex_element = false;
  std::vector<std::string> vertex_props;
  bool have_format = false;

  while (true) {
    if (!std::getline(in, line)) {
      throw ParseError(fmt::format("{}: PLY header not terminated", path.string()));
    }
    ++line_no;
    const std::string t = trim(line);
    if (t == "end_header") break;
    std::istringstream hs(t);
    std::string keyword;
    hs >> keyword;
    if (keyword == "format") {
      std::string fmt_name;
      hs >> fmt_name;
      if (fmt_name != "ascii") {
        throw ParseError(fmt::format("{}: only ASCII PLY is supported (got '{}')", path.string(),
                                     fmt_name));
      }
      have_format = true;
    } else if (keyword == "element") {
      std::string name;
      std::size_t count = 0;
      if (!(hs >> name >> count)) {
        throw ParseError(fmt::format("{}:{}: bad element line", path.string(), line_no));
      }
      in_vertex_element = (name == "vertex");
      if (in_vertex_element) vertex_count = count;
    } else if (keyword == "property") {
      if (in_vertex_element) {
        std::string type, name;
        hs >> type >> name;
        if (type == "list") {
          throw ParseError(fmt::format("{}: list properties on vertices unsupported", path.string()));
        }
        vertex_props.push_back(name);
      }
    } else if (keyword != "comment" && keyword != "obj_info" && !keyword.empty()) {
      throw ParseError(fmt::format("{}:{}: unknown PLY header keyword '{}'", path.string(),
                                   line_no, keyword));
    }
  }
  if (!have_format) throw ParseError(fmt::format("{}: PLY header has no format", path.string()));

  int ix = -1, iy = -1, iz = -1;
  for (std::size_t i = 0; i < vertex_props.size(); ++i) {
    if (vertex_props[i] == "x") ix = static_cast<int>(i);
    if (vertex_props[i] == "y") iy = static_cast<int>(i);
    if (vertex_props[i] == "z") iz = static_cast<int>(i);
  }
  if (ix < 0 || iy < 0 || iz < 0) {
    throw ParseError(fmt::format("{}: PLY vertex lacks x/y/z properties", path.string()));
  }

  PointCloud cloud;
  cloud.points.reserve(vertex_count);
  std::vector<double> values(vertex_props.size());
  for (std::size_t v = 0; v < vertex_count; ++v) {
    if (!std::getline(in, line)) {
      throw ParseError(fmt::format("{}: PLY declares {} vertices but only {} present",
                                   path.string(), vertex_count, v));
    }
    ++line_no;
    std::istringstream ls(line);
    for (auto& value : values) {
      if (!read_number(ls, value)) {
        throw ParseError(fmt::format("{}:{}: malformed vertex '{}'", path.string(), line_no, line));
      }
    }
    const Vec3 p(values[ix], values[iy], values[iz]);
    if (p.allFinite()) cloud.points.push_back(p);
  }
  return cloud;
}

}  // namespace

Aabb bounds(const PointCloud& cloud) {
  if (cloud.empty()) throw EmptyInputError("empty cloud");
  Aabb box{cloud.points.front(), cloud.points.front()};
  for (const auto& p : cloud.points) {
    box.min = box.min.cwiseMin(p);
    box.max = box.max.cwiseMax(p);
  }
  return box;
}

PointCloud load_point_cloud(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open point cloud '{}'", path.string()));

  PointCloud cloud;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (first && !t.empty()) {
      first = false;
      if (t == "ply") {
        cloud = parse_ply(in, path);
        break;
      }
    }
    if (t.empty() || t.front() == '#') continue;
    if (auto p = parse_xyz_line(t, line_no, path)) cloud.points.push_back(*p);
  }
  if (cloud.empty()) throw EmptyInputError("empty cloud");
  return cloud;
}

void save_xyz(const PointCloud& cloud, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
  for (const auto& p : cloud.points) out << fmt::format("{} {} {}\n", p.x(), p.y(), p.z());
  if (!out) throw IoError(fmt::format("write failed for '{}'", path.string()));
}

}  // namespace marsupial::world
