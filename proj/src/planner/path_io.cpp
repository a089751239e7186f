#include "marsupial/planner/path_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "json.hpp"
#include "marsupial/common/error.hpp"
#include "marsupial/common/io.hpp"

namespace marsupial::planner {

namespace {

using nlohmann::json;

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw ParseError(fmt::format("{} must be [x, y, z]", what));
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    if (!j[static_cast<std::size_t>(i)].is_number()) {
      throw ParseError(fmt::format("{} must hold numbers", what));
    }
    v[i] = j[static_cast<std::size_t>(i)].get<double>();
  }
  if (!v.allFinite()) throw ParseError(fmt::format("{} is not finite", what));
  return v;
}

}  // namespace

std::string path_to_json(const std::vector<JointState>& states) {
  json arr = json::array();
  for (std::size_t i = 0; i < states.size(); ++i) {
    arr.push_back({{"t_index", i},
                   {"p_g", vec_json(states[i].p_g)},
                   {"p_a", vec_json(states[i].p_a)},
                   {"tether_len", states[i].tether_length()}});
  }
  return arr.dump(2) + "\n";
}

void save_path_json(const std::vector<JointState>& states, const std::filesystem::path& path) {
  write_text(path, path_to_json(states));
}

void save_path_csv(const std::vector<JointState>& states, const std::filesystem::path& path) {
  std::string out = "t_index,xg,yg,zg,xa,ya,za,tether_len\n";
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto& s = states[i];
    out += fmt::format("{},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g}\n", i, s.p_g.x(),
                       s.p_g.y(), s.p_g.z(), s.p_a.x(), s.p_a.y(), s.p_a.z(), s.tether_length());
  }
  write_text(path, out);
}

std::vector<JointState> load_path_json(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError(fmt::format("cannot open {}", path.string()));
  json doc;
  try {
    f >> doc;
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("{}: {}", path.string(), e.what()));
  }
  if (!doc.is_array()) throw ParseError(fmt::format("{}: expected a JSON array", path.string()));
  std::vector<JointState> states;
  for (const auto& item : doc) {
    if (!item.is_object() || !item.contains("p_g") || !item.contains("p_a")) {
      throw ParseError(fmt::format("{}: each state needs p_g and p_a", path.string()));
    }
    states.push_back({vec_from(item["p_g"], "p_g"), vec_from(item["p_a"], "p_a")});
  }
  if (states.empty()) throw EmptyInputError(fmt::format("{}: path has no states", path.string()));
  return states;
}

}  // namespace marsupial::planner
