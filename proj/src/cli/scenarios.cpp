#include "marsupial/cli/scenarios.hpp"

#include <map>

#include <fmt/format.h>

#include "marsupial/cli/config.hpp"
#include "marsupial/world/scene_builder.hpp"

namespace marsupial::cli {

namespace {

using world::SceneBuilder;

// Reads the numeric params a generator knows about, keeping defaults for the
// missing ones and rejecting the rest.
std::map<std::string, double> read_params(const std::string& name, const nlohmann::json& params,
                                          std::map<std::string, double> defaults) {
  if (!params.is_object()) throw ConfigError("'environment.params' must be an object");
  for (const auto& item : params.items()) {
    auto it = defaults.find(item.key());
    if (it == defaults.end()) {
      throw ConfigError(fmt::format("unknown key 'environment.params.{}' for generator '{}'", item.key(), name));
    }
    if (!item.value().is_number() || !(item.value().get<double>() > 0.0)) {
      throw ConfigError(fmt::format("'environment.params.{}' must be a positive number", item.key()));
    }
    it->second = item.value().get<double>();
  }
  return defaults;
}

// Straight hallway with a cabinet and a crate on alternate sides and a duct
// hanging across the full width.
GeneratedScene corridor(const nlohmann::json& params) {
  auto p = read_params("corridor", params, {{"spacing_m", 0.05}, {"length_m", 30.0}, {"width_m", 4.0}, {"height_m", 4.0}});
  const double L = p["length_m"], W = p["width_m"], H = p["height_m"];
  if (L < 12.0 || W < 3.0 || H < 3.5) throw ConfigError("corridor needs length >= 12 m, width >= 3 m, height >= 3.5 m");
  SceneBuilder b(p["spacing_m"]);
  b.box({0, 0, 0}, {L, W, H}, true);
  b.box({0.27 * L, 0, 0}, {0.27 * L + 1.0, 0.4 * W, 1.5});
  b.box({0.5 * L, 0.6 * W, 0}, {0.5 * L + 1.2, W, 2.0});
  b.box({0.7 * L, 0, H - 1.0}, {0.7 * L + 1.0, W, H});
  return {b.build(), {}};
}

// Open hall with a 4 x 3 grid of round pillars and a low crate row.
GeneratedScene pillared_hall(const nlohmann::json& params) {
  auto p = read_params("pillared_hall", params,
                       {{"spacing_m", 0.05}, {"length_m", 20.0}, {"width_m", 14.0}, {"height_m", 6.0}, {"pillar_radius_m", 0.4}});
  const double L = p["length_m"], W = p["width_m"], H = p["height_m"], r = p["pillar_radius_m"];
  if (L < 10.0 || W < 8.0 || H < 4.0) throw ConfigError("pillared_hall needs length >= 10 m, width >= 8 m, height >= 4 m");
  if (r > 0.1 * W) throw ConfigError("pillared_hall pillar radius is too large for the hall width");
  SceneBuilder b(p["spacing_m"]);
  b.box({0, 0, 0}, {L, W, H}, true);
  for (int i = 1; i <= 4; ++i) {
    for (int j = 1; j <= 3; ++j) b.cylinder({L * i / 5.0, W * j / 4.0}, r, 0.0, H);
  }
  b.box({0.3 * L - 0.5, 0.65 * W, 0}, {0.3 * L + 0.5, 0.85 * W, 1.0});
  return {b.build(), {}};
}

// Tall room whose far wall (x = length) carries a 4 x 3 grid of markers; a
// low seating block in the middle forces the UGV around it.
GeneratedScene wall_inspection(const nlohmann::json& params) {
  auto p = read_params("wall_inspection", params, {{"spacing_m", 0.05}, {"length_m", 16.0}, {"width_m", 12.0}, {"height_m", 8.0}});
  const double L = p["length_m"], W = p["width_m"], H = p["height_m"];
  if (L < 12.0 || W < 10.0 || H < 5.0) throw ConfigError("wall_inspection needs length >= 12 m, width >= 10 m, height >= 5 m");
  SceneBuilder b(p["spacing_m"]);
  b.box({0, 0, 0}, {L, W, H}, true);
  b.box({6.0, 2.0, 0}, {8.0, W - 2.0, 1.0});
  GeneratedScene out{b.build(), {}};
  const double ys[] = {W / 2 - 2.5, W / 2 - 0.5, W / 2 + 1.5, W / 2 + 3.5};
  int id = 1;
  for (double y : ys) {
    for (double z : {2.0, 3.0, 4.0}) out.markers.push_back({id++, Vec3(L, y, z), -Vec3::UnitX()});
  }
  return out;
}

// Two-level plant room: a mezzanine slab over the west part, a partition
// with a doorway, and boiler, tank and cabinet blocks.
GeneratedScene thermal_like(const nlohmann::json& params) {
  auto p = read_params("thermal_like", params, {{"spacing_m", 0.05}});
  SceneBuilder b(p["spacing_m"]);
  b.box({0, 0, 0}, {20, 14, 9}, true);
  b.rect_xy(0, 8, 0, 14, 4.5);
  b.rect_yz(0, 5, 0, 9, 12);
  b.rect_yz(7, 14, 0, 9, 12);
  b.rect_yz(5, 7, 3, 9, 12);
  b.box({14, 2, 0}, {16, 4, 3});
  b.cylinder({17, 10}, 1.0, 0.0, 7.0);
  b.box({3, 10, 0}, {5, 12, 2});
  b.box({9, 1, 0}, {10.5, 2, 1.2});
  b.cylinder({2.5, 3}, 0.3, 4.5, 9.0);
  return {b.build(), {}};
}

}  // namespace

std::vector<std::string> generator_names() { return {"corridor", "pillared_hall", "wall_inspection", "thermal_like"}; }

GeneratedScene generate_scene(const std::string& name, const nlohmann::json& params) {
  if (name == "corridor") return corridor(params);
  if (name == "pillared_hall") return pillared_hall(params);
  if (name == "wall_inspection") return wall_inspection(params);
  if (name == "thermal_like") return thermal_like(params);
  throw ConfigError(fmt::format("unknown generator '{}'", name));
}

}  // namespace marsupial::cli
