#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "marsupial/mission/markers.hpp"
#include "marsupial/world/point_cloud.hpp"

namespace marsupial::cli {

/// Output of a procedural environment generator. Markers are suggested
/// inspection targets; configs pick them up with `"markers": "generator"`.
struct GeneratedScene {
  world::PointCloud cloud;
  std::vector<mission::Marker> markers;
};

/// corridor, pillared_hall, wall_inspection, thermal_like.
std::vector<std::string> generator_names();

/// Builds a synthetic point cloud. Every generator accepts `spacing_m`
/// (surface point spacing, default 0.05); the room generators also accept
/// their outer dimensions. Throws ConfigError for an unknown name or key.
GeneratedScene generate_scene(const std::string& name, const nlohmann::json& params);

}  // namespace marsupial::cli
