#include "marsupial/cli/config.hpp"

#include <cmath>
#include <set>

#include <fmt/format.h>

#include "marsupial/common/io.hpp"
#include "marsupial/cli/sha256.hpp"

namespace marsupial::cli {

using nlohmann::json;

namespace {

// Object reader that records which keys were consumed, so leftovers can be
// reported as unknown.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(fmt::format("'{}' must be an object", label()));
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  std::string key_path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  void number(const std::string& key, double& out) {
    if (!has(key)) return;
    const json& v = raw(key);
    if (!v.is_number()) throw ConfigError(fmt::format("'{}' must be a number", key_path(key)));
    out = v.get<double>();
    if (!std::isfinite(out)) throw ConfigError(fmt::format("'{}' must be finite", key_path(key)));
  }

  void integer(const std::string& key, int& out) {
    if (!has(key)) return;
    const json& v = raw(key);
    if (!v.is_number_integer()) throw ConfigError(fmt::format("'{}' must be an integer", key_path(key)));
    out = v.get<int>();
  }

  void unsigned_integer(const std::string& key, std::uint64_t& out) {
    if (!has(key)) return;
    const json& v = raw(key);
    if (!v.is_number_unsigned()) {
      throw ConfigError(fmt::format("'{}' must be a non-negative integer", key_path(key)));
    }
    out = v.get<std::uint64_t>();
  }

  void boolean(const std::string& key, bool& out) {
    if (!has(key)) return;
    const json& v = raw(key);
    if (!v.is_boolean()) throw ConfigError(fmt::format("'{}' must be true or false", key_path(key)));
    out = v.get<bool>();
  }

  void string(const std::string& key, std::string& out) {
    if (!has(key)) return;
    const json& v = raw(key);
    if (!v.is_string()) throw ConfigError(fmt::format("'{}' must be a string", key_path(key)));
    out = v.get<std::string>();
  }

  void vec3(const std::string& key, Vec3& out) {
    if (!has(key)) return;
    out = to_vec3(raw(key), key_path(key));
  }

  Section child(const std::string& key) { return Section(raw(key), key_path(key)); }

  /// Throws for any key that was never read.
  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) {
        throw ConfigError(fmt::format("unknown key '{}'", key_path(item.key())));
      }
    }
  }

  static Vec3 to_vec3(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 3) {
      throw ConfigError(fmt::format("'{}' must be an array of 3 numbers", where));
    }
    Vec3 out;
    for (int i = 0; i < 3; ++i) {
      if (!v[i].is_number()) throw ConfigError(fmt::format("'{}' must be an array of 3 numbers", where));
      out[i] = v[i].get<double>();
    }
    if (!out.allFinite()) throw ConfigError(fmt::format("'{}' must be finite", where));
    return out;
  }

 private:
  std::string label() const { return path_.empty() ? "config" : path_; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

const json& array_at(Section& s, const std::string& key) {
  const json& v = s.raw(key);
  if (!v.is_array()) throw ConfigError(fmt::format("'{}' must be an array", s.key_path(key)));
  return v;
}

void parse_environment(Section s, EnvironmentSource& env, const std::filesystem::path& base_dir) {
  s.string("generator", env.generator);
  if (s.has("params")) {
    env.params = s.raw("params");
    if (!env.params.is_object()) throw ConfigError("'environment.params' must be an object");
  }
  std::string cloud;
  s.string("point_cloud", cloud);
  s.finish();
  if (env.generator.empty() == cloud.empty()) {
    throw ConfigError("'environment' needs exactly one of 'generator' or 'point_cloud'");
  }
  if (!cloud.empty()) {
    env.point_cloud = cloud;
    if (env.point_cloud.is_relative()) env.point_cloud = base_dir / env.point_cloud;
  }
}

void parse_planner(Section s, planner::PlannerParams& p) {
  s.integer("max_iterations", p.max_iterations);
  s.number("step_g_m", p.step_g);
  s.number("step_a_m", p.step_a);
  s.number("goal_tolerance_m", p.goal_tolerance);
  s.number("clearance_air_m", p.clearance_air);
  s.number("clearance_tether_m", p.clearance_tether);
  s.number("rewire_gamma", p.rewire_gamma);
  s.number("w_g", p.w_g);
  s.number("w_a", p.w_a);
  s.number("p_goal", p.p_goal);
  if (s.has("checkpoints")) {
    p.checkpoints.clear();
    for (const auto& v : array_at(s, "checkpoints")) {
      if (!v.is_number_integer()) throw ConfigError("'planner.checkpoints' must hold integers");
      p.checkpoints.push_back(v.get<int>());
    }
  }
  s.finish();
}

void parse_optimizer(Section s, trajopt::OptimizerConfig& o) {
  s.number("rho_ot_m", o.rho_ot);
  s.number("beta", o.beta);
  s.integer("tether_samples", o.m);
  s.number("v_g_mps", o.v_g);
  s.number("v_a_mps", o.v_a);
  s.number("v_max_g_mps", o.v_max_g);
  s.number("v_max_a_mps", o.v_max_a);
  s.number("a_max_g_mps2", o.a_max_g);
  s.number("a_max_a_mps2", o.a_max_a);
  s.number("safety_g_m", o.safety_g);
  s.number("safety_a_m", o.safety_a);
  s.number("epsilon_m", o.epsilon);
  s.integer("max_iterations", o.max_iterations);
  s.number("step_tolerance", o.step_tolerance);
  s.number("cost_tolerance", o.cost_tolerance);
  s.number("initial_lambda", o.initial_lambda);
  if (s.has("weights")) {
    Section w = s.child("weights");
    w.number("tether_obstacle", o.weights.tether_obstacle);
    w.number("tether_length", o.weights.tether_length);
    w.number("velocity", o.weights.velocity);
    w.number("acceleration", o.weights.acceleration);
    w.number("clearance", o.weights.clearance);
    w.number("equidistance", o.weights.equidistance);
    w.number("smoothness", o.weights.smoothness);
    w.number("time", o.weights.time);
    w.finish();
  }
  s.finish();
}

void parse_tracker(Section s, mission::TrackerConfig& t) {
  s.number("gain_xy_per_s", t.gain_xy);
  s.number("gain_z_per_s", t.gain_z);
  s.number("v_g_mps", t.v_g);
  s.number("v_a_mps", t.v_a);
  s.number("v_max_vertical_mps", t.v_max_vertical);
  s.number("accel_mps2", t.accel);
  s.number("min_speed_mps", t.min_speed);
  s.number("reached_tolerance_m", t.reached_tolerance);
  s.number("yaw_gain_per_s", t.yaw_gain);
  s.number("max_yaw_rate_radps", t.max_yaw_rate);
  s.number("yaw_tolerance_rad", t.yaw_tolerance);
  s.finish();
}

void parse_battery(Section s, ScenarioConfig& c) {
  auto& p = c.sim.power;
  s.string("preset", c.battery_preset);
  const bool has_draw = s.has("draw_w");
  s.number("draw_w", p.draw_w);
  s.number("bank_capacity_wh", p.bank_capacity_wh);
  s.integer("packs", p.packs);
  s.number("backup_capacity_wh", p.backup_capacity_wh);
  s.number("backup_draw_w", p.backup_draw_w);
  s.number("backup_floor", p.backup_floor);
  s.integer("duration_min", c.endurance_duration_min);
  s.finish();
  if (!c.battery_preset.empty()) {
    if (has_draw) throw ConfigError("'battery' takes either 'preset' or 'draw_w', not both");
    try {
      p.draw_w = mission::preset_draw(c.battery_preset);
    } catch (const InvalidArgumentError& e) {
      throw ConfigError(fmt::format("'battery.preset': {}", e.what()));
    }
  }
  if (c.endurance_duration_min < 1) throw ConfigError("'battery.duration_min' must be >= 1");
}

void parse_sim(Section s, mission::SimConfig& sim) {
  s.number("dt_s", sim.dt);
  s.number("command_noise_mps", sim.command_noise);
  s.number("max_time_s", sim.max_time);
  s.boolean("abort_on_tether_violation", sim.abort_on_tether_violation);
  s.number("poi_tolerance_m", sim.poi_tolerance);
  s.number("initial_yaw_rad", sim.initial_yaw);
  s.finish();
}

void parse_camera(Section s, mission::CameraModel& cam) {
  s.number("fov_rad", cam.fov);
  s.number("max_range_m", cam.max_range);
  s.number("noise_sigma_m", cam.noise_sigma);
  s.finish();
}

std::vector<mission::Marker> parse_markers(const json& arr) {
  std::vector<mission::Marker> out;
  std::set<int> ids;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    Section s(arr[i], fmt::format("markers.{}", i));
    mission::Marker m;
    if (!s.has("id") || !s.has("position_m")) {
      throw ConfigError(fmt::format("'markers.{}' needs 'id' and 'position_m'", i));
    }
    s.integer("id", m.id);
    s.vec3("position_m", m.position);
    s.vec3("normal", m.normal);
    s.finish();
    if (!(m.normal.norm() > 0.0)) throw ConfigError(fmt::format("'markers.{}.normal' is zero", i));
    m.normal.normalize();
    if (!ids.insert(m.id).second) throw ConfigError(fmt::format("duplicate marker id {}", m.id));
    out.push_back(m);
  }
  return out;
}

void parse_localization(Section s, LocalizationConfig& l) {
  s.integer("trials", l.trials);
  s.number("max_init_err_m", l.max_init_err_m);
  s.number("max_init_err_deg", l.max_init_err_deg);
  s.boolean("run_icp", l.run_icp);
  if (s.has("sensor")) {
    Section t = s.child("sensor");
    t.integer("rings", l.rings);
    t.number("min_elevation_deg", l.min_elevation_deg);
    t.number("max_elevation_deg", l.max_elevation_deg);
    t.integer("azimuth_steps", l.azimuth_steps);
    t.number("max_range_m", l.max_range_m);
    t.number("range_noise_m", l.range_noise_m);
    t.finish();
  }
  if (s.has("dll")) {
    Section t = s.child("dll");
    t.integer("max_iterations", l.dll_max_iterations);
    t.finish();
  }
  if (s.has("icp")) {
    Section t = s.child("icp");
    t.integer("max_iterations", l.icp_max_iterations);
    t.number("max_correspondence_m", l.icp_max_correspondence_m);
    t.finish();
  }
  if (s.has("scan_poses")) {
    const json& arr = array_at(s, "scan_poses");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      Section p(arr[i], fmt::format("localization.scan_poses.{}", i));
      Vec3 pos = Vec3::Zero();
      double yaw = 0.0;
      p.vec3("position_m", pos);
      p.number("yaw_rad", yaw);
      p.finish();
      l.scan_poses.push_back(Pose::from_position_yaw(pos, yaw));
    }
  }
  s.finish();
  if (l.trials < 1) throw ConfigError("'localization.trials' must be >= 1");
}

// Re-run the library validators so semantic errors also surface as exit 1.
template <typename F>
void checked(const char* section, F&& f) {
  try {
    f();
  } catch (const InvalidArgumentError& e) {
    throw ConfigError(fmt::format("'{}': {}", section, e.what()));
  }
}

}  // namespace

void apply_overrides(json& doc, const std::vector<std::string>& sets) {
  for (const auto& item : sets) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError(fmt::format("override '{}' is not key=value", item));
    }
    const std::string key = item.substr(0, eq);
    const std::string text = item.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;

    json* node = &doc;
    std::size_t start = 0;
    while (true) {
      const auto dot = key.find('.', start);
      const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
      if (part.empty()) throw ConfigError(fmt::format("override key '{}' has an empty segment", key));
      json* next = nullptr;
      if (node->is_array()) {
        std::size_t idx = 0;
        try {
          std::size_t used = 0;
          idx = std::stoul(part, &used);
          if (used != part.size()) throw std::invalid_argument(part);
        } catch (const std::exception&) {
          throw ConfigError(fmt::format("override key '{}': '{}' is not an array index", key, part));
        }
        if (idx >= node->size()) throw ConfigError(fmt::format("override key '{}': index out of range", key));
        next = &(*node)[idx];
      } else {
        if (node->is_null()) *node = json::object();
        if (!node->is_object()) throw ConfigError(fmt::format("override key '{}' crosses a scalar", key));
        next = &(*node)[part];
      }
      node = next;
      if (dot == std::string::npos) break;
      start = dot + 1;
    }
    *node = std::move(value);
  }
}

ScenarioConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
  ScenarioConfig c;
  Section root(doc, "");
  root.string("name", c.name);
  root.unsigned_integer("seed", c.seed);
  if (!root.has("environment")) throw ConfigError("'environment' is required");
  parse_environment(root.child("environment"), c.environment, base_dir);
  if (root.has("grid")) {
    Section g = root.child("grid");
    g.number("resolution_m", c.grid.resolution_m);
    g.number("padding_m", c.grid.padding_m);
    g.number("edf_max_dist_m", c.grid.edf_max_dist_m);
    g.finish();
  }
  if (!(c.grid.resolution_m > 0.0) || !(c.grid.padding_m >= 0.0) || !(c.grid.edf_max_dist_m > 0.0)) {
    throw ConfigError("'grid' values must be positive");
  }
  if (root.has("traversability")) {
    Section t = root.child("traversability");
    auto& p = c.traversability;
    t.number("cell_size_m", p.cell_size);
    t.number("max_slope_rad", p.max_slope);
    t.number("max_step_m", p.max_step);
    t.number("clearance_m", p.clearance);
    t.number("anchor_height_m", p.anchor_height);
    t.number("ground_percentile", p.ground_percentile);
    t.finish();
  }
  root.number("l_max_m", c.planner.l_max);
  if (root.has("start")) {
    Section s = root.child("start");
    s.vec3("ugv_m", c.start_ugv);
    s.vec3("uav_m", c.start_uav);
    s.finish();
  }
  if (root.has("inspection_plan")) {
    const json& arr = array_at(root, "inspection_plan");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      Section p(arr[i], fmt::format("inspection_plan.{}", i));
      mission::PoI poi;
      if (!p.has("position_m")) throw ConfigError(fmt::format("'inspection_plan.{}' needs 'position_m'", i));
      p.vec3("position_m", poi.position);
      p.number("yaw_rad", poi.yaw);
      p.number("dwell_s", poi.dwell);
      p.finish();
      c.plan.pois.push_back(poi);
    }
  }
  if (root.has("planner")) parse_planner(root.child("planner"), c.planner);
  if (root.has("optimizer")) parse_optimizer(root.child("optimizer"), c.optimizer);
  if (root.has("tracker")) parse_tracker(root.child("tracker"), c.sim.tracker);
  if (root.has("battery")) parse_battery(root.child("battery"), c);
  if (root.has("sim")) parse_sim(root.child("sim"), c.sim);
  if (root.has("camera")) parse_camera(root.child("camera"), c.sim.camera);
  if (root.has("markers")) {
    const json& m = root.raw("markers");
    if (m.is_string() && m.get<std::string>() == "generator") {
      c.markers_from_generator = true;
    } else if (m.is_array()) {
      c.sim.markers = parse_markers(m);
    } else {
      throw ConfigError("'markers' must be an array or the string \"generator\"");
    }
  }
  if (root.has("localization")) parse_localization(root.child("localization"), c.localization);
  root.finish();

  c.planner.seed = c.seed;
  c.optimizer.l_max = c.planner.l_max;
  c.sim.l_max = c.planner.l_max;
  checked("traversability", [&] { c.traversability.validate(); });
  checked("planner", [&] { c.planner.validate(); });
  checked("optimizer", [&] { c.optimizer.validate(); });
  checked("sim", [&] { c.sim.validate(); });
  if (!c.plan.pois.empty()) {
    checked("inspection_plan", [&] { c.plan.validate(); });
    c.plan.normalize();
  }
  return c;
}

LoadedConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& sets,
                         std::optional<std::uint64_t> seed) {
  const std::string bytes = read_text(path);
  json doc = json::parse(bytes, nullptr, false);
  if (doc.is_discarded()) throw ConfigError(fmt::format("{}: not valid JSON", path.string()));
  apply_overrides(doc, sets);
  if (seed) doc["seed"] = *seed;
  LoadedConfig out;
  out.config = parse_config(doc, path.parent_path());
  out.sha256 = sha256_hex(bytes);
  return out;
}

}  // namespace marsupial::cli
