#include "marsupial/mission/markers.hpp"

#include <cmath>

#include "marsupial/common/error.hpp"
#include "marsupial/world/los.hpp"

namespace marsupial::mission {

void CameraModel::validate() const {
  if (!(fov > 0.0 && fov < 2.0 * kPi)) throw InvalidArgumentError("camera fov must be in (0, 2 pi)");
  if (!(max_range > 0.0)) throw InvalidArgumentError("camera range must be > 0");
  if (!(noise_sigma >= 0.0)) throw InvalidArgumentError("camera noise must be >= 0");
}

bool marker_visible(const Pose& camera, const Marker& marker, const CameraModel& model,
                    const world::VoxelEDF* edf) {
  const Vec3 view = marker.position - camera.position;
  const double range = view.norm();
  if (range > model.max_range || range < 1e-9) return false;
  const Vec3 boresight = camera.rotation().col(0);
  if (boresight.dot(view) < range * std::cos(0.5 * model.fov)) return false;
  if (marker.normal.dot(view) >= 0.0) return false;
  if (edf == nullptr) return true;
  const Vec3 front = marker.position + 1.5 * edf->resolution() * marker.normal.normalized();
  if (!edf->contains(camera.position) || !edf->contains(front)) return false;
  return world::check_los(*edf, camera.position, front, 0.0);
}

std::vector<Detection> detect_markers(const Pose& pose, const std::vector<Marker>& markers,
                                      const CameraModel& model, std::mt19937_64& rng,
                                      const world::VoxelEDF* edf) {
  model.validate();
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<Detection> out;
  for (const auto& m : markers) {
    if (!marker_visible(pose, m, model, edf)) continue;
    Detection d;
    d.marker_id = m.id;
    for (int c = 0; c < 3; ++c) d.estimate[c] = m.position[c] + model.noise_sigma * noise(rng);
    d.error_m = (d.estimate - m.position).norm();
    out.push_back(d);
  }
  return out;
}

}  // namespace marsupial::mission
