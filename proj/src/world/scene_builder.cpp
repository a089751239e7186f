#include "marsupial/world/scene_builder.hpp"

#include <cmath>

#include "marsupial/common/error.hpp"

namespace marsupial::world {

namespace {

int steps(double length, double spacing) {
  return std::max(1, static_cast<int>(std::ceil(std::abs(length) / spacing - 1e-9)));
}

}  // namespace

SceneBuilder::SceneBuilder(double spacing) : spacing_(spacing) {
  if (!(spacing > 0.0)) throw InvalidArgumentError("scene sample spacing must be > 0");
}

SceneBuilder& SceneBuilder::rect_xy(double x0, double x1, double y0, double y1, double z) {
  const int nx = steps(x1 - x0, spacing_), ny = steps(y1 - y0, spacing_);
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      cloud_.points.emplace_back(x0 + (x1 - x0) * i / nx, y0 + (y1 - y0) * j / ny, z);
    }
  }
  return *this;
}

SceneBuilder& SceneBuilder::rect_xz(double x0, double x1, double z0, double z1, double y) {
  const int nx = steps(x1 - x0, spacing_), nz = steps(z1 - z0, spacing_);
  for (int k = 0; k <= nz; ++k) {
    for (int i = 0; i <= nx; ++i) {
      cloud_.points.emplace_back(x0 + (x1 - x0) * i / nx, y, z0 + (z1 - z0) * k / nz);
    }
  }
  return *this;
}

SceneBuilder& SceneBuilder::rect_yz(double y0, double y1, double z0, double z1, double x) {
  const int ny = steps(y1 - y0, spacing_), nz = steps(z1 - z0, spacing_);
  for (int k = 0; k <= nz; ++k) {
    for (int j = 0; j <= ny; ++j) {
      cloud_.points.emplace_back(x, y0 + (y1 - y0) * j / ny, z0 + (z1 - z0) * k / nz);
    }
  }
  return *this;
}

SceneBuilder& SceneBuilder::box(const Vec3& lo, const Vec3& hi, bool bottom) {
  rect_xy(lo.x(), hi.x(), lo.y(), hi.y(), hi.z());
  if (bottom) rect_xy(lo.x(), hi.x(), lo.y(), hi.y(), lo.z());
  rect_xz(lo.x(), hi.x(), lo.z(), hi.z(), lo.y());
  rect_xz(lo.x(), hi.x(), lo.z(), hi.z(), hi.y());
  rect_yz(lo.y(), hi.y(), lo.z(), hi.z(), lo.x());
  rect_yz(lo.y(), hi.y(), lo.z(), hi.z(), hi.x());
  return *this;
}

SceneBuilder& SceneBuilder::cylinder(const Vec2& center, double radius, double z0, double z1) {
  const int na = steps(2.0 * kPi * radius, spacing_);
  const int nz = steps(z1 - z0, spacing_);
  for (int k = 0; k <= nz; ++k) {
    for (int a = 0; a < na; ++a) {
      const double t = 2.0 * kPi * a / na;
      cloud_.points.emplace_back(center.x() + radius * std::cos(t),
                                 center.y() + radius * std::sin(t), z0 + (z1 - z0) * k / nz);
    }
  }
  const int nr = steps(radius, spacing_);
  for (int r = 0; r < nr; ++r) {
    const double rr = radius * r / nr;
    const int nt = r == 0 ? 1 : steps(2.0 * kPi * rr, spacing_);
    for (int a = 0; a < nt; ++a) {
      const double t = 2.0 * kPi * a / nt;
      cloud_.points.emplace_back(center.x() + rr * std::cos(t), center.y() + rr * std::sin(t), z1);
    }
  }
  return *this;
}

SceneBuilder& SceneBuilder::point(const Vec3& p) {
  cloud_.points.push_back(p);
  return *this;
}

}  // namespace marsupial::world
