#include "marsupial/world/edf.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include <fmt/format.h>

#include "marsupial/common/error.hpp"

namespace marsupial::world {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Above this many node-obstacle pairs the exhaustive method is not used automatically.
constexpr double kBruteForceBudget = 5e7;

// Squared distance transform of one line (lower envelope of parabolas).
// Entries are exact integers (in voxel units squared) or +inf.
void transform_line(const double* f, int n, double* out, std::vector<int>& v,
                    std::vector<double>& z) {
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      continue;
    }
    double s = 0.0;
    while (true) {
      const int p = v[k];
      s = ((f[q] + static_cast<double>(q) * q) - (f[p] + static_cast<double>(p) * p)) /
          (2.0 * q - 2.0 * p);
      if (s <= z[k]) {
        --k;  // z[0] is -inf, so k never drops below 0 here
      } else {
        break;
      }
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  if (k < 0) {
    for (int q = 0; q < n; ++q) out[q] = kInf;
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    const double d = static_cast<double>(q - v[j]);
    out[q] = d * d + f[v[j]];
  }
}

std::vector<double> squared_distance_transform(const VoxelGrid& grid) {
  const auto& g = grid.geometry();
  const auto [nx, ny, nz] = g.dims();
  const std::size_t total = g.node_count();
  std::vector<double> sq(total);
  for (std::size_t i = 0; i < total; ++i) sq[i] = grid.occupied(i) ? 0.0 : kInf;

  const int longest = std::max({nx, ny, nz});
  std::vector<double> line(longest), result(longest), z(longest + 1);
  std::vector<int> v(longest);

  // x pass
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      double* row = &sq[g.linear_index(0, j, k)];
      transform_line(row, nx, result.data(), v, z);
      std::copy(result.begin(), result.begin() + nx, row);
    }
  }
  // y pass
  for (int k = 0; k < nz; ++k) {
    for (int i = 0; i < nx; ++i) {
      for (int j = 0; j < ny; ++j) line[j] = sq[g.linear_index(i, j, k)];
      transform_line(line.data(), ny, result.data(), v, z);
      for (int j = 0; j < ny; ++j) sq[g.linear_index(i, j, k)] = result[j];
    }
  }
  // z pass
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      for (int k = 0; k < nz; ++k) line[k] = sq[g.linear_index(i, j, k)];
      transform_line(line.data(), nz, result.data(), v, z);
      for (int k = 0; k < nz; ++k) sq[g.linear_index(i, j, k)] = result[k];
    }
  }
  return sq;
}

std::vector<double> squared_brute_force(const VoxelGrid& grid) {
  const auto& g = grid.geometry();
  std::vector<GridIndex> obstacles;
  obstacles.reserve(grid.occupied_count());
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    if (grid.occupied(i)) obstacles.push_back(g.grid_index(i));
  }
  std::vector<double> sq(g.node_count());
  for (std::size_t n = 0; n < g.node_count(); ++n) {
    const GridIndex a = g.grid_index(n);
    long best = std::numeric_limits<long>::max();
    for (const auto& o : obstacles) {
      const long dx = a.x - o.x, dy = a.y - o.y, dz = a.z - o.z;
      best = std::min(best, dx * dx + dy * dy + dz * dz);
    }
    sq[n] = static_cast<double>(best);
  }
  return sq;
}

// Cell coordinate along one axis: lower node index and fractional offset.
// Coordinates within 1e-9 of a node snap onto it so node queries are exact.
inline void cell_coordinate(double f, int dim, int& i0, int& i1, double& t) {
  const double r = std::round(f);
  if (std::abs(f - r) < 1e-9) f = r;
  if (dim == 1) {
    i0 = i1 = 0;
    t = 0.0;
    return;
  }
  i0 = static_cast<int>(std::floor(f));
  if (i0 < 0) i0 = 0;
  if (i0 > dim - 2) i0 = dim - 2;
  i1 = i0 + 1;
  t = f - i0;
  if (t < 0.0) t = 0.0;
  if (t > 1.0) t = 1.0;
}

void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xffu);
  out.write(reinterpret_cast<const char*>(b), 4);
}

void write_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xffu);
  out.write(reinterpret_cast<const char*>(b), 8);
}

void write_f64(std::ostream& out, double d) {
  std::uint64_t bits = 0;
  std::memcpy(&bits, &d, sizeof bits);
  write_u64(out, bits);
}

void write_f32(std::ostream& out, float f) {
  std::uint32_t bits = 0;
  std::memcpy(&bits, &f, sizeof bits);
  write_u32(out, bits);
}

std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw ParseError("truncated EDF file");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

double read_f64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw ParseError("truncated EDF file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double d = 0.0;
  std::memcpy(&d, &v, sizeof d);
  return d;
}

float read_f32(std::istream& in) {
  const std::uint32_t v = read_u32(in);
  float f = 0.0f;
  std::memcpy(&f, &v, sizeof f);
  return f;
}

constexpr std::uint32_t kEdfVersion = 1;

}  // namespace

VoxelEDF::VoxelEDF(GridGeometry geometry, std::vector<double> distance, double max_dist)
    : geometry_(std::move(geometry)), distance_(std::move(distance)), max_dist_(max_dist) {
  if (distance_.size() != geometry_.node_count()) {
    throw InvalidArgumentError("EDF value count does not match grid dims");
  }
  if (!(max_dist > 0.0)) throw InvalidArgumentError("EDF max_dist must be > 0");
}

std::optional<EdfSample> VoxelEDF::try_query(const Vec3& p) const {
  if (!geometry_.contains(p)) return std::nullopt;
  const auto& dims = geometry_.dims();
  const double res = geometry_.resolution();
  const Vec3 f = (p - geometry_.origin()) / res;
  int x0, x1, y0, y1, z0, z1;
  double tx, ty, tz;
  cell_coordinate(f.x(), dims[0], x0, x1, tx);
  cell_coordinate(f.y(), dims[1], y0, y1, ty);
  cell_coordinate(f.z(), dims[2], z0, z1, tz);

  const double c000 = node_value(x0, y0, z0), c100 = node_value(x1, y0, z0);
  const double c010 = node_value(x0, y1, z0), c110 = node_value(x1, y1, z0);
  const double c001 = node_value(x0, y0, z1), c101 = node_value(x1, y0, z1);
  const double c011 = node_value(x0, y1, z1), c111 = node_value(x1, y1, z1);

  const double ux = 1.0 - tx, uy = 1.0 - ty, uz = 1.0 - tz;
  EdfSample s;
  s.distance = ((c000 * ux + c100 * tx) * uy + (c010 * ux + c110 * tx) * ty) * uz +
               ((c001 * ux + c101 * tx) * uy + (c011 * ux + c111 * tx) * ty) * tz;
  if (x1 != x0) {
    s.gradient.x() = ((c100 - c000) * uy * uz + (c110 - c010) * ty * uz + (c101 - c001) * uy * tz +
                      (c111 - c011) * ty * tz) /
                     res;
  }
  if (y1 != y0) {
    s.gradient.y() = ((c010 - c000) * ux * uz + (c110 - c100) * tx * uz + (c011 - c001) * ux * tz +
                      (c111 - c101) * tx * tz) /
                     res;
  }
  if (z1 != z0) {
    s.gradient.z() = ((c001 - c000) * ux * uy + (c101 - c100) * tx * uy + (c011 - c010) * ux * ty +
                      (c111 - c110) * tx * ty) /
                     res;
  }
  return s;
}

std::optional<double> VoxelEDF::try_distance(const Vec3& p) const {
  if (auto s = try_query(p)) return s->distance;
  return std::nullopt;
}

EdfSample VoxelEDF::query(const Vec3& p) const {
  if (auto s = try_query(p)) return *s;
  throw OutOfBoundsError(
      fmt::format("EDF query ({:.3f}, {:.3f}, {:.3f}) outside grid", p.x(), p.y(), p.z()));
}

VoxelEDF build_edf(const VoxelGrid& grid, double max_dist, EdfMethod method) {
  if (!(max_dist > 0.0)) throw InvalidArgumentError("max_dist must be > 0");
  if (grid.occupied_count() == 0) throw EmptyInputError("grid has no occupied voxels");

  const auto& g = grid.geometry();
  if (method == EdfMethod::automatic) {
    const double work = static_cast<double>(g.node_count()) * grid.occupied_count();
    method = work <= kBruteForceBudget ? EdfMethod::brute_force : EdfMethod::distance_transform;
  }
  std::vector<double> sq = method == EdfMethod::brute_force ? squared_brute_force(grid)
                                                            : squared_distance_transform(grid);
  const double res = g.resolution();
  for (auto& d : sq) d = std::min(std::sqrt(d) * res, max_dist);
  return VoxelEDF(g, std::move(sq), max_dist);
}

void save_edf(const VoxelEDF& edf, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
  const auto& g = edf.geometry();
  out.write("MEDF", 4);
  write_u32(out, kEdfVersion);
  for (int a = 0; a < 3; ++a) write_f64(out, g.origin()[a]);
  write_f64(out, g.resolution());
  for (int a = 0; a < 3; ++a) write_u32(out, static_cast<std::uint32_t>(g.dims()[a]));
  write_f64(out, edf.max_dist());
  for (const double d : edf.values()) write_f32(out, static_cast<float>(d));
  if (!out) throw IoError(fmt::format("write failed for '{}'", path.string()));
}

VoxelEDF load_edf(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "MEDF", 4) != 0) {
    throw ParseError(fmt::format("'{}' is not an EDF file", path.string()));
  }
  const std::uint32_t version = read_u32(in);
  if (version != kEdfVersion) throw ParseError(fmt::format("unsupported EDF version {}", version));
  Vec3 origin;
  for (int a = 0; a < 3; ++a) origin[a] = read_f64(in);
  const double res = read_f64(in);
  std::array<int, 3> dims{};
  for (int a = 0; a < 3; ++a) dims[a] = static_cast<int>(read_u32(in));
  const double max_dist = read_f64(in);
  GridGeometry geometry(origin, res, dims);
  std::vector<double> values(geometry.node_count());
  for (auto& v : values) v = read_f32(in);
  if (in.peek() != std::char_traits<char>::eof()) throw ParseError("trailing bytes in EDF file");
  return VoxelEDF(std::move(geometry), std::move(values), max_dist);
}

std::vector<Vec3> sample_safe_air(const VoxelEDF& edf, double safety) {
  if (!(safety >= 0.0)) throw InvalidArgumentError("safety distance must be >= 0");
  std::vector<Vec3> out;
  const auto& g = edf.geometry();
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    if (edf.node_value(i) > safety) out.push_back(g.node_position(g.grid_index(i)));
  }
  return out;
}

}  // namespace marsupial::world
