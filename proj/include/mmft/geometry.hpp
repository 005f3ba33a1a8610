#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmft/rng.hpp"
#include "mmft/tensor.hpp"

namespace mmft {

constexpr double kPi = 3.14159265358979323846;

// Wraps an angle to (-pi, pi].
inline double normalize_angle(double a) {
  a = std::fmod(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  if (a > kPi) a -= 2.0 * kPi;
  return a;
}

// Oriented 3D box: center (x,y,z) meters, extents l along local x, w along
// local y, h along z, yaw theta about the vertical axis.
struct Box7 {
  double x = 0, y = 0, z = 0;
  double w = 1, h = 1, l = 1;
  double theta = 0;

  void validate() const {
    if (!(w > 0 && h > 0 && l > 0)) throw std::invalid_argument("box: non-positive extent");
  }
  Box7 normalized() const {
    Box7 b = *this;
    b.theta = normalize_angle(b.theta);
    return b;
  }
  double volume() const { return w * h * l; }
};

// Per-frame prediction: center and yaw only; extents are carried from the
// initial box since the target size is held fixed while tracking.
struct Box4 {
  double x = 0, y = 0, z = 0;
  double theta = 0;

  Box7 with_extents(const Box7& sized) const {
    Box7 b;
    b.x = x;
    b.y = y;
    b.z = z;
    b.w = sized.w;
    b.h = sized.h;
    b.l = sized.l;
    b.theta = normalize_angle(theta);
    return b;
  }
};

// ---------------------------------------------------------------------------
// Camera calibration
// ---------------------------------------------------------------------------

using Mat34 = std::array<double, 12>;  // row-major 3x4

// Composed LiDAR->image projective matrix plus its inverse mapping (valid
// given a per-pixel depth) and the image extents.
struct Calib {
  Mat34 lidar_to_image{};
  std::array<double, 9> m_inv{};   // inverse of the left 3x3 block
  std::array<double, 3> p4{};      // fourth column
  size_t image_width = 0;
  size_t image_height = 0;

  struct Projection {
    double u, v, depth;
  };

  Projection project(double x, double y, double z) const {
    const auto& P = lidar_to_image;
    const double hu = P[0] * x + P[1] * y + P[2] * z + P[3];
    const double hv = P[4] * x + P[5] * y + P[6] * z + P[7];
    const double hw = P[8] * x + P[9] * y + P[10] * z + P[11];
    return {hu / hw, hv / hw, hw};
  }

  // Inverse of project: pixel (u, v) with depth d back to a LiDAR-frame point.
  std::array<double, 3> unproject(double u, double v, double depth) const {
    const double bx = depth * u - p4[0];
    const double by = depth * v - p4[1];
    const double bz = depth - p4[2];
    return {m_inv[0] * bx + m_inv[1] * by + m_inv[2] * bz,
            m_inv[3] * bx + m_inv[4] * by + m_inv[5] * bz,
            m_inv[6] * bx + m_inv[7] * by + m_inv[8] * bz};
  }
};

inline Calib make_calib(const Mat34& P, size_t image_width, size_t image_height) {
  Calib c;
  c.lidar_to_image = P;
  c.image_width = image_width;
  c.image_height = image_height;
  const double a = P[0], b = P[1], cc = P[2];
  const double d = P[4], e = P[5], f = P[6];
  const double g = P[8], h = P[9], i = P[10];
  const double det = a * (e * i - f * h) - b * (d * i - f * g) + cc * (d * h - e * g);
  if (std::abs(det) < 1e-15) throw std::invalid_argument("calib: singular projection block");
  const double inv = 1.0 / det;
  c.m_inv = {(e * i - f * h) * inv, (cc * h - b * i) * inv, (b * f - cc * e) * inv,
             (f * g - d * i) * inv, (a * i - cc * g) * inv, (cc * d - a * f) * inv,
             (d * h - e * g) * inv, (b * g - a * h) * inv, (a * e - b * d) * inv};
  c.p4 = {P[3], P[7], P[11]};
  return c;
}

struct ProjectedPoints {
  Tensor pixels;               // [n x 2] fractional (u, v)
  Tensor depth;                // [n]
  std::vector<uint8_t> in_view;  // depth > 0 and rounded pixel inside the image
};

// Rounded half-away-from-zero; the depth map and painting use the same rule.
inline long nearest_pixel(double v) { return std::lround(v); }

inline ProjectedPoints project_points(const Tensor& points, const Calib& calib) {
  if (points.rank() != 2 || points.extent(1) < 3)
    throw std::invalid_argument("project_points: points must be n x >=3");
  const size_t n = points.extent(0);
  ProjectedPoints out{Tensor({n, 2}), Tensor({n}), std::vector<uint8_t>(n, 0)};
  for (size_t i = 0; i < n; ++i) {
    const auto pr = calib.project(points.at(i, 0), points.at(i, 1), points.at(i, 2));
    out.pixels.at(i, 0) = pr.u;
    out.pixels.at(i, 1) = pr.v;
    out.depth[i] = pr.depth;
    if (pr.depth > 0) {
      const long col = nearest_pixel(pr.u), row = nearest_pixel(pr.v);
      out.in_view[i] = col >= 0 && col < static_cast<long>(calib.image_width) && row >= 0 &&
                       row < static_cast<long>(calib.image_height);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rotated-box IoU
// ---------------------------------------------------------------------------

namespace detail {

using Poly = std::vector<std::array<double, 2>>;

inline Poly box_footprint(const Box7& b) {
  const double c = std::cos(b.theta), s = std::sin(b.theta);
  const double hx = b.l * 0.5, hy = b.w * 0.5;
  Poly out(4);
  const double lx[4] = {hx, -hx, -hx, hx};
  const double ly[4] = {hy, hy, -hy, -hy};  // counterclockwise
  for (int i = 0; i < 4; ++i)
    out[i] = {b.x + c * lx[i] - s * ly[i], b.y + s * lx[i] + c * ly[i]};
  return out;
}

inline double polygon_area(const Poly& p) {
  if (p.size() < 3) return 0.0;
  double a = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    const auto& u = p[i];
    const auto& v = p[(i + 1) % p.size()];
    a += u[0] * v[1] - v[0] * u[1];
  }
  return std::abs(a) * 0.5;
}

// Sutherland-Hodgman clip of `subject` against convex counterclockwise `clip`.
inline Poly clip_polygon(Poly subject, const Poly& clip) {
  for (size_t e = 0; e < clip.size() && !subject.empty(); ++e) {
    const auto& a = clip[e];
    const auto& b = clip[(e + 1) % clip.size()];
    const double ex = b[0] - a[0], ey = b[1] - a[1];
    auto side = [&](const std::array<double, 2>& p) {
      return ex * (p[1] - a[1]) - ey * (p[0] - a[0]);
    };
    Poly out;
    out.reserve(subject.size() + 4);
    for (size_t i = 0; i < subject.size(); ++i) {
      const auto& cur = subject[i];
      const auto& prev = subject[(i + subject.size() - 1) % subject.size()];
      const double sc = side(cur), sp = side(prev);
      if (sc >= 0) {
        if (sp < 0) {
          const double t = sp / (sp - sc);
          out.push_back({prev[0] + t * (cur[0] - prev[0]), prev[1] + t * (cur[1] - prev[1])});
        }
        out.push_back(cur);
      } else if (sp >= 0) {
        const double t = sp / (sp - sc);
        out.push_back({prev[0] + t * (cur[0] - prev[0]), prev[1] + t * (cur[1] - prev[1])});
      }
    }
    subject = std::move(out);
  }
  return subject;
}

}  // namespace detail

// Intersection area of the two rotated footprints.
inline double footprint_intersection_area(const Box7& a, const Box7& b) {
  auto poly = detail::clip_polygon(detail::box_footprint(a), detail::box_footprint(b));
  if (poly.size() < 3) return 0.0;
  return detail::polygon_area(poly);
}

// 3D IoU of two yawed boxes: polygon-clipped footprint intersection times the
// vertical overlap.
inline double rotated_iou_3d(const Box7& a, const Box7& b) {
  a.validate();
  b.validate();
  const double inter_area = footprint_intersection_area(a, b);
  const double za0 = a.z - a.h * 0.5, za1 = a.z + a.h * 0.5;
  const double zb0 = b.z - b.h * 0.5, zb1 = b.z + b.h * 0.5;
  const double dz = std::max(0.0, std::min(za1, zb1) - std::max(za0, zb0));
  const double inter = inter_area * dz;
  const double uni = a.volume() + b.volume() - inter;
  return uni > 0 ? inter / uni : 0.0;
}

// ---------------------------------------------------------------------------
// Grids
// ---------------------------------------------------------------------------

// Local voxel/BEV grid around a crop center. x-y range is symmetric
// ([-range, +range]); z is an absolute band relative to the crop center.
// BEV rows index y, columns index x.
struct GridSpec {
  double range_x = 3.2, range_y = 3.2;
  double z_lo = -3.0, z_hi = 1.0;
  double voxel_x = 0.025, voxel_y = 0.025, voxel_z = 0.05;
  size_t max_points_per_voxel = 5;
  size_t bev_stride = 8;

  static size_t ceil_div(double span, double step) {
    return static_cast<size_t>(std::ceil(span / step - 1e-9));
  }

  size_t nx() const { return ceil_div(2 * range_x, voxel_x); }
  size_t ny() const { return ceil_div(2 * range_y, voxel_y); }
  size_t nz() const { return ceil_div(z_hi - z_lo, voxel_z); }
  size_t bev_w() const { return (nx() + bev_stride - 1) / bev_stride; }
  size_t bev_h() const { return (ny() + bev_stride - 1) / bev_stride; }
  double bev_cell_x() const { return voxel_x * static_cast<double>(bev_stride); }
  double bev_cell_y() const { return voxel_y * static_cast<double>(bev_stride); }

  bool voxel_of(double x, double y, double z, size_t& ix, size_t& iy, size_t& iz) const {
    if (x < -range_x || x >= range_x || y < -range_y || y >= range_y || z < z_lo || z >= z_hi)
      return false;
    ix = static_cast<size_t>((x + range_x) / voxel_x);
    iy = static_cast<size_t>((y + range_y) / voxel_y);
    iz = static_cast<size_t>((z - z_lo) / voxel_z);
    if (ix >= nx() || iy >= ny() || iz >= nz()) return false;  // float edge
    return true;
  }

  bool bev_cell_of(double x, double y, size_t& row, size_t& col) const {
    if (x < -range_x || x >= range_x || y < -range_y || y >= range_y) return false;
    col = static_cast<size_t>((x + range_x) / bev_cell_x());
    row = static_cast<size_t>((y + range_y) / bev_cell_y());
    if (col >= bev_w() || row >= bev_h()) return false;
    return true;
  }

  double bev_cell_center_x(size_t col) const {
    return -range_x + (static_cast<double>(col) + 0.5) * bev_cell_x();
  }
  double bev_cell_center_y(size_t row) const {
    return -range_y + (static_cast<double>(row) + 0.5) * bev_cell_y();
  }
};

// Category presets: the per-class crop ranges and voxel sizes used by the
// tracker configs. Height band matches the KITTI setting.
inline GridSpec grid_preset(const std::string& category) {
  GridSpec g;
  if (category == "car") {
    g.range_x = g.range_y = 3.2;
    g.voxel_x = g.voxel_y = 0.025;
  } else if (category == "van") {
    g.range_x = g.range_y = 4.5;
    g.voxel_x = g.voxel_y = 0.0375;
  } else if (category == "pedestrian") {
    g.range_x = g.range_y = 1.2;
    g.voxel_x = g.voxel_y = 0.025;
  } else if (category == "cyclist") {
    g.range_x = g.range_y = 1.8;
    g.voxel_x = g.voxel_y = 0.025;
  } else {
    throw std::invalid_argument("unknown category preset: " + category);
  }
  g.voxel_z = 0.05;
  g.z_lo = -3.0;
  g.z_hi = 1.0;
  return g;
}

// ---------------------------------------------------------------------------
// Crops, masks, voxels, pillars
// ---------------------------------------------------------------------------

struct CroppedPoints {
  Tensor points;                // [m x d] rows translated into the local frame
  std::vector<size_t> indices;  // rows kept, into the input
};

// Translates rows into the frame centered at `center` (no rotation) and keeps
// the ones inside the grid's x/y/z band. Row layout is preserved; columns
// past xyz ride along untouched.
inline CroppedPoints crop_points(const Tensor& points, const std::array<double, 3>& center,
                                 const GridSpec& grid) {
  if (points.numel() != 0 && (points.rank() != 2 || points.extent(1) < 3))
    throw std::invalid_argument("crop_points: points must be n x >=3");
  const size_t n = points.numel() ? points.extent(0) : 0;
  const size_t d = points.numel() ? points.extent(1) : 3;
  std::vector<double> rows;
  std::vector<size_t> kept;
  for (size_t i = 0; i < n; ++i) {
    const double lx = points.at(i, 0) - center[0];
    const double ly = points.at(i, 1) - center[1];
    const double lz = points.at(i, 2) - center[2];
    if (lx < -grid.range_x || lx >= grid.range_x || ly < -grid.range_y || ly >= grid.range_y ||
        lz < grid.z_lo || lz >= grid.z_hi)
      continue;
    rows.push_back(lx);
    rows.push_back(ly);
    rows.push_back(lz);
    for (size_t c = 3; c < d; ++c) rows.push_back(points.at(i, c));
    kept.push_back(i);
  }
  return {Tensor({kept.size(), d}, std::move(rows)), std::move(kept)};
}

// True where the point, rotated into the box frame, lies within the
// half-extents (boundary inclusive).
inline std::vector<uint8_t> box_points_mask(const Tensor& points, const Box7& box) {
  const size_t n = points.numel() ? points.extent(0) : 0;
  std::vector<uint8_t> mask(n, 0);
  const double c = std::cos(box.theta), s = std::sin(box.theta);
  for (size_t i = 0; i < n; ++i) {
    const double dx = points.at(i, 0) - box.x;
    const double dy = points.at(i, 1) - box.y;
    const double dz = points.at(i, 2) - box.z;
    const double lx = c * dx + s * dy;
    const double ly = -s * dx + c * dy;
    mask[i] = std::abs(lx) <= box.l * 0.5 && std::abs(ly) <= box.w * 0.5 &&
              std::abs(dz) <= box.h * 0.5;
  }
  return mask;
}

struct Voxel {
  size_t ix, iy, iz;
  std::vector<size_t> point_indices;  // <= max_points_per_voxel, input order
};

// Buckets local-frame points into voxels, dropping out-of-range rows. When a
// voxel holds more than the cap, a seeded sample without replacement keeps
// max_points_per_voxel of them; voxels at or under the cap keep all points in
// input order, so re-voxelizing retained points is a no-op.
inline std::vector<Voxel> voxelize(const Tensor& points, const GridSpec& grid, uint64_t seed) {
  const size_t n = points.numel() ? points.extent(0) : 0;
  std::map<std::array<size_t, 3>, std::vector<size_t>> cells;
  for (size_t i = 0; i < n; ++i) {
    size_t ix, iy, iz;
    if (!grid.voxel_of(points.at(i, 0), points.at(i, 1), points.at(i, 2), ix, iy, iz)) continue;
    cells[{ix, iy, iz}].push_back(i);
  }
  std::vector<Voxel> out;
  out.reserve(cells.size());
  for (auto& [key, idx] : cells) {
    Voxel v{key[0], key[1], key[2], {}};
    if (idx.size() <= grid.max_points_per_voxel) {
      v.point_indices = std::move(idx);
    } else {
      const uint64_t cell_salt =
          (static_cast<uint64_t>(key[0]) << 42) ^ (static_cast<uint64_t>(key[1]) << 21) ^
          static_cast<uint64_t>(key[2]);
      SplitMix64 rng = named_stream(seed, "voxel.sample", cell_salt);
      auto pick = sample_without_replacement(idx.size(), grid.max_points_per_voxel, rng);
      std::sort(pick.begin(), pick.end());
      for (size_t p : pick) v.point_indices.push_back(idx[p]);
    }
    out.push_back(std::move(v));
  }
  return out;
}

// Collapses per-point features into the BEV grid by channelwise max; empty
// cells stay zero.
inline Tensor pillarize(const Tensor& coords, const Tensor& feats, const GridSpec& grid) {
  const size_t n = coords.numel() ? coords.extent(0) : 0;
  const size_t d = feats.numel() ? feats.extent(1) : (feats.rank() == 2 ? feats.extent(1) : 0);
  if (n != (feats.numel() ? feats.extent(0) : 0))
    throw std::invalid_argument("pillarize: coords/feats row mismatch");
  const size_t H = grid.bev_h(), W = grid.bev_w();
  Tensor out({H, W, d});
  std::vector<uint8_t> seen(H * W, 0);
  for (size_t i = 0; i < n; ++i) {
    size_t row, col;
    if (!grid.bev_cell_of(coords.at(i, 0), coords.at(i, 1), row, col)) continue;
    double* cell = out.data().data() + (row * W + col) * d;
    if (!seen[row * W + col]) {
      for (size_t c = 0; c < d; ++c) cell[c] = feats.at(i, c);
      seen[row * W + col] = 1;
    } else {
      for (size_t c = 0; c < d; ++c) cell[c] = std::max(cell[c], feats.at(i, c));
    }
  }
  ensure_finite(out, "pillarize");
  return out;
}

// Footprint occupancy on an arbitrary-resolution BEV-aligned grid: cell = 1
// iff the cell center lies inside the box footprint.
inline Tensor footprint_mask_on_grid(const Box7& box, size_t rows, size_t cols, double cell_y,
                                     double cell_x, double range_y, double range_x) {
  Tensor out({rows, cols, 1});
  const double c = std::cos(box.theta), s = std::sin(box.theta);
  for (size_t r = 0; r < rows; ++r) {
    const double y = -range_y + (static_cast<double>(r) + 0.5) * cell_y;
    for (size_t cc = 0; cc < cols; ++cc) {
      const double x = -range_x + (static_cast<double>(cc) + 0.5) * cell_x;
      const double dx = x - box.x, dy = y - box.y;
      const double lx = c * dx + s * dy;
      const double ly = -s * dx + c * dy;
      out.at(r, cc, 0) =
          (std::abs(lx) <= box.l * 0.5 && std::abs(ly) <= box.w * 0.5) ? 1.0 : 0.0;
    }
  }
  return out;
}

inline Tensor bev_footprint_mask(const Box7& box, const GridSpec& grid) {
  return footprint_mask_on_grid(box, grid.bev_h(), grid.bev_w(), grid.bev_cell_y(),
                                grid.bev_cell_x(), grid.range_y, grid.range_x);
}

}  // namespace mmft
