#pragma once

// Reference implementations used by the test suites and the CLI selftest.
// Everything here is written as the most direct translation of the defining
// formula (plain loops, no shared code with the library kernels) so the two
// paths can be checked against each other.

#include <algorithm>
#include <cmath>
#include <vector>

#include "mmft/geometry.hpp"
#include "mmft/tensor.hpp"

namespace mmft::oracle {

inline Tensor matmul_naive(const Tensor& a, const Tensor& b) {
  const size_t m = a.extent(0), k = a.extent(1), n = b.extent(1);
  Tensor out({m, n});
  for (size_t i = 0; i < m; ++i)
    for (size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (size_t kk = 0; kk < k; ++kk) s += a.at(i, kk) * b.at(kk, j);
      out.at(i, j) = s;
    }
  return out;
}

inline std::vector<double> softmax_naive(const std::vector<double>& x) {
  std::vector<double> out(x.size());
  double sum = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    out[i] = std::exp(x[i]);
    sum += out[i];
  }
  for (auto& v : out) v /= sum;
  return out;
}

inline Tensor conv2d_naive(const Tensor& input, const Tensor& kernel, size_t stride, size_t pad) {
  const size_t H = input.extent(0), W = input.extent(1), Cin = input.extent(2);
  const size_t kh = kernel.extent(0), kw = kernel.extent(1), Cout = kernel.extent(3);
  const size_t Ho = (H + 2 * pad - kh) / stride + 1;
  const size_t Wo = (W + 2 * pad - kw) / stride + 1;
  Tensor out({Ho, Wo, Cout});
  for (size_t oy = 0; oy < Ho; ++oy)
    for (size_t ox = 0; ox < Wo; ++ox)
      for (size_t co = 0; co < Cout; ++co) {
        double s = 0.0;
        for (size_t ky = 0; ky < kh; ++ky)
          for (size_t kx = 0; kx < kw; ++kx)
            for (size_t ci = 0; ci < Cin; ++ci) {
              const long iy = static_cast<long>(oy * stride + ky) - static_cast<long>(pad);
              const long ix = static_cast<long>(ox * stride + kx) - static_cast<long>(pad);
              const double iv = (iy >= 0 && iy < static_cast<long>(H) && ix >= 0 &&
                                 ix < static_cast<long>(W))
                                    ? input.at(iy, ix, ci)
                                    : 0.0;
              s += iv * kernel.at(ky, kx, ci, co);
            }
        out.at(oy, ox, co) = s;
      }
  return out;
}

// Closed-form four-term bilinear interpolation at one clamped point.
inline double bilinear_naive(const Tensor& map, double r, double c, size_t ch) {
  const size_t H = map.extent(0), W = map.extent(1);
  r = std::clamp(r, 0.0, static_cast<double>(H - 1));
  c = std::clamp(c, 0.0, static_cast<double>(W - 1));
  const size_t r0 = static_cast<size_t>(std::floor(r)), c0 = static_cast<size_t>(std::floor(c));
  const size_t r1 = std::min(r0 + 1, H - 1), c1 = std::min(c0 + 1, W - 1);
  const double fr = r - r0, fc = c - c0;
  return map.at(r0, c0, ch) * (1 - fr) * (1 - fc) + map.at(r0, c1, ch) * (1 - fr) * fc +
         map.at(r1, c0, ch) * fr * (1 - fc) + map.at(r1, c1, ch) * fr * fc;
}

// Midpoint grid sampling of the footprint intersection over the overlap of
// the two axis-aligned bounding rectangles; box areas themselves are exact.
inline double iou3d_grid_oracle(const Box7& a, const Box7& b, size_t samples_per_axis) {
  auto bbox = [](const Box7& bx, double& x0, double& x1, double& y0, double& y1) {
    const double c = std::abs(std::cos(bx.theta)), s = std::abs(std::sin(bx.theta));
    const double ex = 0.5 * (bx.l * c + bx.w * s);
    const double ey = 0.5 * (bx.l * s + bx.w * c);
    x0 = bx.x - ex;
    x1 = bx.x + ex;
    y0 = bx.y - ey;
    y1 = bx.y + ey;
  };
  double ax0, ax1, ay0, ay1, bx0, bx1, by0, by1;
  bbox(a, ax0, ax1, ay0, ay1);
  bbox(b, bx0, bx1, by0, by1);
  const double x0 = std::max(ax0, bx0), x1 = std::min(ax1, bx1);
  const double y0 = std::max(ay0, by0), y1 = std::min(ay1, by1);

  double inter_area = 0.0;
  if (x1 > x0 && y1 > y0) {
    auto inside = [](const Box7& bx, double x, double y) {
      const double c = std::cos(bx.theta), s = std::sin(bx.theta);
      const double dx = x - bx.x, dy = y - bx.y;
      const double lx = c * dx + s * dy, ly = -s * dx + c * dy;
      return std::abs(lx) <= bx.l * 0.5 && std::abs(ly) <= bx.w * 0.5;
    };
    const double sx = (x1 - x0) / samples_per_axis;
    const double sy = (y1 - y0) / samples_per_axis;
    size_t hits = 0;
    for (size_t i = 0; i < samples_per_axis; ++i)
      for (size_t j = 0; j < samples_per_axis; ++j) {
        const double x = x0 + (i + 0.5) * sx;
        const double y = y0 + (j + 0.5) * sy;
        if (inside(a, x, y) && inside(b, x, y)) ++hits;
      }
    inter_area = static_cast<double>(hits) * sx * sy;
  }

  const double za0 = a.z - a.h * 0.5, za1 = a.z + a.h * 0.5;
  const double zb0 = b.z - b.h * 0.5, zb1 = b.z + b.h * 0.5;
  const double dz = std::max(0.0, std::min(za1, zb1) - std::max(za0, zb0));
  const double inter = inter_area * dz;
  const double uni = a.volume() + b.volume() - inter;
  return uni > 0 ? inter / uni : 0.0;
}

// Direct threshold enumeration used to pin the metric AUC conventions.
inline double success_auc_naive(const std::vector<double>& ious) {
  double acc = 0.0;
  for (int t = 0; t <= 100; ++t) {
    const double thr = static_cast<double>(t) / 100.0;
    size_t n = 0;
    for (double v : ious)
      if (v > thr) ++n;
    acc += static_cast<double>(n) / static_cast<double>(ious.size());
  }
  return acc / 101.0 * 100.0;
}

inline double precision_auc_naive(const std::vector<double>& errs) {
  double acc = 0.0;
  for (int t = 0; t <= 100; ++t) {
    const double thr = static_cast<double>(t) * 0.02;
    size_t n = 0;
    for (double v : errs)
      if (v < thr) ++n;
    acc += static_cast<double>(n) / static_cast<double>(errs.size());
  }
  return acc / 101.0 * 100.0;
}

}  // namespace mmft::oracle
