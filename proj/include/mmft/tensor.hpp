#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace mmft {

// Dense row-major tensor of doubles. All feature maps, similarity maps and
// network weights are carried in this one type; shapes are checked at the op
// boundaries and every op output is verified finite.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<size_t> shape) : shape_(std::move(shape)) {
    data_.assign(numel_of(shape_), 0.0);
  }

  Tensor(std::vector<size_t> shape, std::vector<double> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (numel_of(shape_) != data_.size())
      throw std::invalid_argument("tensor: shape/data size mismatch");
  }

  static Tensor zeros(std::vector<size_t> shape) { return Tensor(std::move(shape)); }

  static Tensor full(std::vector<size_t> shape, double v) {
    Tensor t(std::move(shape));
    std::fill(t.data_.begin(), t.data_.end(), v);
    return t;
  }

  const std::vector<size_t>& shape() const { return shape_; }
  size_t rank() const { return shape_.size(); }
  size_t extent(size_t axis) const { return shape_.at(axis); }
  size_t numel() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  double& operator[](size_t i) { return data_[i]; }
  double operator[](size_t i) const { return data_[i]; }

  double& at(size_t i, size_t j) { return data_[i * shape_[1] + j]; }
  double at(size_t i, size_t j) const { return data_[i * shape_[1] + j]; }

  double& at(size_t i, size_t j, size_t k) {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }
  double at(size_t i, size_t j, size_t k) const {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }

  double& at(size_t i, size_t j, size_t k, size_t l) {
    return data_[((i * shape_[1] + j) * shape_[2] + k) * shape_[3] + l];
  }
  double at(size_t i, size_t j, size_t k, size_t l) const {
    return data_[((i * shape_[1] + j) * shape_[2] + k) * shape_[3] + l];
  }

  // Reinterprets the layout without touching data.
  Tensor reshaped(std::vector<size_t> shape) const {
    if (numel_of(shape) != data_.size()) throw std::invalid_argument("reshape: numel mismatch");
    return Tensor(std::move(shape), data_);
  }

  static size_t numel_of(const std::vector<size_t>& shape) {
    size_t n = 1;
    for (size_t e : shape) n *= e;
    return shape.empty() ? 0 : n;
  }

 private:
  std::vector<size_t> shape_;
  std::vector<double> data_;
};

inline void ensure_finite(const Tensor& t, const char* where) {
  for (double v : t.data())
    if (!std::isfinite(v)) throw std::runtime_error(std::string("non-finite value in ") + where);
}

inline void ensure_finite(double v, const char* where) {
  if (!std::isfinite(v)) throw std::runtime_error(std::string("non-finite value in ") + where);
}

// ---------------------------------------------------------------------------
// Kernels
// ---------------------------------------------------------------------------

// Row-major matrix product [m x k] * [k x n] -> [m x n].
inline Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2) throw std::invalid_argument("matmul: rank-2 operands required");
  const size_t m = a.extent(0), k = a.extent(1), n = b.extent(1);
  if (b.extent(0) != k) throw std::invalid_argument("matmul: inner extents differ");
  Tensor out({m, n});
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* po = out.data().data();
  for (size_t i = 0; i < m; ++i) {
    for (size_t kk = 0; kk < k; ++kk) {
      const double av = pa[i * k + kk];
      if (av == 0.0) continue;
      const double* pbr = pb + kk * n;
      double* por = po + i * n;
      for (size_t j = 0; j < n; ++j) por[j] += av * pbr[j];
    }
  }
  ensure_finite(out, "matmul");
  return out;
}

// B transposed variant: [m x k] * [n x k]^T -> [m x n]. Attention score helper.
inline Tensor matmul_bt(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2) throw std::invalid_argument("matmul_bt: rank-2 operands required");
  const size_t m = a.extent(0), k = a.extent(1), n = b.extent(0);
  if (b.extent(1) != k) throw std::invalid_argument("matmul_bt: inner extents differ");
  Tensor out({m, n});
  for (size_t i = 0; i < m; ++i)
    for (size_t j = 0; j < n; ++j) {
      double s = 0.0;
      const double* pa = a.data().data() + i * k;
      const double* pb = b.data().data() + j * k;
      for (size_t kk = 0; kk < k; ++kk) s += pa[kk] * pb[kk];
      out.at(i, j) = s;
    }
  ensure_finite(out, "matmul_bt");
  return out;
}

// Softmax along `axis`, max-subtracted for stability. Rows along the axis
// come out non-negative and summing to one.
inline Tensor softmax(const Tensor& x, size_t axis) {
  if (axis >= x.rank()) throw std::invalid_argument("softmax: axis out of range");
  const size_t extent = x.extent(axis);
  if (extent == 0) throw std::invalid_argument("softmax: empty axis");
  size_t inner = 1, outer = 1;
  for (size_t i = axis + 1; i < x.rank(); ++i) inner *= x.extent(i);
  for (size_t i = 0; i < axis; ++i) outer *= x.extent(i);

  Tensor out(x.shape());
  for (size_t o = 0; o < outer; ++o)
    for (size_t in = 0; in < inner; ++in) {
      const size_t base = o * extent * inner + in;
      double mx = -std::numeric_limits<double>::infinity();
      for (size_t e = 0; e < extent; ++e) mx = std::max(mx, x[base + e * inner]);
      double sum = 0.0;
      for (size_t e = 0; e < extent; ++e) {
        double v = std::exp(x[base + e * inner] - mx);
        out[base + e * inner] = v;
        sum += v;
      }
      for (size_t e = 0; e < extent; ++e) out[base + e * inner] /= sum;
    }
  ensure_finite(out, "softmax");
  return out;
}

// Layer normalization over the last axis: standardize each row (population
// variance), then apply the affine pair.
inline Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                         double eps = 1e-6) {
  if (x.rank() == 0) throw std::invalid_argument("layer_norm: scalar input");
  const size_t d = x.extent(x.rank() - 1);
  if (d == 0) throw std::invalid_argument("layer_norm: zero-width rows");
  if (gamma.numel() != d || beta.numel() != d)
    throw std::invalid_argument("layer_norm: affine width mismatch");
  if (!(eps > 0)) throw std::invalid_argument("layer_norm: eps must be positive");

  const size_t rows = x.numel() / d;
  Tensor out(x.shape());
  for (size_t r = 0; r < rows; ++r) {
    const double* px = x.data().data() + r * d;
    double* po = out.data().data() + r * d;
    double mean = 0.0;
    for (size_t c = 0; c < d; ++c) mean += px[c];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (size_t c = 0; c < d; ++c) {
      const double dv = px[c] - mean;
      var += dv * dv;
    }
    var /= static_cast<double>(d);
    const double inv = 1.0 / std::sqrt(var + eps);
    for (size_t c = 0; c < d; ++c) po[c] = (px[c] - mean) * inv * gamma[c] + beta[c];
  }
  ensure_finite(out, "layer_norm");
  return out;
}

// 2D cross-correlation (deep-learning convolution, no kernel flip).
// input [H x W x Cin], kernel [kh x kw x Cin x Cout], zero padding `pad`,
// output [H' x W' x Cout] with H' = floor((H + 2p - kh)/stride) + 1.
inline Tensor conv2d(const Tensor& input, const Tensor& kernel, size_t stride, size_t pad) {
  if (input.rank() != 3 || kernel.rank() != 4)
    throw std::invalid_argument("conv2d: input must be HxWxC, kernel khxkwxCinxCout");
  if (stride == 0) throw std::invalid_argument("conv2d: stride must be positive");
  const size_t H = input.extent(0), W = input.extent(1), Cin = input.extent(2);
  const size_t kh = kernel.extent(0), kw = kernel.extent(1);
  if (kernel.extent(2) != Cin) throw std::invalid_argument("conv2d: channel mismatch");
  const size_t Cout = kernel.extent(3);
  if (kh > H + 2 * pad || kw > W + 2 * pad)
    throw std::invalid_argument("conv2d: kernel larger than padded input");

  const size_t Ho = (H + 2 * pad - kh) / stride + 1;
  const size_t Wo = (W + 2 * pad - kw) / stride + 1;
  Tensor out({Ho, Wo, Cout});
  for (size_t oy = 0; oy < Ho; ++oy)
    for (size_t ox = 0; ox < Wo; ++ox) {
      double* po = out.data().data() + (oy * Wo + ox) * Cout;
      for (size_t ky = 0; ky < kh; ++ky) {
        const long iy = static_cast<long>(oy * stride + ky) - static_cast<long>(pad);
        if (iy < 0 || iy >= static_cast<long>(H)) continue;
        for (size_t kx = 0; kx < kw; ++kx) {
          const long ix = static_cast<long>(ox * stride + kx) - static_cast<long>(pad);
          if (ix < 0 || ix >= static_cast<long>(W)) continue;
          const double* pi = input.data().data() + (iy * W + ix) * Cin;
          const double* pk = kernel.data().data() + (ky * kw + kx) * Cin * Cout;
          for (size_t ci = 0; ci < Cin; ++ci) {
            const double iv = pi[ci];
            if (iv == 0.0) continue;
            const double* pkc = pk + ci * Cout;
            for (size_t co = 0; co < Cout; ++co) po[co] += iv * pkc[co];
          }
        }
      }
    }
  ensure_finite(out, "conv2d");
  return out;
}

// Bilinear interpolation on map [H x W x C] at fractional (row, col) points
// [n x 2]. Out-of-range coordinates clamp to the border.
inline Tensor bilinear_sample(const Tensor& map, const Tensor& points) {
  if (map.rank() != 3 || points.rank() != 2 || points.extent(1) != 2)
    throw std::invalid_argument("bilinear_sample: map HxWxC, points nx2 required");
  const size_t H = map.extent(0), W = map.extent(1), C = map.extent(2);
  const size_t n = points.extent(0);
  Tensor out({n, C});
  for (size_t i = 0; i < n; ++i) {
    double r = std::clamp(points.at(i, 0), 0.0, static_cast<double>(H - 1));
    double c = std::clamp(points.at(i, 1), 0.0, static_cast<double>(W - 1));
    const size_t r0 = static_cast<size_t>(std::floor(r));
    const size_t c0 = static_cast<size_t>(std::floor(c));
    const size_t r1 = std::min(r0 + 1, H - 1);
    const size_t c1 = std::min(c0 + 1, W - 1);
    const double fr = r - static_cast<double>(r0);
    const double fc = c - static_cast<double>(c0);
    for (size_t ch = 0; ch < C; ++ch) {
      const double v00 = map.at(r0, c0, ch), v01 = map.at(r0, c1, ch);
      const double v10 = map.at(r1, c0, ch), v11 = map.at(r1, c1, ch);
      out.at(i, ch) = v00 * (1 - fr) * (1 - fc) + v01 * (1 - fr) * fc +
                      v10 * fr * (1 - fc) + v11 * fr * fc;
    }
  }
  ensure_finite(out, "bilinear_sample");
  return out;
}

// Cosine similarity of two equal-length vectors; eps guards zero vectors.
inline double cosine_sim(const Tensor& a, const Tensor& b, double eps = 1e-12) {
  if (a.numel() != b.numel() || a.numel() == 0)
    throw std::invalid_argument("cosine_sim: equal nonzero lengths required");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.numel(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  double v = dot / (std::max(std::sqrt(na), eps) * std::max(std::sqrt(nb), eps));
  ensure_finite(v, "cosine_sim");
  return v;
}

inline double cosine_sim_rows(const double* a, const double* b, size_t d, double eps = 1e-12) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < d; ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return dot / (std::max(std::sqrt(na), eps) * std::max(std::sqrt(nb), eps));
}

enum class PoolMode { kMax, kAvg };

// Per-channel reduction over the first axis of [n x d].
inline Tensor pool(const Tensor& x, PoolMode mode) {
  if (x.rank() != 2) throw std::invalid_argument("pool: rank-2 input required");
  const size_t n = x.extent(0), d = x.extent(1);
  if (n == 0) throw std::invalid_argument("pool: empty input");
  Tensor out({d});
  if (mode == PoolMode::kMax) {
    for (size_t c = 0; c < d; ++c) {
      double m = x.at(0, c);
      for (size_t r = 1; r < n; ++r) m = std::max(m, x.at(r, c));
      out[c] = m;
    }
  } else {
    for (size_t r = 0; r < n; ++r)
      for (size_t c = 0; c < d; ++c) out[c] += x.at(r, c);
    for (size_t c = 0; c < d; ++c) out[c] /= static_cast<double>(n);
  }
  ensure_finite(out, "pool");
  return out;
}

inline double relu(double v) { return v > 0.0 ? v : 0.0; }

inline double sigmoid(double v) {
  return v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
}

// log(sigmoid(x)) and log(1 - sigmoid(x)) without overflow.
inline double log_sigmoid(double v) { return v >= 0.0 ? -std::log1p(std::exp(-v)) : v - std::log1p(std::exp(v)); }
inline double log1m_sigmoid(double v) { return log_sigmoid(-v); }

}  // namespace mmft
