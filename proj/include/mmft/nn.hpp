#pragma once

#include <string>
#include <vector>

#include "mmft/tensor.hpp"
#include "mmft/weights.hpp"

namespace mmft {

enum class Activation { kRelu, kNone };

// Chain of affine layers with per-layer activation. Parameter names are
// "<prefix>.w<i>" / "<prefix>.b<i>"; weight i has shape [widths[i] x
// widths[i+1]] and the input is batched over all leading extents.
struct MlpSpec {
  std::vector<size_t> widths;       // in, hidden..., out
  std::vector<Activation> acts;     // one per layer (widths.size() - 1)
  std::string prefix;

  size_t layers() const { return widths.empty() ? 0 : widths.size() - 1; }

  void validate() const {
    if (widths.size() < 2) throw std::invalid_argument("mlp: need at least one layer");
    if (acts.size() != widths.size() - 1)
      throw std::invalid_argument("mlp: one activation per layer required");
    for (size_t w : widths)
      if (w == 0) throw std::invalid_argument("mlp: zero layer width");
  }

  std::string weight_name(size_t i) const { return prefix + ".w" + std::to_string(i); }
  std::string bias_name(size_t i) const { return prefix + ".b" + std::to_string(i); }

  void collect_params(std::vector<ParamDef>& out) const {
    validate();
    for (size_t i = 0; i + 1 < widths.size(); ++i) {
      out.push_back({weight_name(i), {widths[i], widths[i + 1]}, widths[i], ParamKind::kKernel});
      out.push_back({bias_name(i), {widths[i + 1]}, 0, ParamKind::kBias});
    }
  }
};

inline MlpSpec make_mlp(std::string prefix, std::vector<size_t> widths,
                        std::vector<Activation> acts) {
  MlpSpec spec{std::move(widths), std::move(acts), std::move(prefix)};
  spec.validate();
  return spec;
}

// Single-hidden-layer convenience: in -> out with optional activation.
inline MlpSpec make_linear(std::string prefix, size_t in, size_t out,
                           Activation act = Activation::kNone) {
  return make_mlp(std::move(prefix), {in, out}, {act});
}

// x [rows x in] -> [rows x out] for one affine layer.
inline Tensor affine(const Tensor& x, const Tensor& w, const Tensor& b, Activation act) {
  const size_t in = w.extent(0), out = w.extent(1);
  const size_t d = x.extent(x.rank() - 1);
  if (d != in) throw std::invalid_argument("affine: input width mismatch");
  const size_t rows = x.numel() / in;
  Tensor y({rows, out});
  for (size_t r = 0; r < rows; ++r) {
    const double* px = x.data().data() + r * in;
    double* py = y.data().data() + r * out;
    for (size_t c = 0; c < out; ++c) py[c] = b[c];
    for (size_t i = 0; i < in; ++i) {
      const double v = px[i];
      if (v == 0.0) continue;
      const double* pw = w.data().data() + i * out;
      for (size_t c = 0; c < out; ++c) py[c] += v * pw[c];
    }
    if (act == Activation::kRelu)
      for (size_t c = 0; c < out; ++c) py[c] = relu(py[c]);
  }
  ensure_finite(y, "affine");
  return y;
}

// Applies the chain; output keeps the leading extents of x with the last
// extent replaced by the final width.
inline Tensor mlp_apply(const MlpSpec& spec, const WeightStore& ws, const Tensor& x) {
  spec.validate();
  Tensor cur = x;
  for (size_t i = 0; i < spec.layers(); ++i)
    cur = affine(cur, ws.get(spec.weight_name(i)), ws.get(spec.bias_name(i)), spec.acts[i]);
  std::vector<size_t> shape(x.shape().begin(), x.shape().end() - 1);
  shape.push_back(spec.widths.back());
  return cur.reshaped(std::move(shape));
}

}  // namespace mmft
