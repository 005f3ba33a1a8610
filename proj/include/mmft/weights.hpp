#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmft/rng.hpp"
#include "mmft/tensor.hpp"

namespace mmft {

enum class ParamKind { kKernel, kBias, kLnGamma, kLnBeta };

struct ParamDef {
  std::string name;
  std::vector<size_t> shape;
  size_t fan_in = 0;  // used for kernel init bounds
  ParamKind kind = ParamKind::kKernel;
};

// Named tensor container for every learnable parameter. Values are created
// and serialized in float32 and widened to double for computation, so a
// save/load round trip is bit-exact.
class WeightStore {
 public:
  void add(const std::string& name, Tensor t) {
    if (tensors_.count(name)) throw std::invalid_argument("weight store: duplicate name " + name);
    tensors_.emplace(name, std::move(t));
  }

  bool has(const std::string& name) const { return tensors_.count(name) != 0; }

  const Tensor& get(const std::string& name) const {
    auto it = tensors_.find(name);
    if (it == tensors_.end()) throw std::runtime_error("weight store: missing parameter " + name);
    return it->second;
  }

  Tensor& mutable_get(const std::string& name) {
    auto it = tensors_.find(name);
    if (it == tensors_.end()) throw std::runtime_error("weight store: missing parameter " + name);
    return it->second;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(tensors_.size());
    for (const auto& [k, v] : tensors_) out.push_back(k);
    return out;
  }

  size_t size() const { return tensors_.size(); }

  const std::map<std::string, Tensor>& entries() const { return tensors_; }

  void zero_all() {
    for (auto& [k, v] : tensors_) std::fill(v.data().begin(), v.data().end(), 0.0);
  }

 private:
  std::map<std::string, Tensor> tensors_;  // ordered: manifest order is the name order
};

inline double quantize_f32(double v) { return static_cast<double>(static_cast<float>(v)); }

// Seeds every parameter from a stream derived from its name, so adding a
// parameter never perturbs the others. Kernels draw uniform(-1/sqrt(fan_in),
// 1/sqrt(fan_in)); biases and LN betas are zero, LN gammas one.
inline WeightStore init_store(const std::vector<ParamDef>& defs, uint64_t seed) {
  WeightStore ws;
  for (const auto& def : defs) {
    Tensor t(def.shape);
    switch (def.kind) {
      case ParamKind::kKernel: {
        SplitMix64 rng = named_stream(seed, def.name);
        const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<size_t>(def.fan_in, 1)));
        for (auto& v : t.data()) v = quantize_f32(rng.uniform(-bound, bound));
        break;
      }
      case ParamKind::kBias:
      case ParamKind::kLnBeta:
        break;  // zeros
      case ParamKind::kLnGamma:
        std::fill(t.data().begin(), t.data().end(), 1.0);
        break;
    }
    ws.add(def.name, std::move(t));
  }
  return ws;
}

// ---------------------------------------------------------------------------
// MMFW container
//
// Layout (little-endian):
//   magic "MMFW" | u16 version (=1) | u32 entry count
//   entries: u16 name length | name bytes | u8 rank | u32 extent per axis
//   blobs:   row-major float32, concatenated in manifest order
//   trailer: u64 FNV-1a checksum of all blob bytes
// ---------------------------------------------------------------------------

namespace detail {

inline void put_u16(std::string& out, uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}
inline void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_u64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class Reader {
 public:
  Reader(const char* data, size_t size) : p_(data), end_(data + size) {}
  void need(size_t n, const char* what) const {
    if (static_cast<size_t>(end_ - p_) < n)
      throw std::runtime_error(std::string("weight file: truncated ") + what);
  }
  uint8_t u8(const char* what) {
    need(1, what);
    return static_cast<uint8_t>(*p_++);
  }
  uint16_t u16(const char* what) {
    need(2, what);
    uint16_t v = 0;
    for (int i = 0; i < 2; ++i) v |= static_cast<uint16_t>(static_cast<uint8_t>(*p_++)) << (8 * i);
    return v;
  }
  uint32_t u32(const char* what) {
    need(4, what);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<uint8_t>(*p_++)) << (8 * i);
    return v;
  }
  uint64_t u64(const char* what) {
    need(8, what);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(static_cast<uint8_t>(*p_++)) << (8 * i);
    return v;
  }
  const char* bytes(size_t n, const char* what) {
    need(n, what);
    const char* r = p_;
    p_ += n;
    return r;
  }
  size_t remaining() const { return static_cast<size_t>(end_ - p_); }

 private:
  const char* p_;
  const char* end_;
};

}  // namespace detail

inline void save_store(const WeightStore& ws, const std::string& path) {
  std::string buf;
  buf += "MMFW";
  detail::put_u16(buf, 1);
  detail::put_u32(buf, static_cast<uint32_t>(ws.size()));
  for (const auto& [name, t] : ws.entries()) {
    if (name.size() > 0xffff) throw std::invalid_argument("weight name too long: " + name);
    detail::put_u16(buf, static_cast<uint16_t>(name.size()));
    buf += name;
    buf.push_back(static_cast<char>(t.rank()));
    for (size_t e : t.shape()) detail::put_u32(buf, static_cast<uint32_t>(e));
  }
  std::string blobs;
  for (const auto& [name, t] : ws.entries()) {
    for (double v : t.data()) {
      float f = static_cast<float>(v);
      uint32_t bits;
      std::memcpy(&bits, &f, 4);
      detail::put_u32(blobs, bits);
    }
  }
  buf += blobs;
  detail::put_u64(buf, fnv1a64(blobs.data(), blobs.size()));

  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("weight file: cannot open for write: " + path);
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!os) throw std::runtime_error("weight file: write failed: " + path);
}

inline WeightStore load_store(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("weight file: cannot open: " + path);
  std::string buf((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());

  detail::Reader r(buf.data(), buf.size());
  const char* magic = r.bytes(4, "magic");
  if (std::memcmp(magic, "MMFW", 4) != 0) throw std::runtime_error("weight file: bad magic");
  const uint16_t version = r.u16("version");
  if (version != 1) throw std::runtime_error("weight file: unknown version");

  const uint32_t count = r.u32("manifest count");
  std::vector<std::pair<std::string, std::vector<size_t>>> manifest;
  manifest.reserve(count);
  size_t total_values = 0;
  for (uint32_t i = 0; i < count; ++i) {
    const uint16_t name_len = r.u16("manifest name length");
    std::string name(r.bytes(name_len, "manifest name"), name_len);
    const uint8_t rank = r.u8("manifest rank");
    std::vector<size_t> shape(rank);
    size_t n = 1;
    for (uint8_t a = 0; a < rank; ++a) {
      shape[a] = r.u32("manifest extent");
      n *= shape[a];
    }
    if (rank == 0) n = 0;
    total_values += n;
    manifest.emplace_back(std::move(name), std::move(shape));
  }

  const size_t blob_bytes = total_values * 4;
  if (r.remaining() != blob_bytes + 8)
    throw std::runtime_error("weight file: manifest/blob length mismatch");
  const char* blobs = r.bytes(blob_bytes, "blobs");
  const uint64_t stored = r.u64("checksum");
  if (fnv1a64(blobs, blob_bytes) != stored)
    throw std::runtime_error("weight file: checksum mismatch");

  WeightStore ws;
  const char* p = blobs;
  for (auto& [name, shape] : manifest) {
    Tensor t(shape);
    for (auto& v : t.data()) {
      uint32_t bits = 0;
      for (int i = 0; i < 4; ++i) bits |= static_cast<uint32_t>(static_cast<uint8_t>(p[i])) << (8 * i);
      p += 4;
      float f;
      std::memcpy(&f, &bits, 4);
      v = static_cast<double>(f);
    }
    ws.add(name, std::move(t));
  }
  return ws;
}

}  // namespace mmft
