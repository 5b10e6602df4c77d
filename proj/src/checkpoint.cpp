// Copyright 2026 The FlowHigh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "flowhigh/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace flowhigh {
namespace {

constexpr char kMagic[4] = {'F', 'H', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    bytes.insert(bytes.end(), b, b + n);
  }
  void tensors(const EstimatorParams<float>& p) {
    u32(static_cast<std::uint32_t>(p.names().size()));
    p.for_each([&](const std::string& name, const Tensor<float>& t) {
      u32(static_cast<std::uint32_t>(name.size()));
      raw(name.data(), name.size());
      u32(2);
      u32(static_cast<std::uint32_t>(t.rows()));
      u32(static_cast<std::uint32_t>(t.cols()));
      for (Eigen::Index i = 0; i < t.size(); ++i) u32(std::bit_cast<std::uint32_t>(t.data()[i]));
    });
  }
  std::vector<std::uint8_t> bytes;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& b) : bytes_(b) {}
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(&bytes_[pos_]), n);
    pos_ += n;
    return s;
  }
  void tensors(EstimatorParams<float>& p) {
    const auto names = p.names();
    auto dst = p.tensors();
    const std::uint32_t count = u32();
    if (count != dst.size()) throw FormatError("checkpoint: tensor count does not match config");
    for (std::size_t k = 0; k < dst.size(); ++k) {
      const std::string name = str(u32());
      if (name != names[k]) throw FormatError("checkpoint: unexpected tensor '" + name + "'");
      if (u32() != 2) throw FormatError("checkpoint: tensor rank must be 2");
      const std::uint32_t rows = u32(), cols = u32();
      if (rows != dst[k]->rows() || cols != dst[k]->cols()) throw FormatError("checkpoint: shape mismatch for " + name);
      for (Eigen::Index i = 0; i < dst[k]->size(); ++i) dst[k]->data()[i] = std::bit_cast<float>(u32());
    }
  }
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw FormatError("checkpoint: truncated file");
  }
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  Writer w;
  w.raw(kMagic, 4);
  w.u32(kVersion);
  const auto& c = ckpt.params.config;
  for (int v : {c.layers, c.heads, c.model_dim, c.ff_dim, c.mel_bins, c.max_frames}) w.u32(static_cast<std::uint32_t>(v));
  w.u32(c.position_encoding ? 1u : 0u);
  w.u32(static_cast<std::uint32_t>(ckpt.kind));
  w.f64(ckpt.path.sigma_min);
  w.tensors(ckpt.params);
  w.u32(ckpt.adam ? 1u : 0u);
  if (ckpt.adam) {
    w.u64(ckpt.adam->step);
    w.tensors(ckpt.adam->m);
    w.tensors(ckpt.adam->v);
  }
  return std::move(w.bytes);
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes, const EstimatorConfig* expected) {
  Reader r(bytes);
  if (r.str(4) != std::string(kMagic, 4)) throw FormatError("checkpoint: bad magic");
  const std::uint32_t version = r.u32();
  if (version != kVersion) throw FormatError("checkpoint: unsupported version " + std::to_string(version));
  EstimatorConfig c;
  for (int* v : {&c.layers, &c.heads, &c.model_dim, &c.ff_dim, &c.mel_bins, &c.max_frames}) {
    *v = static_cast<int>(r.u32());
  }
  c.position_encoding = r.u32() != 0;
  if (expected != nullptr && !(c == *expected)) {
    throw ConfigError("checkpoint: stored estimator config does not match (mel_bins " + std::to_string(c.mel_bins) +
                      " vs " + std::to_string(expected->mel_bins) + ")");
  }
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw FormatError(std::string("checkpoint: invalid config block: ") + e.what());
  }
  Checkpoint ckpt;
  const std::uint32_t kind = r.u32();
  if (kind > static_cast<std::uint32_t>(PathKind::kDataPrior)) throw FormatError("checkpoint: unknown path kind");
  ckpt.kind = static_cast<PathKind>(kind);
  ckpt.path.sigma_min = r.f64();
  ckpt.params = EstimatorParams<float>::zeros(c);
  r.tensors(ckpt.params);
  if (r.u32() != 0) {
    AdamState<float> st = AdamState<float>::fresh(c);
    st.step = r.u64();
    r.tensors(st.m);
    r.tensors(st.v);
    ckpt.adam = std::move(st);
  }
  if (!r.at_end()) throw FormatError("checkpoint: trailing bytes");
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path, const EstimatorConfig* expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes, expected);
}

}  // namespace flowhigh
