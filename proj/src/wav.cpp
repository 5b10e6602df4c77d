// Copyright 2026 The FlowHigh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "flowhigh/audio.hpp"
#include "flowhigh/error.hpp"

namespace flowhigh {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

class ByteReader {
 public:
  explicit ByteReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  bool has(std::size_t n) const { return pos_ + n <= bytes_.size(); }
  std::size_t pos() const { return pos_; }
  void seek(std::size_t p) { pos_ = p; }

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = bytes_[pos_] | (bytes_[pos_ + 1] << 8) |
                      (bytes_[pos_ + 2] << 16) |
                      (static_cast<std::uint32_t>(bytes_[pos_ + 3]) << 24);
    pos_ += 4;
    return v;
  }
  std::uint16_t u16() {
    need(2);
    std::uint16_t v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::string tag() {
    need(4);
    std::string s(reinterpret_cast<const char*>(&bytes_[pos_]), 4);
    pos_ += 4;
    return s;
  }

 private:
  void need(std::size_t n) const {
    if (!has(n)) throw FormatError("wav: truncated header");
  }
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}
void put_tag(std::vector<std::uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

std::int32_t quantize(double x, double scale, std::int32_t lo, std::int32_t hi) {
  const double v = std::round(std::clamp(x, -1.0, 1.0) * scale);
  return static_cast<std::int32_t>(std::clamp<double>(v, lo, hi));
}

}  // namespace

std::vector<std::uint8_t> encode_wav(const AudioSignal& signal, WavDepth depth) {
  if (signal.samples.empty()) throw DomainError("write_wav: empty signal");
  if (signal.sample_rate <= 0) throw DomainError("write_wav: sample rate must be positive");

  const std::uint16_t bits = depth == WavDepth::kPcm16 ? 16 : depth == WavDepth::kPcm24 ? 24 : 32;
  const std::uint16_t format = depth == WavDepth::kFloat32 ? kFormatFloat : kFormatPcm;
  const std::uint32_t block = bits / 8;
  const auto data_bytes = static_cast<std::uint32_t>(signal.samples.size() * block);

  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, format);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(signal.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(signal.sample_rate) * block);
  put_u16(out, static_cast<std::uint16_t>(block));
  put_u16(out, bits);
  put_tag(out, "data");
  put_u32(out, data_bytes);

  for (double x : signal.samples) {
    switch (depth) {
      case WavDepth::kPcm16: {
        const auto q = quantize(x, 32768.0, -32768, 32767);
        put_u16(out, static_cast<std::uint16_t>(q));
        break;
      }
      case WavDepth::kPcm24: {
        const auto q = static_cast<std::uint32_t>(quantize(x, 8388608.0, -8388608, 8388607));
        out.push_back(static_cast<std::uint8_t>(q));
        out.push_back(static_cast<std::uint8_t>(q >> 8));
        out.push_back(static_cast<std::uint8_t>(q >> 16));
        break;
      }
      case WavDepth::kFloat32: {
        const float f = static_cast<float>(std::clamp(x, -1.0, 1.0));
        put_u32(out, std::bit_cast<std::uint32_t>(f));
        break;
      }
    }
  }
  return out;
}

AudioSignal decode_wav(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes);
  const std::string riff = r.tag();
  if (riff != "RIFF") throw FormatError("wav: missing RIFF magic (got '" + riff + "')");
  r.u32();
  if (r.tag() != "WAVE") throw FormatError("wav: missing WAVE tag");

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0, block_align = 0;
  std::uint32_t rate = 0;

  while (r.has(8)) {
    const std::string id = r.tag();
    const std::uint32_t size = r.u32();
    const std::size_t body = r.pos();
    if (!r.has(size) && id != "data") throw FormatError("wav: chunk '" + id + "' overruns file");

    if (id == "fmt ") {
      if (size < 16) throw FormatError("wav: fmt chunk too small");
      format = r.u16();
      channels = r.u16();
      rate = r.u32();
      r.u32();
      block_align = r.u16();
      bits = r.u16();
      if (format == kFormatExtensible) {
        if (size < 40) throw FormatError("wav: extensible fmt chunk too small");
        r.u16();  // cbSize
        r.u16();  // valid bits
        r.u32();  // channel mask
        format = r.u16();  // first two bytes of the sub-format GUID
      }
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw FormatError("wav: data chunk before fmt chunk");
      if (channels == 0 || rate == 0) throw FormatError("wav: zero channels or sample rate");
      const bool pcm16 = format == kFormatPcm && bits == 16;
      const bool pcm24 = format == kFormatPcm && bits == 24;
      const bool f32 = format == kFormatFloat && bits == 32;
      if (!pcm16 && !pcm24 && !f32) {
        throw UnsupportedError("wav: unsupported encoding (format " + std::to_string(format) +
                               ", " + std::to_string(bits) + " bits)");
      }
      const std::size_t sample_bytes = bits / 8;
      if (block_align != sample_bytes * channels) throw FormatError("wav: inconsistent block align");
      const std::size_t avail = std::min<std::size_t>(size, bytes.size() - body);
      const std::size_t frames = avail / block_align;

      AudioSignal sig;
      sig.sample_rate = static_cast<int>(rate);
      sig.samples.resize(frames);
      for (std::size_t i = 0; i < frames; ++i) {
        const std::uint8_t* p = &bytes[body + i * block_align];
        if (pcm16) {
          const auto v = static_cast<std::int16_t>(p[0] | (p[1] << 8));
          sig.samples[i] = v / 32768.0;
        } else if (pcm24) {
          std::int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
          if (v & 0x800000) v -= 0x1000000;
          sig.samples[i] = v / 8388608.0;
        } else {
          std::uint32_t u;
          std::memcpy(&u, p, 4);
          if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap32(u);
          sig.samples[i] = static_cast<double>(std::bit_cast<float>(u));
        }
      }
      return sig;
    }
    r.seek(body + size + (size & 1u));
  }
  throw FormatError("wav: no data chunk");
}

AudioSignal read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_wav(bytes);
}

void write_wav(const AudioSignal& signal, const std::filesystem::path& path, WavDepth depth) {
  const auto bytes = encode_wav(signal, depth);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace flowhigh
