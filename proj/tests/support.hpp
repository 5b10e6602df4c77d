// Copyright 2026 The FlowHigh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "flowhigh/audio.hpp"

namespace fh_test {

inline flowhigh::AudioSignal sine(double freq, double amp, int rate, std::size_t n, double phase = 0.0) {
  flowhigh::AudioSignal s;
  s.sample_rate = rate;
  s.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.samples[i] = amp * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / rate + phase);
  }
  return s;
}

inline flowhigh::AudioSignal noise(int rate, std::size_t n, std::uint64_t seed, double scale = 0.3) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  flowhigh::AudioSignal s;
  s.sample_rate = rate;
  s.samples.resize(n);
  for (auto& v : s.samples) v = normal(rng);
  return s;
}

inline flowhigh::AudioSignal add(const flowhigh::AudioSignal& a, const flowhigh::AudioSignal& b, double wa = 1.0,
                                 double wb = 1.0) {
  flowhigh::AudioSignal s = a;
  for (std::size_t i = 0; i < s.samples.size(); ++i) s.samples[i] = wa * a.samples[i] + wb * b.samples[i];
  return s;
}

inline double rms(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
  double acc = 0.0;
  for (std::size_t i = lo; i < hi; ++i) acc += v[i] * v[i];
  return std::sqrt(acc / static_cast<double>(hi - lo));
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b, std::size_t lo,
                           std::size_t hi) {
  double m = 0.0;
  for (std::size_t i = lo; i < hi; ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("flowhigh_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Minimal RIFF/WAVE writer used to build inputs the library itself never
// produces (RIFX, stereo, 8-bit).
inline std::vector<std::uint8_t> raw_wav(const char* magic, std::uint16_t format, std::uint16_t channels,
                                         std::uint32_t rate, std::uint16_t bits,
                                         const std::vector<std::uint8_t>& data) {
  std::vector<std::uint8_t> out;
  auto u16 = [&](std::uint16_t v) {
    out.push_back(v & 0xff);
    out.push_back(v >> 8);
  };
  auto u32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xff);
  };
  auto tag = [&](const char* t) { out.insert(out.end(), t, t + 4); };
  tag(magic);
  u32(36 + static_cast<std::uint32_t>(data.size()));
  tag("WAVE");
  tag("fmt ");
  u32(16);
  u16(format);
  u16(channels);
  u32(rate);
  const std::uint16_t block = channels * (bits / 8);
  u32(rate * block);
  u16(block);
  u16(bits);
  tag("data");
  u32(static_cast<std::uint32_t>(data.size()));
  out.insert(out.end(), data.begin(), data.end());
  return out;
}

}  // namespace fh_test
