// Copyright 2026 The FlowHigh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace flowhigh {

// Mono time-domain signal. Samples are nominally in [-1, 1]; clipping only
// happens when writing to disk.
struct AudioSignal {
  std::vector<double> samples;
  int sample_rate = 0;

  std::size_t size() const { return samples.size(); }
  double duration_seconds() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

enum class WavDepth { kPcm16, kPcm24, kFloat32 };

// Reads a RIFF/WAVE file. Multichannel input keeps channel 0 only.
AudioSignal read_wav(const std::filesystem::path& path);

void write_wav(const AudioSignal& signal, const std::filesystem::path& path,
               WavDepth depth = WavDepth::kPcm16);

// In-memory codec used by the file functions; exposed for tests.
std::vector<std::uint8_t> encode_wav(const AudioSignal& signal, WavDepth depth);
AudioSignal decode_wav(const std::vector<std::uint8_t>& bytes);

}  // namespace flowhigh
