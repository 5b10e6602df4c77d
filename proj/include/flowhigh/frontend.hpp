// Copyright 2026 The FlowHigh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include "flowhigh/spectral.hpp"

namespace flowhigh {

struct MelConfig {
  int mel_bins = 80;
  double fmin = 0.0;
  double fmax = 0.0;  // 0 means sample_rate / 2
  double floor = kMelFloor;
  int gl_iters = 32;

  bool operator==(const MelConfig&) const = default;
};

// Waveform <-> log-mel at one sample rate, with the filterbank built once.
class MelFrontend {
 public:
  MelFrontend(const StftConfig& stft, const MelConfig& mel, int sample_rate);

  MelSpectrogram analyze(const AudioSignal& signal) const;
  AudioSignal synthesize(const MelSpectrogram& mel, std::size_t out_len) const;

  const StftConfig& stft_config() const { return stft_; }
  const MelConfig& mel_config() const { return mel_; }
  const MelFilterbank& filterbank() const { return fb_; }
  int sample_rate() const { return sample_rate_; }

 private:
  StftConfig stft_;
  MelConfig mel_;
  int sample_rate_;
  MelFilterbank fb_;
};

}  // namespace flowhigh
