// Copyright 2026 The FlowHigh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "flowhigh/frontend.hpp"

#include "flowhigh/error.hpp"

namespace flowhigh {

MelFrontend::MelFrontend(const StftConfig& stft, const MelConfig& mel, int sample_rate)
    : stft_(stft),
      mel_(mel),
      sample_rate_(sample_rate),
      fb_(mel_filterbank(mel.mel_bins, stft, sample_rate, mel.fmin, mel.fmax > 0.0 ? mel.fmax : 0.5 * sample_rate)) {}

MelSpectrogram MelFrontend::analyze(const AudioSignal& signal) const {
  if (signal.sample_rate != sample_rate_) {
    throw DomainError("MelFrontend: expected " + std::to_string(sample_rate_) + " Hz input, got " +
                      std::to_string(signal.sample_rate));
  }
  return to_mel(stft(signal, stft_), fb_, mel_.floor);
}

AudioSignal MelFrontend::synthesize(const MelSpectrogram& mel, std::size_t out_len) const {
  return mel_to_waveform(mel, fb_, stft_, out_len, sample_rate_, mel_.gl_iters);
}

}  // namespace flowhigh
