// Copyright 2026 The FlowHigh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "flowhigh/postproc.hpp"

#include <cstdlib>

#include "flowhigh/error.hpp"
#include "flowhigh/resample.hpp"

namespace flowhigh {

ComplexSpectrogram splice_lowband(const ComplexSpectrogram& generated, const ComplexSpectrogram& input, int kc,
                                  int crossfade_bins) {
  if (generated.rows() != input.rows() || generated.cols() != input.cols()) {
    throw DomainError("splice_lowband: spectrogram shapes differ");
  }
  if (kc < 0 || kc >= generated.cols()) throw DomainError("splice_lowband: cutoff bin out of range");
  if (crossfade_bins < 0) throw DomainError("splice_lowband: crossfade must be non-negative");
  ComplexSpectrogram spliced = input;
  for (Eigen::Index k = kc + 1; k < generated.cols(); ++k) {
    const auto into = static_cast<int>(k - kc);
    if (into <= crossfade_bins) {
      const double w = static_cast<double>(into) / (crossfade_bins + 1);
      spliced.col(k) = (1.0 - w) * input.col(k) + w * generated.col(k);
    } else {
      spliced.col(k) = generated.col(k);
    }
  }
  return spliced;
}

AudioSignal replace_lowband(const AudioSignal& generated, const AudioSignal& x_l, double cutoff_hz,
                            const StftConfig& cfg, int crossfade_bins) {
  const int h = generated.sample_rate;
  if (!(cutoff_hz > 0.0) || cutoff_hz >= 0.5 * h) throw DomainError("replace_lowband: cutoff must lie in (0, h/2)");
  if (crossfade_bins < 0) throw DomainError("replace_lowband: crossfade must be non-negative");
  if (generated.samples.empty()) throw DomainError("replace_lowband: empty generated signal");

  AudioSignal x_h = resample(x_l, h);
  const auto gap = std::labs(static_cast<long>(x_h.size()) - static_cast<long>(generated.size()));
  if (gap > cfg.hop) {
    throw DomainError("replace_lowband: input and generated lengths differ by " + std::to_string(gap) + " samples");
  }
  x_h.samples.resize(generated.size(), 0.0);

  const ComplexSpectrogram spliced =
      splice_lowband(stft(generated, cfg), stft(x_h, cfg), cutoff_bin(cutoff_hz, cfg, h), crossfade_bins);
  return istft(spliced, cfg, generated.size(), h);
}

}  // namespace flowhigh
