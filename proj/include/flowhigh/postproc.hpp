// Copyright 2026 The FlowHigh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include "flowhigh/spectral.hpp"

namespace flowhigh {

// Splices the input's low band into a generated waveform. STFT bins
// k <= cutoff_bin(cutoff_hz) come from the (upsampled) input, the rest from
// `generated`. With crossfade_bins > 0 the next bins blend linearly from
// input to generated. The input is resampled to the generated rate and
// trimmed or zero-padded to its length; a length difference larger than one
// hop is rejected.
// Bin-level splice used by replace_lowband: columns k <= cutoff_bin come
// from `input`, the rest (after the optional crossfade) from `generated`.
ComplexSpectrogram splice_lowband(const ComplexSpectrogram& generated, const ComplexSpectrogram& input, int cutoff_bin,
                                  int crossfade_bins = 0);

AudioSignal replace_lowband(const AudioSignal& generated, const AudioSignal& x_l, double cutoff_hz,
                            const StftConfig& cfg, int crossfade_bins = 0);

}  // namespace flowhigh
