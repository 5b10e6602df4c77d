// Copyright 2026 The FlowHigh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include "flowhigh/audio.hpp"
#include "flowhigh/filter.hpp"

namespace flowhigh {

// Rational polyphase resampler with a Kaiser-windowed sinc kernel
// (64 taps per phase at the lower of the two rates, beta = 8.6).
// Output length is round(len * target / source). The kernel is centred, so
// there is no group delay.
AudioSignal resample(const AudioSignal& signal, int target_rate);

enum class PhaseMode { kCausal, kZeroPhase };

struct DegradedPair {
  AudioSignal x_l;  // low-pass filtered and decimated to the low rate
  AudioSignal x_h;  // x_l brought back to the original rate
};

// Low-resolution simulation: Chebyshev I low-pass at low_rate / 2, decimate
// to low_rate, then interpolate back to the source rate.
DegradedPair simulate_lr(const AudioSignal& y_h, int low_rate, const ChebyshevSpec& spec,
                         PhaseMode mode = PhaseMode::kCausal);

}  // namespace flowhigh
