// Copyright 2026 The FlowHigh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <array>
#include <complex>
#include <vector>

#include "flowhigh/audio.hpp"

namespace flowhigh {

struct ChebyshevSpec {
  int order = 8;
  double ripple_db = 0.05;
  double cutoff_hz = 4000.0;
};

// One biquad; den[0] is always 1.
struct Biquad {
  std::array<double, 3> num{1.0, 0.0, 0.0};
  std::array<double, 3> den{1.0, 0.0, 0.0};

  std::complex<double> response(double omega) const;
  // Roots of the denominator (a first-order section reports one root twice).
  std::array<std::complex<double>, 2> poles() const;
};

using IirSections = std::vector<Biquad>;

// Digital Chebyshev type I low-pass: analog prototype, pre-warped cutoff,
// bilinear transform, realised as ceil(order / 2) second-order sections.
IirSections design_cheby1(const ChebyshevSpec& spec, int sample_rate);

// Magnitude of the cascade at frequency_hz.
double magnitude_response(const IirSections& sections, double frequency_hz, int sample_rate);

// Causal cascade, zero initial state.
AudioSignal lowpass_filter(const AudioSignal& signal, const IirSections& sections);

// Forward-backward pass of the same cascade (zero phase, squared magnitude).
AudioSignal lowpass_filter_zero_phase(const AudioSignal& signal, const IirSections& sections);

}  // namespace flowhigh
