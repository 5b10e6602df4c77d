// Copyright 2026 The FlowHigh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <vector>

#include "flowhigh/spectral.hpp"

namespace flowhigh {

// Log-spectral distance on log10 |X|^2 with magnitudes floored at 1e-8:
// per frame sqrt(mean_k (log10|Y_k|^2 - log10|X_k|^2)^2), then averaged over
// frames. Signals are trimmed to the shorter length.
double lsd(const AudioSignal& ref, const AudioSignal& est, const StftConfig& cfg);

// Same, restricted to FFT bins with centre frequency in [f_lo, f_hi].
double lsd_band(const AudioSignal& ref, const AudioSignal& est, double f_lo, double f_hi, const StftConfig& cfg);

// Per-frame distances over bins [k_lo, k_hi] (inclusive).
std::vector<double> lsd_frames(const AudioSignal& ref, const AudioSignal& est, int k_lo, int k_hi,
                               const StftConfig& cfg);

// Per-frame distances between two magnitude spectrograms of equal shape.
std::vector<double> lsd_frames(const Grid& ref_mag, const Grid& est_mag, int k_lo, int k_hi);

struct LsdReport {
  double lsd = 0.0;
  double lsd_lf = 0.0;  // bins at or below cutoff
  double lsd_hf = 0.0;  // bins above cutoff
  double cutoff_hz = 0.0;
};

// Band split at cutoff_bin(cutoff_hz), matching the low-band replacement.
LsdReport lsd_report(const AudioSignal& ref, const AudioSignal& est, double cutoff_hz, const StftConfig& cfg);

// Real-time factor: wall / audio duration.
double rtf(double audio_seconds, double wall_seconds);

}  // namespace flowhigh
