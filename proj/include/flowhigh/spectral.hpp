// Copyright 2026 The FlowHigh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <Eigen/Dense>
#include <complex>
#include <span>
#include <vector>
#include <filesystem>

#include "flowhigh/audio.hpp"

namespace flowhigh {

template <class T>
using MatrixRM = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Frames x features real grid. Mel spectrograms, flow samples and vector
// fields all live on this type.
using Grid = MatrixRM<double>;
using MelSpectrogram = Grid;

// Frames x (n_fft / 2 + 1).
using ComplexSpectrogram = MatrixRM<std::complex<double>>;

struct StftConfig {
  int window_size = 2048;
  int hop = 480;
  int n_fft = 2048;

  int bins() const { return n_fft / 2 + 1; }
  void validate() const;
  bool operator==(const StftConfig&) const = default;
};

// Periodic Hann window of window_size samples, zero-padded and centred to n_fft.
std::vector<double> analysis_window(const StftConfig& cfg);

// Reflect-padded, centred framing; ceil(len / hop) frames, one-sided spectrum.
ComplexSpectrogram stft(const AudioSignal& signal, const StftConfig& cfg);
ComplexSpectrogram stft(std::span<const double> samples, const StftConfig& cfg);

// Weighted overlap-add normalised by the summed squared window. Samples whose
// window sum falls below 1e-8 are set to zero.
AudioSignal istft(const ComplexSpectrogram& spec, const StftConfig& cfg, std::size_t out_len,
                  int sample_rate);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

struct MelFilterbank {
  Grid weights;  // mel_bins x (n_fft / 2 + 1)
  double fmin = 0.0;
  double fmax = 0.0;

  int mel_bins() const { return static_cast<int>(weights.rows()); }
};

// Triangular filters with centres uniform on the HTK mel scale. A filter too
// narrow to contain any FFT bin falls back to its nearest bin.
MelFilterbank mel_filterbank(int mel_bins, const StftConfig& cfg, int sample_rate, double fmin,
                             double fmax);

constexpr double kMelFloor = 1e-5;

// log(max(fb * |spec|, floor)), natural log.
MelSpectrogram to_mel(const ComplexSpectrogram& spec, const MelFilterbank& fb, double floor = kMelFloor);

Grid magnitude(const ComplexSpectrogram& spec);

// Non-negative least-squares estimate of linear magnitudes from a log-mel grid.
Grid mel_to_linear(const MelSpectrogram& mel, const MelFilterbank& fb, int nnls_iters = 60);

// Phase recovery for a magnitude grid (fast Griffin-Lim, momentum 0.99,
// zero initial phase). Fully deterministic.
AudioSignal griffin_lim(const Grid& magnitudes, const StftConfig& cfg, std::size_t out_len, int sample_rate,
                        int iters = 32);

// Deterministic reference synthesiser standing in for a neural vocoder.
AudioSignal mel_to_waveform(const MelSpectrogram& mel, const MelFilterbank& fb, const StftConfig& cfg,
                            std::size_t out_len, int sample_rate, int gl_iters = 32);

// floor(cutoff_hz * n_fft / sample_rate)
int cutoff_bin(double cutoff_hz, const StftConfig& cfg, int sample_rate);

// "FHSP" dump: magic, version u32, rows u32, cols u32, then f32 row-major.
void write_spectrogram(const Grid& grid, const std::filesystem::path& path);
Grid read_spectrogram(const std::filesystem::path& path);

}  // namespace flowhigh
