// Copyright 2026 The FlowHigh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "flowhigh/resample.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "flowhigh/error.hpp"

namespace flowhigh {
namespace {

constexpr int kTapsPerPhase = 64;
constexpr double kKaiserBeta = 8.6;
constexpr long kMaxTablePhases = 4096;

double kaiser(double x, double beta) {
  if (std::abs(x) >= 1.0) return 0.0;
  return std::cyl_bessel_i(0.0, beta * std::sqrt(1.0 - x * x)) / std::cyl_bessel_i(0.0, beta);
}

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

struct Kernel {
  double cutoff;  // relative to the input Nyquist, <= 1
  int half;       // half width in input samples

  // Taps for the output whose exact input position is base + frac.
  void taps(double frac, std::vector<double>& out) const {
    out.resize(2 * half);
    double sum = 0.0;
    for (int j = 0; j < 2 * half; ++j) {
      const double tau = frac - (j - half + 1);
      const double w = cutoff * sinc(cutoff * tau) * kaiser(tau / half, kKaiserBeta);
      out[j] = w;
      sum += w;
    }
    for (double& w : out) w /= sum;
  }
};

}  // namespace

AudioSignal resample(const AudioSignal& signal, int target_rate) {
  if (target_rate <= 0) throw DomainError("resample: target rate must be positive");
  if (signal.sample_rate <= 0) throw DomainError("resample: source rate must be positive");
  if (target_rate == signal.sample_rate) return signal;

  const long g = std::gcd(static_cast<long>(signal.sample_rate), static_cast<long>(target_rate));
  const long up = target_rate / g;
  const long down = signal.sample_rate / g;

  Kernel kernel;
  kernel.cutoff = std::min(1.0, static_cast<double>(up) / static_cast<double>(down));
  kernel.half = static_cast<int>(std::ceil(0.5 * kTapsPerPhase / kernel.cutoff));

  const auto in_len = static_cast<long>(signal.samples.size());
  const auto out_len = static_cast<long>(
      std::llround(static_cast<double>(in_len) * static_cast<double>(up) / static_cast<double>(down)));

  std::vector<std::vector<double>> table;
  if (up <= kMaxTablePhases) {
    table.resize(static_cast<std::size_t>(up));
    for (long p = 0; p < up; ++p) kernel.taps(static_cast<double>(p) / up, table[p]);
  }

  AudioSignal out;
  out.sample_rate = target_rate;
  out.samples.assign(static_cast<std::size_t>(out_len), 0.0);
  std::vector<double> scratch;
  const auto& x = signal.samples;
  for (long n = 0; n < out_len; ++n) {
    const long pos = n * down;
    const long base = pos / up;
    const long phase = pos % up;
    const std::vector<double>* taps = nullptr;
    if (!table.empty()) {
      taps = &table[phase];
    } else {
      kernel.taps(static_cast<double>(phase) / up, scratch);
      taps = &scratch;
    }
    const long first = base - kernel.half + 1;
    const long j0 = std::max(0L, -first);
    const long j1 = std::min<long>(2 * kernel.half, in_len - first);
    double acc = 0.0;
    for (long j = j0; j < j1; ++j) acc += (*taps)[j] * x[first + j];
    out.samples[n] = acc;
  }
  return out;
}

DegradedPair simulate_lr(const AudioSignal& y_h, int low_rate, const ChebyshevSpec& spec, PhaseMode mode) {
  if (low_rate <= 0 || low_rate >= y_h.sample_rate) {
    throw DomainError("simulate_lr: low rate must be in (0, " + std::to_string(y_h.sample_rate) + ")");
  }
  ChebyshevSpec s = spec;
  s.cutoff_hz = 0.5 * low_rate;
  const auto sections = design_cheby1(s, y_h.sample_rate);
  const AudioSignal filtered =
      mode == PhaseMode::kCausal ? lowpass_filter(y_h, sections) : lowpass_filter_zero_phase(y_h, sections);
  DegradedPair pair;
  pair.x_l = resample(filtered, low_rate);
  pair.x_h = resample(pair.x_l, y_h.sample_rate);
  return pair;
}

}  // namespace flowhigh
