// Copyright 2026 The FlowHigh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "flowhigh/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "flowhigh/error.hpp"

namespace flowhigh {
namespace {

constexpr double kMagFloor = 1e-8;

Grid floored_log_power(const Grid& mag) { return (mag.array().max(kMagFloor).square().log10()).matrix(); }

Grid log_power(const AudioSignal& x, std::size_t len, const StftConfig& cfg) {
  return floored_log_power(magnitude(stft(std::span<const double>(x.samples.data(), len), cfg)));
}

void check_pair(const AudioSignal& ref, const AudioSignal& est) {
  if (ref.sample_rate != est.sample_rate) throw DomainError("lsd: sample rates differ");
  if (ref.samples.empty() || est.samples.empty()) throw DomainError("lsd: empty signal");
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

std::vector<double> frame_distances(const Grid& a, const Grid& b, int k_lo, int k_hi) {
  const int width = k_hi - k_lo + 1;
  std::vector<double> frames(static_cast<std::size_t>(a.rows()));
  for (Eigen::Index t = 0; t < a.rows(); ++t) {
    const double ms = (b.row(t).segment(k_lo, width) - a.row(t).segment(k_lo, width)).squaredNorm() / width;
    frames[t] = std::sqrt(ms);
  }
  return frames;
}

}  // namespace

std::vector<double> lsd_frames(const Grid& ref_mag, const Grid& est_mag, int k_lo, int k_hi) {
  if (ref_mag.rows() != est_mag.rows() || ref_mag.cols() != est_mag.cols()) throw DomainError("lsd: shape mismatch");
  if (k_lo < 0 || k_hi >= ref_mag.cols() || k_lo > k_hi) throw DomainError("lsd: empty bin range");
  return frame_distances(floored_log_power(ref_mag), floored_log_power(est_mag), k_lo, k_hi);
}

std::vector<double> lsd_frames(const AudioSignal& ref, const AudioSignal& est, int k_lo, int k_hi,
                               const StftConfig& cfg) {
  check_pair(ref, est);
  if (k_lo < 0 || k_hi >= cfg.bins() || k_lo > k_hi) throw DomainError("lsd: empty bin range");
  const std::size_t len = std::min(ref.size(), est.size());
  return frame_distances(log_power(ref, len, cfg), log_power(est, len, cfg), k_lo, k_hi);
}

double lsd(const AudioSignal& ref, const AudioSignal& est, const StftConfig& cfg) {
  return mean(lsd_frames(ref, est, 0, cfg.bins() - 1, cfg));
}

double lsd_band(const AudioSignal& ref, const AudioSignal& est, double f_lo, double f_hi, const StftConfig& cfg) {
  check_pair(ref, est);
  const double nyquist = 0.5 * ref.sample_rate;
  if (!(f_lo >= 0.0) || !(f_lo < f_hi) || f_hi > nyquist) throw DomainError("lsd_band: require 0 <= f_lo < f_hi <= Nyquist");
  const double bin_hz = static_cast<double>(ref.sample_rate) / cfg.n_fft;
  const int k_lo = static_cast<int>(std::ceil(f_lo / bin_hz - 1e-9));
  const int k_hi = std::min(cfg.bins() - 1, static_cast<int>(std::floor(f_hi / bin_hz + 1e-9)));
  return mean(lsd_frames(ref, est, k_lo, k_hi, cfg));
}

LsdReport lsd_report(const AudioSignal& ref, const AudioSignal& est, double cutoff_hz, const StftConfig& cfg) {
  check_pair(ref, est);
  const int kc = cutoff_bin(cutoff_hz, cfg, ref.sample_rate);
  const std::size_t len = std::min(ref.size(), est.size());
  const Grid a = log_power(ref, len, cfg);
  const Grid b = log_power(est, len, cfg);
  LsdReport r;
  r.cutoff_hz = cutoff_hz;
  r.lsd = mean(frame_distances(a, b, 0, cfg.bins() - 1));
  r.lsd_lf = mean(frame_distances(a, b, 0, kc));
  r.lsd_hf = kc + 1 < cfg.bins() ? mean(frame_distances(a, b, kc + 1, cfg.bins() - 1)) : 0.0;
  return r;
}

double rtf(double audio_seconds, double wall_seconds) {
  if (!(audio_seconds > 0.0)) throw DomainError("rtf: audio duration must be positive");
  return wall_seconds / audio_seconds;
}

}  // namespace flowhigh
