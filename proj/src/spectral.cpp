// Copyright 2026 The FlowHigh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "flowhigh/spectral.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numbers>

#include <Eigen/SparseCore>

#include "flowhigh/error.hpp"
#include "flowhigh/fft.hpp"

namespace flowhigh {

void StftConfig::validate() const {
  if (window_size <= 0 || hop <= 0 || n_fft <= 0) throw DomainError("stft: sizes must be positive");
  if (window_size > n_fft) throw DomainError("stft: window_size must not exceed n_fft");
  if (hop >= window_size) throw DomainError("stft: hop must be smaller than window_size");
  if (n_fft % 2 != 0) throw DomainError("stft: n_fft must be even");
}

std::vector<double> analysis_window(const StftConfig& cfg) {
  std::vector<double> w(static_cast<std::size_t>(cfg.n_fft), 0.0);
  const int offset = (cfg.n_fft - cfg.window_size) / 2;
  for (int i = 0; i < cfg.window_size; ++i) {
    w[offset + i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / cfg.window_size);
  }
  return w;
}

namespace {

// numpy-style "reflect" (edge sample not repeated).
long reflect_index(long i, long len) {
  if (len == 1) return 0;
  const long period = 2 * (len - 1);
  i %= period;
  if (i < 0) i += period;
  return i < len ? i : period - i;
}

long frame_count(std::size_t len, int hop) {
  return (static_cast<long>(len) + hop - 1) / hop;
}

}  // namespace

ComplexSpectrogram stft(std::span<const double> x, const StftConfig& cfg) {
  cfg.validate();
  if (x.empty()) throw DomainError("stft: empty signal");
  const long len = static_cast<long>(x.size());
  const long frames = frame_count(x.size(), cfg.hop);
  const auto window = analysis_window(cfg);
  const RealFft fft(cfg.n_fft);
  const long half = cfg.n_fft / 2;

  ComplexSpectrogram spec(frames, cfg.bins());
  std::vector<double> buf(static_cast<std::size_t>(cfg.n_fft));
  std::vector<std::complex<double>> out(static_cast<std::size_t>(cfg.bins()));
  for (long t = 0; t < frames; ++t) {
    const long start = t * cfg.hop - half;
    for (long i = 0; i < cfg.n_fft; ++i) {
      buf[i] = window[i] == 0.0 ? 0.0 : window[i] * x[reflect_index(start + i, len)];
    }
    fft.forward(buf, out);
    for (int k = 0; k < cfg.bins(); ++k) spec(t, k) = out[k];
  }
  return spec;
}

ComplexSpectrogram stft(const AudioSignal& signal, const StftConfig& cfg) {
  return stft(std::span<const double>(signal.samples), cfg);
}

AudioSignal istft(const ComplexSpectrogram& spec, const StftConfig& cfg, std::size_t out_len, int sample_rate) {
  cfg.validate();
  if (spec.cols() != cfg.bins()) throw DomainError("istft: bin count does not match n_fft");
  const auto window = analysis_window(cfg);
  const RealFft fft(cfg.n_fft);
  const long half = cfg.n_fft / 2;
  const long len = static_cast<long>(out_len);

  std::vector<double> acc(out_len, 0.0), wsum(out_len, 0.0);
  std::vector<std::complex<double>> bins(static_cast<std::size_t>(cfg.bins()));
  std::vector<double> frame(static_cast<std::size_t>(cfg.n_fft));
  for (long t = 0; t < spec.rows(); ++t) {
    for (int k = 0; k < cfg.bins(); ++k) bins[k] = spec(t, k);
    fft.inverse(bins, frame);
    const long start = t * cfg.hop - half;
    const long i0 = std::max(0L, -start);
    const long i1 = std::min<long>(cfg.n_fft, len - start);
    for (long i = i0; i < i1; ++i) {
      acc[start + i] += frame[i] * window[i];
      wsum[start + i] += window[i] * window[i];
    }
  }
  AudioSignal out;
  out.sample_rate = sample_rate;
  out.samples.resize(out_len);
  for (std::size_t n = 0; n < out_len; ++n) out.samples[n] = wsum[n] > 1e-8 ? acc[n] / wsum[n] : 0.0;
  return out;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

MelFilterbank mel_filterbank(int mel_bins, const StftConfig& cfg, int sample_rate, double fmin, double fmax) {
  cfg.validate();
  if (mel_bins < 2) throw DomainError("mel_filterbank: need at least 2 mel bins");
  if (sample_rate <= 0) throw DomainError("mel_filterbank: sample rate must be positive");
  if (!(fmin >= 0.0) || !(fmin < fmax) || fmax > 0.5 * sample_rate) {
    throw DomainError("mel_filterbank: require 0 <= fmin < fmax <= sample_rate / 2");
  }
  const int bins = cfg.bins();
  const double mlo = hz_to_mel(fmin), mhi = hz_to_mel(fmax);
  std::vector<double> edges(static_cast<std::size_t>(mel_bins + 2));
  for (int i = 0; i < mel_bins + 2; ++i) edges[i] = mel_to_hz(mlo + (mhi - mlo) * i / (mel_bins + 1));

  MelFilterbank fb;
  fb.fmin = fmin;
  fb.fmax = fmax;
  fb.weights = Grid::Zero(mel_bins, bins);
  const double bin_hz = static_cast<double>(sample_rate) / cfg.n_fft;
  for (int m = 0; m < mel_bins; ++m) {
    const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
    double total = 0.0;
    for (int k = 0; k < bins; ++k) {
      const double f = k * bin_hz;
      const double w = std::max(0.0, std::min((f - lo) / (mid - lo), (hi - f) / (hi - mid)));
      fb.weights(m, k) = w;
      total += w;
    }
    if (total == 0.0) {
      const int nearest = std::clamp(static_cast<int>(std::lround(mid / bin_hz)), 0, bins - 1);
      fb.weights(m, nearest) = 1.0;
    }
  }
  return fb;
}

Grid magnitude(const ComplexSpectrogram& spec) { return spec.cwiseAbs(); }

MelSpectrogram to_mel(const ComplexSpectrogram& spec, const MelFilterbank& fb, double floor) {
  if (spec.cols() != fb.weights.cols()) throw DomainError("to_mel: bin count mismatch");
  const Grid mel = magnitude(spec) * fb.weights.transpose();
  return mel.array().max(floor).log().matrix();
}

Grid mel_to_linear(const MelSpectrogram& mel, const MelFilterbank& fb, int nnls_iters) {
  if (mel.cols() != fb.weights.rows()) throw DomainError("mel_to_linear: mel bin count mismatch");
  const Grid target = mel.array().exp().matrix();  // frames x F
  const Grid& w = fb.weights;                       // F x bins
  // Spread each filter output uniformly (per unit weight) over its support;
  // strictly positive wherever some filter covers the bin.
  const Eigen::VectorXd row_sum = w.rowwise().sum();
  Grid scaled = target;
  for (Eigen::Index m = 0; m < scaled.cols(); ++m) scaled.col(m) /= row_sum(m);
  const Eigen::RowVectorXd col_sum = w.colwise().sum();
  Grid s = scaled * w;
  for (Eigen::Index k = 0; k < s.cols(); ++k) {
    if (col_sum(k) > 0.0) s.col(k) /= col_sum(k);
  }
  // Multiplicative NNLS updates for min ||s w^T - target||^2, s >= 0.
  const Eigen::SparseMatrix<double, Eigen::RowMajor> ws = w.sparseView();
  const Eigen::SparseMatrix<double, Eigen::RowMajor> wt = ws.transpose();
  const Grid numer = target * ws;
  for (int it = 0; it < nnls_iters; ++it) {
    const Grid projected = s * wt;
    const Grid denom = projected * ws;
    s = s.cwiseProduct(numer).cwiseQuotient((denom.array() + 1e-30).matrix());
  }
  return s;
}

AudioSignal griffin_lim(const Grid& mags, const StftConfig& cfg, std::size_t out_len, int sample_rate, int iters) {
  constexpr double kMomentum = 0.99;
  ComplexSpectrogram current = mags.cast<std::complex<double>>();
  ComplexSpectrogram previous = current;
  ComplexSpectrogram estimate = current;
  for (int it = 0; it < iters; ++it) {
    const AudioSignal y = istft(estimate, cfg, out_len, sample_rate);
    ComplexSpectrogram rebuilt = stft(y, cfg);
    // Project onto the set of spectrograms with the target magnitude.
    for (Eigen::Index t = 0; t < rebuilt.rows(); ++t) {
      for (Eigen::Index k = 0; k < rebuilt.cols(); ++k) {
        const double a = std::abs(rebuilt(t, k));
        rebuilt(t, k) = a > 0.0 ? rebuilt(t, k) * (mags(t, k) / a) : std::complex<double>(mags(t, k), 0.0);
      }
    }
    previous = current;
    current = rebuilt;
    estimate = current + kMomentum * (current - previous);
  }
  return istft(current, cfg, out_len, sample_rate);
}

AudioSignal mel_to_waveform(const MelSpectrogram& mel, const MelFilterbank& fb, const StftConfig& cfg,
                            std::size_t out_len, int sample_rate, int gl_iters) {
  const Grid mags = mel_to_linear(mel, fb);
  return griffin_lim(mags, cfg, out_len, sample_rate, gl_iters);
}

int cutoff_bin(double cutoff_hz, const StftConfig& cfg, int sample_rate) {
  if (sample_rate <= 0 || !(cutoff_hz > 0.0) || cutoff_hz > 0.5 * sample_rate) {
    throw DomainError("cutoff_bin: cutoff must lie in (0, sample_rate / 2]");
  }
  return static_cast<int>(std::floor(cutoff_hz * cfg.n_fft / sample_rate));
}

namespace {
constexpr char kSpecMagic[4] = {'F', 'H', 'S', 'P'};
constexpr std::uint32_t kSpecVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v), static_cast<char>(v >> 8), static_cast<char>(v >> 16),
                     static_cast<char>(v >> 24)};
  out.write(b, 4);
}
std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw FormatError("FHSP: truncated file");
  return b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}
}  // namespace

void write_spectrogram(const Grid& grid, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(kSpecMagic, 4);
  put_u32(out, kSpecVersion);
  put_u32(out, static_cast<std::uint32_t>(grid.rows()));
  put_u32(out, static_cast<std::uint32_t>(grid.cols()));
  for (Eigen::Index r = 0; r < grid.rows(); ++r) {
    for (Eigen::Index c = 0; c < grid.cols(); ++c) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(grid(r, c))));
  }
  if (!out) throw IoError("write failed for " + path.string());
}

Grid read_spectrogram(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || !std::equal(magic, magic + 4, kSpecMagic)) throw FormatError("FHSP: bad magic");
  if (get_u32(in) != kSpecVersion) throw FormatError("FHSP: unsupported version");
  const std::uint32_t rows = get_u32(in), cols = get_u32(in);
  Grid g(rows, cols);
  for (std::uint32_t r = 0; r < rows; ++r) {
    for (std::uint32_t c = 0; c < cols; ++c) g(r, c) = std::bit_cast<float>(get_u32(in));
  }
  return g;
}

}  // namespace flowhigh
