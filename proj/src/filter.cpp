// Copyright 2026 The FlowHigh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "flowhigh/filter.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "flowhigh/error.hpp"

namespace flowhigh {

using cplx = std::complex<double>;

cplx Biquad::response(double omega) const {
  const cplx z1 = std::polar(1.0, -omega);
  const cplx z2 = z1 * z1;
  return (num[0] + num[1] * z1 + num[2] * z2) / (den[0] + den[1] * z1 + den[2] * z2);
}

std::array<cplx, 2> Biquad::poles() const {
  if (den[2] == 0.0) return {cplx(-den[1], 0.0), cplx(-den[1], 0.0)};
  const cplx disc = std::sqrt(cplx(den[1] * den[1] - 4.0 * den[2], 0.0));
  return {(-den[1] + disc) / 2.0, (-den[1] - disc) / 2.0};
}

IirSections design_cheby1(const ChebyshevSpec& spec, int sample_rate) {
  if (sample_rate <= 0) throw DomainError("design_cheby1: sample rate must be positive");
  if (spec.order < 1 || spec.order > 12) throw DomainError("design_cheby1: order must be in [1, 12]");
  if (!(spec.ripple_db > 0.0)) throw DomainError("design_cheby1: ripple must be positive");
  if (!(spec.cutoff_hz > 0.0) || spec.cutoff_hz >= 0.5 * sample_rate) {
    throw DomainError("design_cheby1: cutoff must lie in (0, Nyquist)");
  }

  const int n = spec.order;
  const double eps = std::sqrt(std::pow(10.0, spec.ripple_db / 10.0) - 1.0);
  const double mu = std::asinh(1.0 / eps) / n;
  // Bilinear transform s = (z - 1) / (z + 1); the analog cutoff is pre-warped
  // so the digital -ripple point lands exactly on cutoff_hz.
  const double wc = std::tan(std::numbers::pi * spec.cutoff_hz / sample_rate);

  IirSections sections;
  for (int k = 0; k < n / 2; ++k) {
    const double theta = std::numbers::pi * (2.0 * k + 1.0) / (2.0 * n);
    const cplx p = wc * cplx(-std::sinh(mu) * std::sin(theta), std::cosh(mu) * std::cos(theta));
    const cplx zp = (1.0 + p) / (1.0 - p);
    Biquad b;
    b.den = {1.0, -2.0 * zp.real(), std::norm(zp)};
    // Zeros at z = -1; normalise to unit gain at DC.
    const double dc = (1.0 + b.den[1] + b.den[2]) / 4.0;
    b.num = {dc, 2.0 * dc, dc};
    sections.push_back(b);
  }
  if (n % 2 == 1) {
    const double p = -wc * std::sinh(mu);
    const double zp = (1.0 + p) / (1.0 - p);
    Biquad b;
    b.den = {1.0, -zp, 0.0};
    const double dc = (1.0 - zp) / 2.0;
    b.num = {dc, dc, 0.0};
    sections.push_back(b);
  } else {
    // Even orders start the passband at the bottom of the ripple band.
    const double g = 1.0 / std::sqrt(1.0 + eps * eps);
    for (double& c : sections.front().num) c *= g;
  }
  return sections;
}

double magnitude_response(const IirSections& sections, double frequency_hz, int sample_rate) {
  const double omega = 2.0 * std::numbers::pi * frequency_hz / sample_rate;
  cplx h = 1.0;
  for (const auto& s : sections) h *= s.response(omega);
  return std::abs(h);
}

namespace {

void run_cascade(std::vector<double>& x, const IirSections& sections) {
  for (const auto& s : sections) {
    // Transposed direct form II.
    double z1 = 0.0, z2 = 0.0;
    for (double& v : x) {
      const double in = v;
      const double out = s.num[0] * in + z1;
      z1 = s.num[1] * in - s.den[1] * out + z2;
      z2 = s.num[2] * in - s.den[2] * out;
      v = out;
    }
  }
}

}  // namespace

AudioSignal lowpass_filter(const AudioSignal& signal, const IirSections& sections) {
  AudioSignal out = signal;
  run_cascade(out.samples, sections);
  return out;
}

AudioSignal lowpass_filter_zero_phase(const AudioSignal& signal, const IirSections& sections) {
  AudioSignal out = signal;
  run_cascade(out.samples, sections);
  std::reverse(out.samples.begin(), out.samples.end());
  run_cascade(out.samples, sections);
  std::reverse(out.samples.begin(), out.samples.end());
  return out;
}

}  // namespace flowhigh
