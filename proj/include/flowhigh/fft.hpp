// Copyright 2026 The FlowHigh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <complex>
#include <span>

namespace flowhigh {

// Real-input FFT of size n (FFTW backed). Plans are created once per size and
// shared; execution is reentrant.
class RealFft {
 public:
  explicit RealFft(int n);

  int size() const { return n_; }
  int bins() const { return n_ / 2 + 1; }

  // in: n samples, out: n/2 + 1 bins. Unnormalised.
  void forward(std::span<const double> in, std::span<std::complex<double>> out) const;
  // in: n/2 + 1 bins, out: n samples. Scaled by 1/n so inverse(forward(x)) == x.
  void inverse(std::span<const std::complex<double>> in, std::span<double> out) const;

 private:
  int n_;
  void* r2c_;
  void* c2r_;
};

}  // namespace flowhigh
