// Copyright 2026 The FlowHigh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "flowhigh/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <vector>

#include "flowhigh/error.hpp"

namespace flowhigh {
namespace {

struct Plans {
  fftw_plan r2c;
  fftw_plan c2r;
};

// FFTW planning is not thread safe; execution on distinct arrays is.
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

Plans plans_for(int n) {
  static std::map<int, Plans> cache;
  std::lock_guard lock(plan_mutex());
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<double> real(static_cast<std::size_t>(n));
  std::vector<std::complex<double>> spec(static_cast<std::size_t>(n / 2 + 1));
  auto* c = reinterpret_cast<fftw_complex*>(spec.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  Plans p{fftw_plan_dft_r2c_1d(n, real.data(), c, flags), fftw_plan_dft_c2r_1d(n, c, real.data(), flags)};
  cache.emplace(n, p);
  return p;
}

}  // namespace

RealFft::RealFft(int n) : n_(n) {
  if (n < 2) throw DomainError("RealFft: size must be at least 2");
  const Plans p = plans_for(n);
  r2c_ = p.r2c;
  c2r_ = p.c2r;
}

void RealFft::forward(std::span<const double> in, std::span<std::complex<double>> out) const {
  if (static_cast<int>(in.size()) != n_ || static_cast<int>(out.size()) != bins()) {
    throw DomainError("RealFft::forward: size mismatch");
  }
  // r2c leaves the input untouched, the const_cast is only for the C signature.
  fftw_execute_dft_r2c(static_cast<fftw_plan>(r2c_), const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

void RealFft::inverse(std::span<const std::complex<double>> in, std::span<double> out) const {
  if (static_cast<int>(in.size()) != bins() || static_cast<int>(out.size()) != n_) {
    throw DomainError("RealFft::inverse: size mismatch");
  }
  // c2r overwrites its input.
  thread_local std::vector<std::complex<double>> scratch;
  scratch.assign(in.begin(), in.end());
  fftw_execute_dft_c2r(static_cast<fftw_plan>(c2r_), reinterpret_cast<fftw_complex*>(scratch.data()),
                       out.data());
  const double scale = 1.0 / n_;
  for (double& v : out) v *= scale;
}

}  // namespace flowhigh
