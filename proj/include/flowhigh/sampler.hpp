// Copyright 2026 The FlowHigh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string_view>

#include "flowhigh/cfm.hpp"
#include "flowhigh/estimator.hpp"
#include "flowhigh/frontend.hpp"

namespace flowhigh {

enum class SolverMethod { kEuler, kMidpoint };

std::string_view solver_method_name(SolverMethod m);
SolverMethod parse_solver_method(std::string_view name);

struct SolverConfig {
  SolverMethod method = SolverMethod::kEuler;
  int steps = 1;
  std::uint64_t seed = 0;

  // Euler spends one evaluation per step, midpoint two.
  int nfe() const { return method == SolverMethod::kEuler ? steps : 2 * steps; }
  bool operator==(const SolverConfig&) const = default;
};

// Builds a solver from an NFE budget; midpoint budgets must be even.
SolverConfig solver_for_nfe(SolverMethod method, int nfe, std::uint64_t seed = 0);

template <class T>
using VectorField = std::function<MatrixRM<T>(const MatrixRM<T>& x, T t)>;

// Source point drawn from the path's p0 (X_h is ignored by the standard prior).
template <class T, class Rng>
MatrixRM<T> prior_draw(PathKind kind, const MatrixRM<T>& x_h, const PathParams& p, Rng& rng) {
  MatrixRM<T> noise = standard_normal<T>(x_h.rows(), x_h.cols(), rng);
  switch (kind) {
    case PathKind::kStandardGaussianPrior: return noise;
    case PathKind::kConstantSigma: return x_h + static_cast<T>(p.sigma_min) * noise;
    case PathKind::kDataPrior: return x_h + noise;
  }
  return noise;
}

// x <- x + tau * v(x, t) on the left-endpoint grid t = 0, tau, ..., 1 - tau.
template <class T>
MatrixRM<T> euler_integrate(const VectorField<T>& v, MatrixRM<T> x, int nfe) {
  if (nfe < 1) throw DomainError("euler_integrate: nfe must be >= 1");
  const T tau = T(1) / static_cast<T>(nfe);
  for (int i = 0; i < nfe; ++i) {
    x += tau * v(x, static_cast<T>(i) * tau);
    if (!x.allFinite()) throw NumericError("euler_integrate: non-finite state at step " + std::to_string(i));
  }
  return x;
}

// Explicit midpoint: x <- x + tau * v(x + tau/2 v(x, t), t + tau/2).
template <class T>
MatrixRM<T> midpoint_integrate(const VectorField<T>& v, MatrixRM<T> x, int steps) {
  if (steps < 1) throw DomainError("midpoint_integrate: steps must be >= 1");
  const T tau = T(1) / static_cast<T>(steps);
  for (int i = 0; i < steps; ++i) {
    const T t = static_cast<T>(i) * tau;
    const MatrixRM<T> half = x + (tau / T(2)) * v(x, t);
    x += tau * v(half, t + tau / T(2));
    if (!x.allFinite()) throw NumericError("midpoint_integrate: non-finite state at step " + std::to_string(i));
  }
  return x;
}

template <class T>
MatrixRM<T> integrate(const SolverConfig& solver, const VectorField<T>& v, MatrixRM<T> x_start) {
  return solver.method == SolverMethod::kEuler ? euler_integrate(v, std::move(x_start), solver.steps)
                                               : midpoint_integrate(v, std::move(x_start), solver.steps);
}

struct SuperResolution {
  AudioSignal x_h;        // naive upsampling of the input
  MelSpectrogram x_h_mel;
  MelSpectrogram y_mel;   // integrated end state
  AudioSignal y;          // synthesised waveform (before low-band replacement)
  std::uint64_t forward_calls = 0;
};

// Upsample, analyse, integrate the learned field from the prior, synthesise.
// `kind` must match the path the parameters were trained on.
SuperResolution super_resolve(const EstimatorParams<float>& params, PathKind trained_kind, const AudioSignal& x_l,
                              const MelFrontend& frontend, const SolverConfig& solver, PathKind kind,
                              const PathParams& path);

}  // namespace flowhigh
