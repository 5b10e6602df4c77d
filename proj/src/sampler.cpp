// Copyright 2026 The FlowHigh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "flowhigh/sampler.hpp"

#include "flowhigh/resample.hpp"

namespace flowhigh {

std::string_view solver_method_name(SolverMethod m) {
  return m == SolverMethod::kEuler ? "euler" : "midpoint";
}

SolverMethod parse_solver_method(std::string_view name) {
  if (name == "euler") return SolverMethod::kEuler;
  if (name == "midpoint") return SolverMethod::kMidpoint;
  throw ConfigError("unknown solver method '" + std::string(name) + "' (expected euler|midpoint)");
}

SolverConfig solver_for_nfe(SolverMethod method, int nfe, std::uint64_t seed) {
  if (nfe < 1) throw ConfigError("nfe must be >= 1");
  if (method == SolverMethod::kMidpoint && nfe % 2 != 0) throw ConfigError("midpoint needs an even nfe");
  return {method, method == SolverMethod::kEuler ? nfe : nfe / 2, seed};
}

SuperResolution super_resolve(const EstimatorParams<float>& params, PathKind trained_kind, const AudioSignal& x_l,
                              const MelFrontend& frontend, const SolverConfig& solver, PathKind kind,
                              const PathParams& path) {
  const int h = frontend.sample_rate();
  if (x_l.sample_rate >= h) {
    throw DomainError("super_resolve: input rate " + std::to_string(x_l.sample_rate) + " must be below " +
                      std::to_string(h));
  }
  if (kind != trained_kind) {
    throw DomainError("super_resolve: solver path '" + std::string(path_kind_name(kind)) +
                      "' does not match checkpoint path '" + std::string(path_kind_name(trained_kind)) + "'");
  }
  if (params.config.mel_bins != frontend.mel_config().mel_bins) {
    throw DomainError("super_resolve: checkpoint mel_bins does not match the frontend");
  }

  SuperResolution out;
  out.x_h = resample(x_l, h);
  out.x_h_mel = frontend.analyze(out.x_h);
  const MatrixRM<float> cond = out.x_h_mel.cast<float>();

  std::mt19937_64 rng(solver.seed);
  MatrixRM<float> x0 = prior_draw<float>(kind, cond, path, rng);
  const VectorField<float> field = [&](const MatrixRM<float>& x, float t) {
    ++out.forward_calls;
    return forward(params, x, cond, t);
  };
  out.y_mel = integrate(solver, field, std::move(x0)).cast<double>();
  out.y = frontend.synthesize(out.y_mel, out.x_h.size());
  return out;
}

}  // namespace flowhigh
