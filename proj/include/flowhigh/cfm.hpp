// Copyright 2026 The FlowHigh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <random>
#include <string>
#include <string_view>

#include "flowhigh/error.hpp"
#include "flowhigh/spectral.hpp"

namespace flowhigh {

// Conditional Gaussian probability paths p_t(x | x0, x1) = N(mu_t, sigma_t^2).
enum class PathKind {
  kStandardGaussianPrior,  // mu = t x1,             sigma = 1 - (1 - s) t, p0 = N(0, I)
  kConstantSigma,          // mu = t x1 + (1 - t) x0, sigma = s,            p0 = N(X_h, s^2 I)
  kDataPrior,              // mu = t x1 + (1 - t) x0, sigma = 1 - (1 - s) t, p0 = N(X_h, I)
};

std::string_view path_kind_name(PathKind kind);
PathKind parse_path_kind(std::string_view name);

struct PathParams {
  double sigma_min = 1e-4;
  bool operator==(const PathParams&) const = default;
};

template <class T>
struct ConditionPair {
  MatrixRM<T> x0;  // mel of the upsampled low-resolution input
  MatrixRM<T> x1;  // mel of the high-resolution target
};

template <class T>
struct FlowPoint {
  MatrixRM<T> x_t;
  T t{};
};

template <class T>
struct TrainingPoint {
  FlowPoint<T> point;
  MatrixRM<T> target;  // u_t(x_t | z)
};

namespace detail {
inline bool shrinking_sigma(PathKind kind) { return kind != PathKind::kConstantSigma; }
}  // namespace detail

template <class T>
MatrixRM<T> mean_mu(PathKind kind, T t, const ConditionPair<T>& z) {
  if (kind == PathKind::kStandardGaussianPrior) return t * z.x1;
  return t * z.x1 + (T(1) - t) * z.x0;
}

template <class T>
MatrixRM<T> mean_derivative(PathKind kind, const ConditionPair<T>& z) {
  if (kind == PathKind::kStandardGaussianPrior) return z.x1;
  return z.x1 - z.x0;
}

template <class T>
T std_sigma(PathKind kind, T t, const PathParams& p) {
  const T s = static_cast<T>(p.sigma_min);
  return detail::shrinking_sigma(kind) ? T(1) - (T(1) - s) * t : s;
}

template <class T>
T std_derivative(PathKind kind, const PathParams& p) {
  return detail::shrinking_sigma(kind) ? -(T(1) - static_cast<T>(p.sigma_min)) : T(0);
}

template <class T>
FlowPoint<T> sample_flow(PathKind kind, T t, const ConditionPair<T>& z, const MatrixRM<T>& eps,
                         const PathParams& p) {
  if (eps.rows() != z.x1.rows() || eps.cols() != z.x1.cols()) throw DomainError("sample_flow: noise shape mismatch");
  return {mean_mu(kind, t, z) + std_sigma(kind, t, p) * eps, t};
}

// u = (sigma'/sigma)(x - mu) + mu'
template <class T>
MatrixRM<T> target_vf_general(PathKind kind, T t, const MatrixRM<T>& x, const ConditionPair<T>& z,
                              const PathParams& p) {
  const T sigma = std_sigma(kind, t, p);
  if (sigma == T(0)) throw NumericError("target_vf_general: sigma_t is zero");
  const T ratio = std_derivative<T>(kind, p) / sigma;
  return ratio * (x - mean_mu(kind, t, z)) + mean_derivative(kind, z);
}

// Closed form of the data-prior field:
// ((x1 - x0) - (1 - s)(x - x0)) / (1 - (1 - s) t)
template <class T>
MatrixRM<T> target_vf_flh(T t, const MatrixRM<T>& x, const ConditionPair<T>& z, const PathParams& p) {
  const T keep = T(1) - static_cast<T>(p.sigma_min);
  const T denom = T(1) - keep * t;
  if (denom == T(0)) throw NumericError("target_vf_flh: zero denominator");
  return ((z.x1 - z.x0) - keep * (x - z.x0)) / denom;
}

template <class T>
MatrixRM<T> target_vf(PathKind kind, T t, const MatrixRM<T>& x, const ConditionPair<T>& z, const PathParams& p) {
  if (kind == PathKind::kDataPrior) return target_vf_flh(t, x, z, p);
  return target_vf_general(kind, t, x, z, p);
}

// Mean of squared elementwise residuals.
template <class T>
T cfm_loss(const MatrixRM<T>& v_pred, const MatrixRM<T>& u_target) {
  if (v_pred.rows() != u_target.rows() || v_pred.cols() != u_target.cols()) {
    throw DomainError("cfm_loss: shape mismatch");
  }
  if (v_pred.size() == 0) return T(0);
  return (v_pred - u_target).squaredNorm() / static_cast<T>(v_pred.size());
}

template <class T, class Rng>
MatrixRM<T> standard_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  MatrixRM<T> out(rows, cols);
  for (Eigen::Index i = 0; i < out.size(); ++i) out.data()[i] = static_cast<T>(normal(rng));
  return out;
}

// t ~ U[0, 1], eps ~ N(0, I), x_t on the path, u_t the conditional target.
template <class T, class Rng>
TrainingPoint<T> draw_training_point(PathKind kind, const ConditionPair<T>& z, const PathParams& p, Rng& rng) {
  if (z.x0.rows() != z.x1.rows() || z.x0.cols() != z.x1.cols()) throw DomainError("draw_training_point: shape mismatch");
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const T t = static_cast<T>(uniform(rng));
  const MatrixRM<T> eps = standard_normal<T>(z.x1.rows(), z.x1.cols(), rng);
  TrainingPoint<T> tp;
  tp.point = sample_flow(kind, t, z, eps, p);
  tp.target = target_vf(kind, t, tp.point.x_t, z, p);
  return tp;
}

}  // namespace flowhigh
