// Copyright 2026 The FlowHigh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "flowhigh/spectral.hpp"

namespace flowhigh {

// Architecture of the vector-field estimator. The defaults are the desk-scale
// model; {2 layers, 16 heads, 1024, 4096, 256 mel bins} is the full-size one.
struct EstimatorConfig {
  int layers = 2;
  int heads = 2;
  int model_dim = 64;
  int ff_dim = 256;
  int mel_bins = 80;
  int max_frames = 2048;
  // Sinusoidal frame-position encoding. Disabling it makes the network
  // equivariant to frame permutations, which the tests rely on.
  bool position_encoding = true;

  void validate() const;
  bool operator==(const EstimatorConfig&) const = default;
};

template <class T>
using Tensor = MatrixRM<T>;

template <class T>
struct LayerParams {
  Tensor<T> time_w, time_b;  // flow-step embedding -> per-layer offset
  Tensor<T> ln1_g, ln1_b;
  Tensor<T> wq, bq, wk, bk, wv, bv, wo, bo;
  Tensor<T> ln2_g, ln2_b;
  Tensor<T> ff_w1, ff_b1, ff_w2, ff_b2;
};

template <class T>
struct EstimatorParams {
  EstimatorConfig config;
  Tensor<T> in_w, in_b;  // [x_t | X_h] (2F) -> d
  std::vector<LayerParams<T>> layers;
  Tensor<T> lnf_g, lnf_b;
  Tensor<T> out_w, out_b;  // d -> F

  // Every tensor initialised to zero with the right shape.
  static EstimatorParams zeros(const EstimatorConfig& cfg);
  // Normal(0, 0.02) projections, zero biases, unit norm scales.
  static EstimatorParams initialized(const EstimatorConfig& cfg, std::uint64_t seed);

  // Visits (name, tensor) in a fixed order shared by every instance with the
  // same config.
  template <class F>
  void for_each(F&& f);
  template <class F>
  void for_each(F&& f) const;

  std::vector<Tensor<T>*> tensors();
  std::vector<std::string> names() const;
  std::size_t parameter_count() const;

  template <class U>
  EstimatorParams<U> cast() const;
};

// Largest absolute intermediate activation seen during forward passes.
struct ForwardStats {
  double max_abs_activation = 0.0;
};

template <class T>
Tensor<T> forward(const EstimatorParams<T>& params, const Tensor<T>& x_t, const Tensor<T>& cond, T t,
                  ForwardStats* stats = nullptr);

template <class T>
struct TrainingSample {
  Tensor<T> x_t;
  Tensor<T> cond;    // X_h
  Tensor<T> target;  // u_t
  T t{};
};

// Mean-squared CFM loss over every element of the batch plus its exact
// gradient. grads is overwritten. Per-sample gradients are reduced in batch
// order, so the result does not depend on the thread count.
template <class T>
T loss_and_grad(const EstimatorParams<T>& params, std::span<const TrainingSample<T>> batch,
                EstimatorParams<T>& grads, int threads = 1, ForwardStats* stats = nullptr);

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.99;
  double eps = 1e-8;
  bool operator==(const AdamConfig&) const = default;
};

template <class T>
struct AdamState {
  EstimatorParams<T> m;
  EstimatorParams<T> v;
  std::uint64_t step = 0;

  static AdamState fresh(const EstimatorConfig& cfg);
};

template <class T>
void adam_step(EstimatorParams<T>& params, const EstimatorParams<T>& grads, AdamState<T>& state,
               const AdamConfig& cfg);

// ---- implementation of the visitors ----

#define FLOWHIGH_PARAM_FIELDS(X)                                                                        \
  X("in_w", in_w) X("in_b", in_b)
#define FLOWHIGH_LAYER_FIELDS(X)                                                                        \
  X("time_w", time_w) X("time_b", time_b) X("ln1_g", ln1_g) X("ln1_b", ln1_b) X("wq", wq) X("bq", bq)   \
  X("wk", wk) X("bk", bk) X("wv", wv) X("bv", bv) X("wo", wo) X("bo", bo) X("ln2_g", ln2_g)            \
  X("ln2_b", ln2_b) X("ff_w1", ff_w1) X("ff_b1", ff_b1) X("ff_w2", ff_w2) X("ff_b2", ff_b2)
#define FLOWHIGH_TAIL_FIELDS(X) X("lnf_g", lnf_g) X("lnf_b", lnf_b) X("out_w", out_w) X("out_b", out_b)

template <class T>
template <class F>
void EstimatorParams<T>::for_each(F&& f) {
#define FLOWHIGH_VISIT(name, field) f(std::string(name), field);
  FLOWHIGH_PARAM_FIELDS(FLOWHIGH_VISIT)
#undef FLOWHIGH_VISIT
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string prefix = "layer" + std::to_string(l) + ".";
#define FLOWHIGH_VISIT(name, field) f(prefix + name, layers[l].field);
    FLOWHIGH_LAYER_FIELDS(FLOWHIGH_VISIT)
#undef FLOWHIGH_VISIT
  }
#define FLOWHIGH_VISIT(name, field) f(std::string(name), field);
  FLOWHIGH_TAIL_FIELDS(FLOWHIGH_VISIT)
#undef FLOWHIGH_VISIT
}

template <class T>
template <class F>
void EstimatorParams<T>::for_each(F&& f) const {
  const_cast<EstimatorParams*>(this)->for_each(
      [&f](const std::string& name, Tensor<T>& tensor) { f(name, static_cast<const Tensor<T>&>(tensor)); });
}

template <class T>
template <class U>
EstimatorParams<U> EstimatorParams<T>::cast() const {
  auto out = EstimatorParams<U>::zeros(config);
  auto dst = out.tensors();
  std::size_t i = 0;
  for_each([&](const std::string&, const Tensor<T>& src) { *dst[i++] = src.template cast<U>(); });
  return out;
}

}  // namespace flowhigh
