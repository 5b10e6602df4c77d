// Copyright 2026 The FlowHigh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "flowhigh/estimator.hpp"

#include <cmath>
#include <numbers>
#include <thread>

#include "flowhigh/error.hpp"

namespace flowhigh {

void EstimatorConfig::validate() const {
  if (layers < 1 || heads < 1 || model_dim < 2 || ff_dim < 1 || mel_bins < 1 || max_frames < 1) {
    throw ConfigError("estimator: all sizes must be positive");
  }
  if (model_dim % heads != 0) throw ConfigError("estimator: model_dim must be divisible by heads");
  if (model_dim % 2 != 0) throw ConfigError("estimator: model_dim must be even");
}

template <class T>
EstimatorParams<T> EstimatorParams<T>::zeros(const EstimatorConfig& cfg) {
  cfg.validate();
  const int d = cfg.model_dim, f = cfg.mel_bins, ff = cfg.ff_dim;
  EstimatorParams p;
  p.config = cfg;
  p.in_w = Tensor<T>::Zero(2 * f, d);
  p.in_b = Tensor<T>::Zero(1, d);
  p.layers.resize(static_cast<std::size_t>(cfg.layers));
  for (auto& l : p.layers) {
    l.time_w = Tensor<T>::Zero(d, d);
    l.time_b = Tensor<T>::Zero(1, d);
    l.ln1_g = Tensor<T>::Zero(1, d);
    l.ln1_b = Tensor<T>::Zero(1, d);
    for (Tensor<T>* w : {&l.wq, &l.wk, &l.wv, &l.wo}) *w = Tensor<T>::Zero(d, d);
    for (Tensor<T>* b : {&l.bq, &l.bk, &l.bv, &l.bo}) *b = Tensor<T>::Zero(1, d);
    l.ln2_g = Tensor<T>::Zero(1, d);
    l.ln2_b = Tensor<T>::Zero(1, d);
    l.ff_w1 = Tensor<T>::Zero(d, ff);
    l.ff_b1 = Tensor<T>::Zero(1, ff);
    l.ff_w2 = Tensor<T>::Zero(ff, d);
    l.ff_b2 = Tensor<T>::Zero(1, d);
  }
  p.lnf_g = Tensor<T>::Zero(1, d);
  p.lnf_b = Tensor<T>::Zero(1, d);
  p.out_w = Tensor<T>::Zero(d, f);
  p.out_b = Tensor<T>::Zero(1, f);
  return p;
}

template <class T>
EstimatorParams<T> EstimatorParams<T>::initialized(const EstimatorConfig& cfg, std::uint64_t seed) {
  auto p = zeros(cfg);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 0.02);
  p.for_each([&](const std::string& name, Tensor<T>& t) {
    const auto dot = name.rfind('.');
    const std::string leaf = dot == std::string::npos ? name : name.substr(dot + 1);
    if (leaf.ends_with("_g")) {
      t.setOnes();
    } else if (t.rows() > 1) {
      for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = static_cast<T>(normal(rng));
    }
  });
  return p;
}

template <class T>
std::vector<Tensor<T>*> EstimatorParams<T>::tensors() {
  std::vector<Tensor<T>*> out;
  for_each([&](const std::string&, Tensor<T>& t) { out.push_back(&t); });
  return out;
}

template <class T>
std::vector<std::string> EstimatorParams<T>::names() const {
  std::vector<std::string> out;
  for_each([&](const std::string& n, const Tensor<T>&) { out.push_back(n); });
  return out;
}

template <class T>
std::size_t EstimatorParams<T>::parameter_count() const {
  std::size_t n = 0;
  for_each([&](const std::string&, const Tensor<T>& t) { n += static_cast<std::size_t>(t.size()); });
  return n;
}

namespace {

constexpr double kLayerNormEps = 1e-5;
constexpr double kTimeScale = 1000.0;

// Standard transformer sinusoid: [sin(p w_0) cos(p w_0) sin(p w_1) ...].
template <class T>
void sinusoid(double position, int dim, T* out) {
  for (int i = 0; i < dim / 2; ++i) {
    const double freq = std::exp(-std::log(10000.0) * (2.0 * i) / dim);
    out[2 * i] = static_cast<T>(std::sin(position * freq));
    out[2 * i + 1] = static_cast<T>(std::cos(position * freq));
  }
}

template <class T>
Tensor<T> time_embedding(T t, int dim) {
  Tensor<T> e(1, dim);
  sinusoid(kTimeScale * static_cast<double>(t), dim, e.data());
  return e;
}

template <class T>
struct NormCache {
  Tensor<T> xhat;
  Eigen::Matrix<T, Eigen::Dynamic, 1> inv_std;
};

template <class T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& g, const Tensor<T>& b, NormCache<T>& c) {
  const Eigen::Index n = x.rows(), d = x.cols();
  c.xhat.resize(n, d);
  c.inv_std.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const T mean = x.row(r).mean();
    const T var = (x.row(r).array() - mean).square().mean();
    const T inv = T(1) / std::sqrt(var + static_cast<T>(kLayerNormEps));
    c.inv_std(r) = inv;
    c.xhat.row(r) = (x.row(r).array() - mean) * inv;
  }
  Tensor<T> y = c.xhat.array().rowwise() * g.row(0).array();
  y.rowwise() += b.row(0);
  return y;
}

template <class T>
Tensor<T> layer_norm_backward(const Tensor<T>& dy, const NormCache<T>& c, const Tensor<T>& g, Tensor<T>& dg,
                              Tensor<T>& db) {
  dg += dy.cwiseProduct(c.xhat).colwise().sum();
  db += dy.colwise().sum();
  const Tensor<T> dxhat = dy.array().rowwise() * g.row(0).array();
  Tensor<T> dx(dy.rows(), dy.cols());
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    const T mean_d = dxhat.row(r).mean();
    const T mean_dx = dxhat.row(r).cwiseProduct(c.xhat.row(r)).mean();
    dx.row(r) = c.inv_std(r) * (dxhat.row(r).array() - mean_d - c.xhat.row(r).array() * mean_dx);
  }
  return dx;
}

template <class T>
T gelu(T x) {
  return T(0.5) * x * (T(1) + std::erf(x / std::numbers::sqrt2_v<T>));
}

template <class T>
T gelu_grad(T x) {
  const T cdf = T(0.5) * (T(1) + std::erf(x / std::numbers::sqrt2_v<T>));
  const T pdf = std::exp(T(-0.5) * x * x) / std::sqrt(T(2) * std::numbers::pi_v<T>);
  return cdf + x * pdf;
}

template <class T>
Tensor<T> affine(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b) {
  Tensor<T> y = x * w;
  y.rowwise() += b.row(0);
  return y;
}

template <class T>
void affine_backward(const Tensor<T>& x, const Tensor<T>& dy, Tensor<T>& dw, Tensor<T>& db) {
  dw.noalias() += x.transpose() * dy;
  db += dy.colwise().sum();
}

template <class T>
struct LayerCache {
  NormCache<T> ln1, ln2;
  Tensor<T> n1, q, k, v, concat, n2, f1, act;
  std::vector<Tensor<T>> attn;  // per head, N x N
};

template <class T>
struct Cache {
  Tensor<T> input;  // N x 2F
  Tensor<T> temb;   // 1 x d
  std::vector<LayerCache<T>> layers;
  NormCache<T> lnf;
  Tensor<T> nf;
};

template <class T>
void track(ForwardStats* stats, const Tensor<T>& m) {
  if (stats != nullptr && m.size() > 0) {
    stats->max_abs_activation = std::max(stats->max_abs_activation, static_cast<double>(m.cwiseAbs().maxCoeff()));
  }
}

template <class T>
Tensor<T> run_forward(const EstimatorParams<T>& p, const Tensor<T>& x_t, const Tensor<T>& cond, T t, Cache<T>& c,
                      ForwardStats* stats) {
  const auto& cfg = p.config;
  const Eigen::Index n = x_t.rows();
  const int d = cfg.model_dim, f = cfg.mel_bins;
  if (x_t.cols() != f || cond.cols() != f || cond.rows() != n) {
    throw DomainError("estimator: inputs must both be N x " + std::to_string(f));
  }
  if (n < 1 || n > cfg.max_frames) throw DomainError("estimator: frame count out of range");

  c.input.resize(n, 2 * f);
  c.input.leftCols(f) = x_t;
  c.input.rightCols(f) = cond;
  Tensor<T> h = affine(c.input, p.in_w, p.in_b);
  if (cfg.position_encoding) {
    Tensor<T> pe(1, d);
    for (Eigen::Index r = 0; r < n; ++r) {
      sinusoid(static_cast<double>(r), d, pe.data());
      h.row(r) += pe;
    }
  }
  track(stats, h);
  c.temb = time_embedding(t, d);

  const int heads = cfg.heads, dh = d / heads;
  const T scale = T(1) / std::sqrt(static_cast<T>(dh));
  c.layers.resize(p.layers.size());
  for (std::size_t li = 0; li < p.layers.size(); ++li) {
    const auto& L = p.layers[li];
    auto& lc = c.layers[li];
    const Tensor<T> tproj = affine(c.temb, L.time_w, L.time_b);
    h.rowwise() += tproj.row(0);

    lc.n1 = layer_norm(h, L.ln1_g, L.ln1_b, lc.ln1);
    lc.q = affine(lc.n1, L.wq, L.bq);
    lc.k = affine(lc.n1, L.wk, L.bk);
    lc.v = affine(lc.n1, L.wv, L.bv);
    lc.concat.resize(n, d);
    lc.attn.resize(static_cast<std::size_t>(heads));
    for (int hd = 0; hd < heads; ++hd) {
      Tensor<T> s = scale * (lc.q.middleCols(hd * dh, dh) * lc.k.middleCols(hd * dh, dh).transpose());
      for (Eigen::Index r = 0; r < n; ++r) {
        const T mx = s.row(r).maxCoeff();
        s.row(r) = (s.row(r).array() - mx).exp();
        s.row(r) /= s.row(r).sum();
      }
      lc.concat.middleCols(hd * dh, dh).noalias() = s * lc.v.middleCols(hd * dh, dh);
      lc.attn[hd] = std::move(s);
    }
    h += affine(lc.concat, L.wo, L.bo);
    track(stats, h);

    lc.n2 = layer_norm(h, L.ln2_g, L.ln2_b, lc.ln2);
    lc.f1 = affine(lc.n2, L.ff_w1, L.ff_b1);
    lc.act = lc.f1.unaryExpr([](T x) { return gelu(x); });
    track(stats, lc.f1);
    h += affine(lc.act, L.ff_w2, L.ff_b2);
    track(stats, h);
  }
  c.nf = layer_norm(h, p.lnf_g, p.lnf_b, c.lnf);
  Tensor<T> out = affine(c.nf, p.out_w, p.out_b);
  track(stats, out);
  return out;
}

// Accumulates d(loss)/d(params) into g given d(loss)/d(output).
template <class T>
void run_backward(const EstimatorParams<T>& p, const Cache<T>& c, const Tensor<T>& dout, EstimatorParams<T>& g) {
  const int d = p.config.model_dim, heads = p.config.heads, dh = d / heads;
  const T scale = T(1) / std::sqrt(static_cast<T>(dh));

  affine_backward(c.nf, dout, g.out_w, g.out_b);
  Tensor<T> dh_ = layer_norm_backward<T>(dout * p.out_w.transpose(), c.lnf, p.lnf_g, g.lnf_g, g.lnf_b);

  for (std::size_t li = p.layers.size(); li-- > 0;) {
    const auto& L = p.layers[li];
    const auto& lc = c.layers[li];
    auto& G = g.layers[li];

    // Feed-forward residual.
    affine_backward(lc.act, dh_, G.ff_w2, G.ff_b2);
    Tensor<T> dact = dh_ * L.ff_w2.transpose();
    const Tensor<T> df1 = dact.cwiseProduct(lc.f1.unaryExpr([](T x) { return gelu_grad(x); }));
    affine_backward(lc.n2, df1, G.ff_w1, G.ff_b1);
    dh_ += layer_norm_backward<T>(df1 * L.ff_w1.transpose(), lc.ln2, L.ln2_g, G.ln2_g, G.ln2_b);

    // Attention residual.
    affine_backward(lc.concat, dh_, G.wo, G.bo);
    const Tensor<T> dconcat = dh_ * L.wo.transpose();
    Tensor<T> dq(lc.q.rows(), d), dk(lc.k.rows(), d), dv(lc.v.rows(), d);
    for (int hd = 0; hd < heads; ++hd) {
      const Tensor<T>& a = lc.attn[hd];
      const Tensor<T> dO = dconcat.middleCols(hd * dh, dh);
      dv.middleCols(hd * dh, dh).noalias() = a.transpose() * dO;
      const Tensor<T> da = dO * lc.v.middleCols(hd * dh, dh).transpose();
      Tensor<T> ds = a.cwiseProduct(da);
      const Eigen::Matrix<T, Eigen::Dynamic, 1> row_dot = ds.rowwise().sum();
      ds -= a.cwiseProduct(row_dot.replicate(1, a.cols()));
      ds *= scale;
      dq.middleCols(hd * dh, dh).noalias() = ds * lc.k.middleCols(hd * dh, dh);
      dk.middleCols(hd * dh, dh).noalias() = ds.transpose() * lc.q.middleCols(hd * dh, dh);
    }
    affine_backward(lc.n1, dq, G.wq, G.bq);
    affine_backward(lc.n1, dk, G.wk, G.bk);
    affine_backward(lc.n1, dv, G.wv, G.bv);
    const Tensor<T> dn1 = dq * L.wq.transpose() + dk * L.wk.transpose() + dv * L.wv.transpose();
    dh_ += layer_norm_backward<T>(dn1, lc.ln1, L.ln1_g, G.ln1_g, G.ln1_b);

    // Flow-step offset was broadcast to every frame.
    const Tensor<T> dtime = dh_.colwise().sum();
    affine_backward(c.temb, dtime, G.time_w, G.time_b);
  }
  affine_backward(c.input, dh_, g.in_w, g.in_b);
}

template <class T>
void set_zero(EstimatorParams<T>& p) {
  p.for_each([](const std::string&, Tensor<T>& t) { t.setZero(); });
}

}  // namespace

template <class T>
Tensor<T> forward(const EstimatorParams<T>& params, const Tensor<T>& x_t, const Tensor<T>& cond, T t,
                  ForwardStats* stats) {
  Cache<T> cache;
  return run_forward(params, x_t, cond, t, cache, stats);
}

template <class T>
T loss_and_grad(const EstimatorParams<T>& params, std::span<const TrainingSample<T>> batch, EstimatorParams<T>& grads,
                int threads, ForwardStats* stats) {
  if (batch.empty()) throw DomainError("loss_and_grad: empty batch");
  std::size_t total = 0;
  for (const auto& s : batch) {
    if (s.target.rows() != s.x_t.rows() || s.target.cols() != s.x_t.cols()) {
      throw DomainError("loss_and_grad: target shape mismatch");
    }
    total += static_cast<std::size_t>(s.target.size());
  }
  const T norm = T(1) / static_cast<T>(total);

  const std::size_t b = batch.size();
  std::vector<EstimatorParams<T>> per_item(b);
  std::vector<T> sq(b, T(0));
  std::vector<ForwardStats> item_stats(b);
  auto work = [&](std::size_t i) {
    const auto& s = batch[i];
    Cache<T> cache;
    const Tensor<T> out = run_forward(params, s.x_t, s.cond, s.t, cache, &item_stats[i]);
    const Tensor<T> resid = out - s.target;
    sq[i] = resid.squaredNorm();
    per_item[i] = EstimatorParams<T>::zeros(params.config);
    run_backward(params, cache, Tensor<T>((T(2) * norm) * resid), per_item[i]);
  };

  const std::size_t nthreads = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), 1, b);
  if (nthreads == 1) {
    for (std::size_t i = 0; i < b; ++i) work(i);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < nthreads; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < b; i += nthreads) work(i);
      });
    }
  }

  if (grads.layers.size() != params.layers.size() || !(grads.config == params.config)) {
    grads = EstimatorParams<T>::zeros(params.config);
  } else {
    set_zero(grads);
  }
  auto dst = grads.tensors();
  T loss = T(0);
  for (std::size_t i = 0; i < b; ++i) {
    loss += sq[i];
    auto src = per_item[i].tensors();
    for (std::size_t k = 0; k < dst.size(); ++k) *dst[k] += *src[k];
    if (stats != nullptr) stats->max_abs_activation = std::max(stats->max_abs_activation, item_stats[i].max_abs_activation);
  }
  loss *= norm;
  if (!std::isfinite(static_cast<double>(loss))) throw NumericError("loss_and_grad: non-finite loss");
  return loss;
}

template <class T>
AdamState<T> AdamState<T>::fresh(const EstimatorConfig& cfg) {
  return {EstimatorParams<T>::zeros(cfg), EstimatorParams<T>::zeros(cfg), 0};
}

template <class T>
void adam_step(EstimatorParams<T>& params, const EstimatorParams<T>& grads, AdamState<T>& state,
               const AdamConfig& cfg) {
  auto p = params.tensors();
  auto g = const_cast<EstimatorParams<T>&>(grads).tensors();
  auto m = state.m.tensors();
  auto v = state.v.tensors();
  if (p.size() != g.size() || p.size() != m.size() || p.size() != v.size()) {
    throw DomainError("adam_step: parameter layout mismatch");
  }
  ++state.step;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  const T b1 = static_cast<T>(cfg.beta1), b2 = static_cast<T>(cfg.beta2);
  const T step = static_cast<T>(cfg.lr / bc1);
  const T inv_bc2 = static_cast<T>(1.0 / bc2);
  const T eps = static_cast<T>(cfg.eps);
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (g[k]->rows() != p[k]->rows() || g[k]->cols() != p[k]->cols()) throw DomainError("adam_step: shape mismatch");
    m[k]->array() = b1 * m[k]->array() + (T(1) - b1) * g[k]->array();
    v[k]->array() = b2 * v[k]->array() + (T(1) - b2) * g[k]->array().square();
    p[k]->array() -= step * m[k]->array() / ((v[k]->array() * inv_bc2).sqrt() + eps);
  }
}

#define FLOWHIGH_INSTANTIATE(T)                                                                          \
  template struct EstimatorParams<T>;                                                                   \
  template struct AdamState<T>;                                                                         \
  template Tensor<T> forward(const EstimatorParams<T>&, const Tensor<T>&, const Tensor<T>&, T, ForwardStats*); \
  template T loss_and_grad(const EstimatorParams<T>&, std::span<const TrainingSample<T>>, EstimatorParams<T>&, \
                           int, ForwardStats*);                                                          \
  template void adam_step(EstimatorParams<T>&, const EstimatorParams<T>&, AdamState<T>&, const AdamConfig&);

FLOWHIGH_INSTANTIATE(float)
FLOWHIGH_INSTANTIATE(double)

}  // namespace flowhigh
