// Copyright 2026 The FlowHigh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "doctest.h"
#include "flowhigh/cfm.hpp"
#include "flowhigh/checkpoint.hpp"
#include "flowhigh/estimator.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace flowhigh;
using Md = MatrixRM<double>;

using fh_test::loss_only;
using fh_test::random_batch;
using fh_test::randomized;
using fh_test::tiny_config;

TEST_SUITE("estimator") {
  TEST_CASE("config validation") {
    EstimatorConfig c = tiny_config();
    c.heads = 3;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = tiny_config();
    c.layers = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }

  TEST_CASE("output shape follows the frame count") {
    EstimatorConfig c;
    c.max_frames = 128;
    const auto p = EstimatorParams<float>::initialized(c, 1);
    std::mt19937_64 rng(1);
    for (int n : {1, 64, 100}) {
      const auto x = standard_normal<float>(n, 80, rng);
      const auto y = forward<float>(p, x, x, 0.3f);
      CHECK(y.rows() == n);
      CHECK(y.cols() == 80);
      CHECK(y.allFinite());
    }
    const auto too_long = standard_normal<float>(129, 80, rng);
    CHECK_THROWS_AS(forward<float>(p, too_long, too_long, 0.3f), DomainError);
  }

  TEST_CASE("all-zero parameters give zero output") {
    const auto p = EstimatorParams<double>::zeros(tiny_config());
    std::mt19937_64 rng(2);
    const Md x = standard_normal<double>(4, 6, rng);
    CHECK(forward(p, x, x, 0.7).cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("frame permutation equivariance without position encoding") {
    EstimatorConfig c = tiny_config();
    c.position_encoding = false;
    const auto p = randomized(c, 3);
    std::mt19937_64 rng(3);
    const Md x = standard_normal<double>(5, 6, rng);
    const Md cond = standard_normal<double>(5, 6, rng);
    Md xs = x, cs = cond;
    xs.row(1).swap(xs.row(3));
    cs.row(1).swap(cs.row(3));
    Md y = forward(p, x, cond, 0.4);
    const Md ys = forward(p, xs, cs, 0.4);
    y.row(1).swap(y.row(3));
    CHECK((y - ys).cwiseAbs().maxCoeff() < 1e-12);

    c.position_encoding = true;
    const auto q = randomized(c, 3);
    Md z = forward(q, x, cond, 0.4);
    z.row(1).swap(z.row(3));
    CHECK((z - forward(q, xs, cs, 0.4)).cwiseAbs().maxCoeff() > 1e-6);
  }

  TEST_CASE("gradients match central finite differences") {
    const auto check = fh_test::check_gradients(tiny_config(), 4);
    CHECK(check.analytic_loss == doctest::Approx(check.reference_loss).epsilon(1e-12));
    CHECK(check.components == EstimatorParams<double>::zeros(tiny_config()).parameter_count());
    for (const auto& [name, worst] : check.worst) {
      INFO(name);
      CHECK(worst < 1e-4);
    }
  }

  TEST_CASE("zero residual gives zero gradient, doubled residual doubles it") {
    const EstimatorConfig c = tiny_config();
    const auto p = randomized(c, 5);
    std::mt19937_64 rng(5);
    auto batch = random_batch(2, 4, 6, rng);
    for (auto& s : batch) s.target = forward(p, s.x_t, s.cond, s.t);
    auto grads = EstimatorParams<double>::zeros(c);
    CHECK(loss_and_grad<double>(p, batch, grads) == 0.0);
    for (const auto* g : grads.tensors()) CHECK(g->cwiseAbs().maxCoeff() == 0.0);

    batch = random_batch(2, 4, 6, rng);
    auto g1 = EstimatorParams<double>::zeros(c);
    loss_and_grad<double>(p, batch, g1);
    for (auto& s : batch) s.target = 2.0 * s.target - forward(p, s.x_t, s.cond, s.t);
    auto g2 = EstimatorParams<double>::zeros(c);
    loss_and_grad<double>(p, batch, g2);
    CHECK((g2.out_w - 2.0 * g1.out_w).cwiseAbs().maxCoeff() < 1e-12 * g1.out_w.cwiseAbs().maxCoeff() + 1e-15);
    CHECK((g2.out_b - 2.0 * g1.out_b).cwiseAbs().maxCoeff() < 1e-12 * g1.out_b.cwiseAbs().maxCoeff() + 1e-15);
  }

  TEST_CASE("gradient reduction does not depend on the thread count") {
    EstimatorConfig c = tiny_config();
    const auto p = randomized(c, 6).cast<float>();
    std::mt19937_64 rng(6);
    std::vector<TrainingSample<float>> batch;
    for (const auto& s : random_batch(7, 5, 6, rng)) {
      batch.push_back({s.x_t.cast<float>(), s.cond.cast<float>(), s.target.cast<float>(), static_cast<float>(s.t)});
    }
    auto a = EstimatorParams<float>::zeros(c);
    auto b = EstimatorParams<float>::zeros(c);
    const float la = loss_and_grad<float>(p, batch, a, 1);
    const float lb = loss_and_grad<float>(p, batch, b, 3);
    CHECK(la == lb);
    const auto ta = a.tensors();
    const auto tb = b.tensors();
    for (std::size_t k = 0; k < ta.size(); ++k) CHECK(*ta[k] == *tb[k]);
  }

  TEST_CASE("Adam single step") {
    const EstimatorConfig c = tiny_config();
    auto p = EstimatorParams<double>::zeros(c);
    auto g = EstimatorParams<double>::zeros(c);
    for (auto* t : g.tensors()) t->setOnes();
    auto state = AdamState<double>::fresh(c);
    adam_step(p, g, state, AdamConfig{1e-3, 0.9, 0.99, 1e-8});
    CHECK(state.step == 1);
    for (const auto* t : p.tensors()) {
      CHECK(t->maxCoeff() == doctest::Approx(-1e-3 / (1.0 + 1e-8)).epsilon(1e-12));
      CHECK(t->minCoeff() == doctest::Approx(-1e-3 / (1.0 + 1e-8)).epsilon(1e-12));
    }
  }

  TEST_CASE("Adam leaves parameters alone on zero gradient") {
    const EstimatorConfig c = tiny_config();
    auto p = EstimatorParams<double>::initialized(c, 7);
    const auto before = p;
    auto state = AdamState<double>::fresh(c);
    adam_step(p, EstimatorParams<double>::zeros(c), state, AdamConfig{});
    const auto a = p.tensors();
    auto copy = before;
    const auto b = copy.tensors();
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(*a[k] == *b[k]);
  }

  TEST_CASE("Adam descends a quadratic") {
    const EstimatorConfig c = tiny_config();
    auto p = randomized(c, 8);
    auto state = AdamState<double>::fresh(c);
    auto quad = [](EstimatorParams<double>& q) {
      double s = 0.0;
      for (const auto* t : q.tensors()) s += 0.5 * t->squaredNorm();
      return s;
    };
    double prev = quad(p);
    for (int step = 0; step < 5; ++step) {
      auto g = p;  // gradient of 0.5 |theta|^2
      adam_step(p, g, state, AdamConfig{1e-2, 0.9, 0.99, 1e-8});
      const double now = quad(p);
      CHECK(now < prev);
      prev = now;
    }
  }

  TEST_CASE("overfits a single pair without activation blow-up") {
    EstimatorConfig c;
    c.mel_bins = 16;
    c.max_frames = 32;
    auto p = EstimatorParams<float>::initialized(c, 9);
    std::mt19937_64 rng(9);
    const ConditionPair<float> z{standard_normal<float>(12, 16, rng), standard_normal<float>(12, 16, rng)};
    const MatrixRM<float> eps = standard_normal<float>(12, 16, rng);
    std::vector<TrainingSample<float>> batch;
    for (float t : {0.0f, 0.25f, 0.5f, 0.75f}) {
      const auto fp = sample_flow(PathKind::kDataPrior, t, z, eps, PathParams{});
      batch.push_back({fp.x_t, z.x0, target_vf(PathKind::kDataPrior, t, fp.x_t, z, PathParams{}), t});
    }
    auto grads = EstimatorParams<float>::zeros(c);
    auto state = AdamState<float>::fresh(c);
    ForwardStats stats;
    const double first = loss_and_grad<float>(p, batch, grads, 1, &stats);
    double last = first;
    for (int step = 0; step < 500; ++step) {
      adam_step(p, grads, state, AdamConfig{1e-3, 0.9, 0.99, 1e-8});
      last = loss_and_grad<float>(p, batch, grads, 1, &stats);
    }
    MESSAGE("overfit loss " << first << " -> " << last);
    CHECK(last * 100.0 <= first);
    CHECK(stats.max_abs_activation < 1e6);
  }
}

TEST_SUITE("checkpoint") {
  TEST_CASE("round trip is bit-exact, with and without optimizer state") {
    const EstimatorConfig c = tiny_config();
    Checkpoint ck;
    ck.params = randomized(c, 10).cast<float>();
    ck.kind = PathKind::kConstantSigma;
    ck.path = PathParams{3e-4};
    const auto plain = decode_checkpoint(encode_checkpoint(ck));
    CHECK(plain.kind == PathKind::kConstantSigma);
    CHECK(plain.path.sigma_min == 3e-4);
    CHECK(plain.params.config == c);
    CHECK_FALSE(plain.adam.has_value());
    auto a = ck.params;
    auto b = plain.params;
    for (std::size_t k = 0; k < a.tensors().size(); ++k) CHECK(*a.tensors()[k] == *b.tensors()[k]);

    ck.adam = AdamState<float>::fresh(c);
    ck.adam->step = 17;
    ck.adam->m = randomized(c, 11).cast<float>();
    ck.adam->v = randomized(c, 12).cast<float>();
    const auto bytes = encode_checkpoint(ck);
    const auto full = decode_checkpoint(bytes);
    REQUIRE(full.adam.has_value());
    CHECK(full.adam->step == 17);
    CHECK(encode_checkpoint(full) == bytes);

    const auto dir = fh_test::scratch_dir("ckpt");
    save_checkpoint(ck, dir / "a.fhck");
    CHECK(encode_checkpoint(load_checkpoint(dir / "a.fhck", &c)) == bytes);
  }

  TEST_CASE("config mismatch, bad magic and truncation") {
    const EstimatorConfig c = tiny_config();
    Checkpoint ck;
    ck.params = EstimatorParams<float>::initialized(c, 13);
    auto bytes = encode_checkpoint(ck);
    EstimatorConfig other = c;
    other.mel_bins = 8;
    CHECK_THROWS_AS(decode_checkpoint(bytes, &other), ConfigError);
    auto bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(decode_checkpoint(bad), FormatError);
    auto cut = bytes;
    cut.resize(cut.size() / 2);
    CHECK_THROWS_AS(decode_checkpoint(cut), FormatError);
    auto extra = bytes;
    extra.push_back(0);
    CHECK_THROWS_AS(decode_checkpoint(extra), FormatError);
  }
}
