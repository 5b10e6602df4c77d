// Copyright 2026 The FlowHigh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "doctest.h"
#include "flowhigh/resample.hpp"
#include "flowhigh/sampler.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace flowhigh;
using Md = MatrixRM<double>;

namespace {

Md scalar(double v) { return Md::Constant(1, 1, v); }

}  // namespace

TEST_SUITE("sampler") {
  TEST_CASE("solver names and NFE budgets") {
    CHECK(parse_solver_method("euler") == SolverMethod::kEuler);
    CHECK(parse_solver_method("midpoint") == SolverMethod::kMidpoint);
    CHECK_THROWS_AS(parse_solver_method("rk4"), ConfigError);
    CHECK(solver_for_nfe(SolverMethod::kEuler, 3).steps == 3);
    CHECK(solver_for_nfe(SolverMethod::kMidpoint, 4).steps == 2);
    CHECK(solver_for_nfe(SolverMethod::kMidpoint, 4).nfe() == 4);
    CHECK_THROWS_AS(solver_for_nfe(SolverMethod::kMidpoint, 3), ConfigError);
    CHECK_THROWS_AS(solver_for_nfe(SolverMethod::kEuler, 0), ConfigError);
  }

  TEST_CASE("prior draws") {
    std::mt19937_64 rng(1);
    const Md xh = standard_normal<double>(6, 5, rng);
    std::mt19937_64 a(42), b(42);
    const Md start = prior_draw(PathKind::kDataPrior, xh, PathParams{}, a);
    const Md eps = standard_normal<double>(6, 5, b);
    CHECK(start == Md(xh + eps));
    const Md zero = Md::Zero(6, 5);
    std::mt19937_64 c(42), d(42);
    CHECK(prior_draw(PathKind::kDataPrior, zero, PathParams{}, c) == standard_normal<double>(6, 5, d));

    const Md big = Md::Zero(1000, 100);
    CHECK(std::abs(prior_draw(PathKind::kStandardGaussianPrior, big, PathParams{}, rng).mean()) < 0.02);

    const Md cs = prior_draw(PathKind::kConstantSigma, xh, PathParams{1e-4}, rng);
    CHECK((cs - xh).cwiseAbs().maxCoeff() < 1e-3);
  }

  TEST_CASE("constant fields are integrated exactly") {
    const Md x0 = (Md(2, 2) << 1.0, -2.0, 0.5, 3.0).finished();
    const Md c = (Md(2, 2) << 0.25, 1.5, -0.75, 2.0).finished();
    const VectorField<double> v = [&](const Md&, double) { return c; };
    for (int n : {1, 2, 3, 7, 16}) {
      CHECK((euler_integrate(v, x0, n) - (x0 + c)).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((midpoint_integrate(v, x0, n) - (x0 + c)).cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  TEST_CASE("hand-integrated time fields") {
    const VectorField<double> lin = [](const Md& x, double t) { return Md::Constant(x.rows(), x.cols(), t); };
    const VectorField<double> quad = [](const Md& x, double t) { return Md::Constant(x.rows(), x.cols(), t * t); };
    CHECK(euler_integrate(lin, scalar(0.0), 1)(0, 0) == 0.0);
    CHECK(euler_integrate(lin, scalar(0.0), 2)(0, 0) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(midpoint_integrate(lin, scalar(0.0), 1)(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    const double one = midpoint_integrate(quad, scalar(0.0), 1)(0, 0);
    const double two = midpoint_integrate(quad, scalar(0.0), 2)(0, 0);
    CHECK(one == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(two == doctest::Approx(0.3125).epsilon(1e-15));
    CHECK((1.0 / 3.0 - one) / (1.0 / 3.0 - two) == doctest::Approx(4.0).epsilon(1e-12));
  }

  TEST_CASE("convergence orders") {
    // dx/dt = x cos(t) + t, integrated numerically against a fine reference.
    const VectorField<double> v = [](const Md& x, double t) {
      return (x.array() * std::cos(t) + t).matrix().eval();
    };
    const Md x0 = (Md(1, 3) << 0.5, -1.0, 2.0).finished();
    const Md exact = midpoint_integrate(v, x0, 1 << 16);
    const std::vector<int> steps{8, 16, 32, 64, 128};
    std::vector<double> e_err, m_err;
    for (int n : steps) {
      e_err.push_back((euler_integrate(v, x0, n) - exact).cwiseAbs().maxCoeff());
      m_err.push_back((midpoint_integrate(v, x0, n) - exact).cwiseAbs().maxCoeff());
    }
    const double se = fh_test::convergence_slope(steps, e_err);
    const double sm = fh_test::convergence_slope(steps, m_err);
    MESSAGE("euler slope " << se << ", midpoint slope " << sm);
    CHECK(se >= 0.9);
    CHECK(se <= 1.1);
    CHECK(sm >= 1.9);
    CHECK(sm <= 2.1);
  }

  TEST_CASE("NFE accounting") {
    int calls = 0;
    const VectorField<double> v = [&](const Md& x, double) {
      ++calls;
      return x;
    };
    for (int n : {1, 2, 5}) {
      calls = 0;
      integrate(SolverConfig{SolverMethod::kEuler, n, 0}, v, scalar(1.0));
      CHECK(calls == n);
      calls = 0;
      integrate(SolverConfig{SolverMethod::kMidpoint, n, 0}, v, scalar(1.0));
      CHECK(calls == 2 * n);
      CHECK(SolverConfig{SolverMethod::kMidpoint, n, 0}.nfe() == 2 * n);
    }
  }

  TEST_CASE("non-finite states are reported") {
    const VectorField<double> v = [](const Md& x, double) {
      return Md::Constant(x.rows(), x.cols(), std::numeric_limits<double>::infinity());
    };
    CHECK_THROWS_AS(euler_integrate(v, scalar(0.0), 1), NumericError);
    CHECK_THROWS_AS(midpoint_integrate(v, scalar(0.0), 1), NumericError);
  }

  TEST_CASE("analytic field carries the prior onto the target") {
    std::mt19937_64 rng(3);
    const ConditionPair<double> z{standard_normal<double>(8, 5, rng), standard_normal<double>(8, 5, rng)};
    const PathParams p{1e-4};
    const VectorField<double> oracle = [&](const Md& x, double t) {
      return target_vf(PathKind::kConstantSigma, t, x, z, p);
    };
    CHECK((euler_integrate(oracle, z.x0, 1) - z.x1).cwiseAbs().maxCoeff() < 1e-6);
    const Md start = prior_draw(PathKind::kConstantSigma, z.x0, p, rng);
    const Md end = euler_integrate(oracle, start, 1);
    CHECK((end - z.x1).cwiseAbs().maxCoeff() < 6.0 * p.sigma_min);
  }
}

TEST_SUITE("super_resolve") {
  TEST_CASE("plumbing, call counts and determinism") {
    const StftConfig stft;
    const MelConfig mel;
    const MelFrontend frontend(stft, mel, 16000);
    EstimatorConfig ec;
    const auto params = EstimatorParams<float>::initialized(ec, 1);
    AudioSignal y = fh_test::sine(300.0, 0.4, 16000, 16000);
    y = fh_test::add(y, fh_test::sine(5200.0, 0.1, 16000, 16000));
    const DegradedPair pair = simulate_lr(y, 8000, {8, 0.05, 0.0});

    const SolverConfig euler{SolverMethod::kEuler, 1, 5};
    const SuperResolution a = super_resolve(params, PathKind::kDataPrior, pair.x_l, frontend, euler,
                                            PathKind::kDataPrior, PathParams{});
    CHECK(a.forward_calls == 1);
    CHECK(a.y.sample_rate == 16000);
    CHECK(a.y.size() == pair.x_h.size());
    CHECK(a.x_h_mel.rows() == frontend.analyze(a.x_h).rows());
    CHECK(a.y_mel.rows() == a.x_h_mel.rows());
    CHECK(a.y_mel.cols() == 80);

    const SuperResolution b = super_resolve(params, PathKind::kDataPrior, pair.x_l, frontend, euler,
                                            PathKind::kDataPrior, PathParams{});
    CHECK(a.y_mel == b.y_mel);
    CHECK(a.y.samples == b.y.samples);

    const SuperResolution m = super_resolve(params, PathKind::kDataPrior, pair.x_l, frontend,
                                            SolverConfig{SolverMethod::kMidpoint, 1, 5}, PathKind::kDataPrior,
                                            PathParams{});
    CHECK(m.forward_calls == 2);

    CHECK_THROWS_AS(super_resolve(params, PathKind::kDataPrior, y, frontend, euler, PathKind::kDataPrior, PathParams{}),
                    DomainError);
    CHECK_THROWS_AS(super_resolve(params, PathKind::kDataPrior, pair.x_l, frontend, euler,
                                  PathKind::kConstantSigma, PathParams{}),
                    DomainError);
  }
}
