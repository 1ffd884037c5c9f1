#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "chaoslab/analysis.hpp"
#include "chaoslab/errors.hpp"
#include "chaoslab/innovations.hpp"
#include "chaoslab/process.hpp"

using namespace chaoslab;

namespace {

// X(n) = sum over ordered distinct (i, j) in [1, M]^2 of a(i, j) e_{n-i} e_{n-j}.
std::vector<double> double_loop(const CoefficientField& f, std::int64_t N, const InnovationSource& src) {
  const std::int64_t M = f.lag_horizon();
  std::vector<double> eps(static_cast<std::size_t>(N + M));
  src.fill(-M, eps);  // e_j at slot j + M
  std::vector<double> X(static_cast<std::size_t>(N), 0.0);
  for (std::int64_t n = 1; n <= N; ++n) {
    double s = 0.0;
    for (std::int64_t i = 1; i <= M; ++i)
      for (std::int64_t j = 1; j <= M; ++j) {
        if (i == j) continue;
        s += eval_coefficient(f, {i, j}) * eps[static_cast<std::size_t>(n - i + M)] * eps[static_cast<std::size_t>(n - j + M)];
      }
    X[static_cast<std::size_t>(n - 1)] = s;
  }
  return X;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

double max_abs(const std::vector<double>& a) {
  double d = 0.0;
  for (double x : a) d = std::max(d, std::abs(x));
  return d;
}

// Weight that makes a(1, 2) = 1 for the exponents (-3/4, -3/4) at M = 2.
CoefficientField single_tuple_field() {
  return CoefficientField(PowerKernelSpec::product({-0.75, -0.75}, std::pow(2.0, 0.75)), 2);
}

}  // namespace

TEST_CASE("normalization_factor") {
  CHECK(normalization_factor(classify_regime(2, -1.5), 100.0) == doctest::Approx(std::sqrt(100.0 * std::log(100.0))));
  CHECK(normalization_factor(classify_regime(2, -1.5), 100.0) == doctest::Approx(21.4597).epsilon(1e-5));
  CHECK(normalization_factor(classify_regime(2, -1.25), 16.0) == doctest::Approx(8.0).epsilon(1e-14));
  const double e2 = std::exp(2.0);
  CHECK(normalization_factor(classify_regime(1, -1.0), e2) == doctest::Approx(2.0 * std::numbers::e).epsilon(1e-14));
  CHECK(normalization_factor(classify_regime(2, -1.8), 49.0) == doctest::Approx(7.0));
  CHECK_THROWS_AS(normalization_factor(classify_regime(2, -1.5), 1.0), Error);
}

TEST_CASE("single-tuple kernel") {
  const CoefficientField f = single_tuple_field();
  CHECK(eval_coefficient(f, {1, 2}) == doctest::Approx(1.0).epsilon(1e-15));
  PathConfig cfg;
  cfg.N = 20;
  cfg.M = 2;
  const InnovationStream src(InnovationSpec{Family::gaussian}, 3);
  const ChaosPath p = simulate_path(f, cfg, src);
  for (std::int64_t n = 1; n <= cfg.N; ++n) {
    CHECK(p.values[static_cast<std::size_t>(n - 1)] == doctest::Approx(2.0 * src.at(n - 1) * src.at(n - 2)).epsilon(1e-14));
  }
  const ChaosPath q = fast_path_product_kernel(f, cfg, src);
  CHECK(max_abs_diff(p.values, q.values) < 1e-13);
}

TEST_CASE("zero innovations give a zero path") {
  const CoefficientField f(PowerKernelSpec::product({-0.75, -0.75}), 16);
  PathConfig cfg;
  cfg.N = 32;
  cfg.M = 16;
  const ZeroInnovations zero;
  CHECK(max_abs(simulate_path(f, cfg, zero).values) == 0.0);
  CHECK(max_abs(fast_path_product_kernel(f, cfg, zero).values) == 0.0);
}

TEST_CASE("simulate_path matches an independent double loop") {
  const CoefficientField f(PowerKernelSpec::product({-0.75, -0.75}), 64);
  PathConfig cfg;
  cfg.N = 256;
  cfg.M = 64;
  cfg.seed = 11;
  const InnovationStream src(InnovationSpec{Family::gaussian}, cfg.seed);
  const ChaosPath p = simulate_path(f, cfg, InnovationSpec{Family::gaussian});
  CHECK(max_abs_diff(p.values, double_loop(f, cfg.N, src)) < 1e-12);
}

TEST_CASE("separable engine matches brute force in every mode") {
  struct Case {
    PowerKernelSpec g;
    std::int64_t N, M;
    EngineOptions opt;
    const char* what;
  };
  EngineOptions no_direct;
  no_direct.direct_limit = 0.0;
  const PowerKernelSpec boundary = PowerKernelSpec::product({-0.75, -0.75});
  const std::vector<Case> cases = {
      {boundary, 128, 32, {}, "direct"},
      {boundary, 256, 256, no_direct, "transform"},
      {boundary, 64, 1024, no_direct, "far field"},
      {PowerKernelSpec::product({-0.6, -0.9}), 64, 700, no_direct, "asymmetric row, far field"},
      {PowerKernelSpec::product({-0.6, -0.7, -0.7}), 64, 16, {}, "k = 3 direct"},
      {PowerKernelSpec::product({-0.6, -0.7, -0.7}), 48, 300, no_direct, "k = 3 far field"},
      {cancelling_kernel(), 64, 600, no_direct, "mixed-sign combination"},
  };
  for (const Case& c : cases) {
    CAPTURE(c.what);
    const CoefficientField f(c.g, c.M);
    PathConfig cfg;
    cfg.N = c.N;
    cfg.M = c.M;
    for (const Family fam : {Family::gaussian, Family::centered_exponential}) {
      const InnovationStream src(InnovationSpec{fam}, 5);
      const SeparablePathEngine engine(f, c.N, c.opt);
      std::vector<double> X(static_cast<std::size_t>(c.N));
      engine.run(src, X);
      const std::vector<double> ref = simulate_path(f, cfg, src).values;
      CHECK(max_abs_diff(X, ref) <= 1e-10 * std::max(1.0, max_abs(ref)));
    }
  }
}

TEST_CASE("engine mode selection") {
  const CoefficientField near(PowerKernelSpec::product({-0.75, -0.75}), 1000);
  CHECK_FALSE(SeparablePathEngine(near, 1000).uses_far_field());
  const CoefficientField far(PowerKernelSpec::product({-0.75, -0.75}), 100000);
  CHECK(SeparablePathEngine(far, 1000).uses_far_field());
  CHECK(SeparablePathEngine(far, 1000).work_estimate() < brute_force_work(far, 1000));
}

TEST_CASE("fast path refuses perturbed fields") {
  const CoefficientField f(PowerKernelSpec::product({-0.75, -0.75}), 8, Perturbation::rational(1.0));
  PathConfig cfg;
  cfg.N = 8;
  cfg.M = 8;
  CHECK_THROWS_AS(fast_path_product_kernel(f, cfg, InnovationSpec{}), Error);
  CHECK_NOTHROW(simulate_path(f, cfg, InnovationSpec{}));
}

TEST_CASE("budget and configuration errors") {
  const CoefficientField f(PowerKernelSpec::product({-0.75, -0.75}), 64);
  PathConfig cfg;
  cfg.N = 64;
  cfg.M = 64;
  CHECK_THROWS_AS(simulate_path(f, cfg, InnovationSpec{}, {10.0}), ResourceError);
  cfg.M = 32;
  CHECK_THROWS_AS(simulate_path(f, cfg, InnovationSpec{}), Error);
  cfg.M = 64;
  cfg.grid = {0.5, 0.25};
  CHECK_THROWS_AS(simulate_path(f, cfg, InnovationSpec{}), Error);
  const CoefficientField one(PowerKernelSpec::product({-0.75, -0.75}), 1);
  PathConfig c1;
  c1.M = 1;
  try {
    simulate_path(one, c1, InnovationSpec{});
    FAIL("expected a degenerate window");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::degenerate_window);
  }
}

TEST_CASE("partial_sum_process") {
  ChaosPath p;
  p.values = {1.0, -1.0, 2.0, 0.0};
  p.config.N = 4;
  p.config.grid = {0.5, 1.0};
  const auto Y = partial_sum_process(p, classify_regime(2, -1.8));
  CHECK(Y[0].second == 0.0);
  CHECK(Y[1].second == doctest::Approx(1.0));

  ChaosPath z;
  z.values.assign(16, 0.0);
  z.config.grid = {0.25, 1.0};
  for (const auto& [t, y] : partial_sum_process(z, classify_regime(2, -1.5))) CHECK(y == 0.0);
}

TEST_CASE("partial sums recomputed from a stored path") {
  const CoefficientField f(PowerKernelSpec::product({-0.75, -0.75}), 32);
  PathConfig cfg;
  cfg.N = 400;
  cfg.M = 32;
  cfg.seed = 9;
  cfg.grid = {0.25, 0.5, 1.0};
  const ChaosPath p = fast_path_product_kernel(f, cfg, InnovationSpec{});
  const auto Y = partial_sum_process(p, classify_regime(2, -1.5));
  const double A = std::sqrt(400.0 * std::log(400.0));
  for (const auto& [t, y] : Y) {
    double s = 0.0;
    for (int n = 0; n < static_cast<int>(t * 400); ++n) s += p.values[static_cast<std::size_t>(n)];
    CHECK(y == doctest::Approx(s / A).epsilon(1e-12));
  }
}
