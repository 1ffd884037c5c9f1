#include <doctest.h>

#include <cmath>
#include <sstream>

#include "chaoslab/errors.hpp"
#include "chaoslab/kernels.hpp"
#include "chaoslab/numerics.hpp"

using namespace chaoslab;

TEST_CASE("symmetric kernel stores canonical tuples and vanishes on diagonals") {
  SymmetricKernel f(3);
  f.set({3, 1, 2}, 0.5);
  CHECK(f.size() == 1);
  CHECK(f.value({1, 2, 3}) == 0.5);
  CHECK(f.value({2, 3, 1}) == 0.5);
  CHECK(f.value({1, 1, 2}) == 0.0);
  CHECK(f.value({4, 5, 6}) == 0.0);
  f.set({2, 1, 3}, 0.0);
  CHECK(f.empty());
}

TEST_CASE("ordered squared norm counts every ordering") {
  SymmetricKernel f(2);
  f.set({1, 2}, 0.5);
  f.set({1, 3}, 2.0);
  CHECK(f.ordered_squared_norm() == doctest::Approx(2.0 * (0.25 + 4.0)));
}

TEST_CASE("kernel text round trip is exact") {
  SymmetricKernel f(2);
  f.set({-1, 4}, 0.1);
  f.set({2, 7}, -1.0 / 3.0);
  std::stringstream ss;
  f.write(ss);
  const SymmetricKernel g = SymmetricKernel::read(ss);
  CHECK(g.sorted_entries() == f.sorted_entries());
}

TEST_CASE("validate_exponents") {
  SUBCASE("boundary product row") {
    const ExponentReport r = validate_exponents({{-0.75, -0.75}}, -1.5);
    CHECK(r.valid);
    CHECK(r.rows[0].partial_sums_checked);
    CHECK(r.rows[0].partial_sums_ok);
  }
  SUBCASE("exponent -1 is excluded") {
    const ExponentReport r = validate_exponents({{-0.5, -1.0}}, -1.5);
    CHECK_FALSE(r.valid);
    CHECK_FALSE(r.rows[0].exponents_in_range);
  }
  SUBCASE("k = 3 boundary partial sums") {
    const ExponentReport r = validate_exponents({{-0.6, -0.7, -0.7}}, -2.0);
    CHECK(r.valid);
    REQUIRE(r.rows[0].partial_sums.size() == 2);
    CHECK(r.rows[0].partial_sums[0] == doctest::Approx(-0.6));
    CHECK(r.rows[0].partial_sums[1] == doctest::Approx(-1.3));
    CHECK(classify_regime(3, -2.0).kind == Regime::boundary);
  }
  SUBCASE("row sum differs from alpha") {
    CHECK_FALSE(validate_exponents({{-0.75, -0.7}}, -1.5).valid);
  }
}

TEST_CASE("classify_regime") {
  CHECK(classify_regime(2, -1.2).kind == Regime::long_memory);
  CHECK(classify_regime(2, -1.5).kind == Regime::boundary);
  CHECK(classify_regime(2, -1.8).kind == Regime::short_memory);
  CHECK(classify_regime(1, -1.0).kind == Regime::long_k1_boundary);
  CHECK(classify_regime(2, -1.25).hurst() == doctest::Approx(0.75));
  CHECK_THROWS_AS(classify_regime(2, -1.0), Error);
  CHECK_THROWS_AS(regime_from_name("medium", 2, -1.5), Error);
}

TEST_CASE("eval_coefficient for the boundary product kernel") {
  const CoefficientField f(PowerKernelSpec::product({-0.75, -0.75}), 100);
  CHECK(eval_coefficient(f, {1, 2}) == doctest::Approx(std::pow(2.0, -0.75)).epsilon(1e-15));
  CHECK(eval_coefficient(f, {1, 2}) == doctest::Approx(0.594604).epsilon(1e-6));
  CHECK(eval_coefficient(f, {2, 1}) == eval_coefficient(f, {1, 2}));
  CHECK(eval_coefficient(f, {3, 3}) == 0.0);
  CHECK_THROWS_AS(eval_coefficient(f, {0, 2}), Error);
}

TEST_CASE("asymmetric rows are symmetrized by the field") {
  const CoefficientField f(PowerKernelSpec::product({-0.6, -0.9}), 10);
  const double want = 0.5 * (std::pow(2.0, -0.6) * std::pow(5.0, -0.9) + std::pow(5.0, -0.6) * std::pow(2.0, -0.9));
  CHECK(eval_coefficient(f, {2, 5}) == doctest::Approx(want).epsilon(1e-14));
  CHECK(eval_coefficient(f, {5, 2}) == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("rational perturbation") {
  const CoefficientField f(PowerKernelSpec::product({-0.75, -0.75}), 10, Perturbation::rational(2.0));
  CHECK(eval_coefficient(f, {1, 2}) == doctest::Approx(std::pow(2.0, -0.75) * (1.0 + 2.0 / 4.0)));
  CHECK_FALSE(f.separable());
}

TEST_CASE("partial_sum_kernel") {
  SUBCASE("one term") {
    const CoefficientField f(PowerKernelSpec::product({-0.75, -0.75}), 2);
    const SymmetricKernel k = partial_sum_kernel(f, 1, 1.0);
    REQUIRE(k.size() == 1);
    CHECK(k.value({-1, 0}) == doctest::Approx(eval_coefficient(f, {2, 1})));
  }
  SUBCASE("window of one lag holds no pair") {
    const CoefficientField f(PowerKernelSpec::product({-0.75, -0.75}), 1);
    CHECK(partial_sum_kernel(f, 2, 1.0).empty());
  }
  SUBCASE("brute force over (n, i)") {
    for (const auto& spec : {PowerKernelSpec::product({-0.75, -0.75}), PowerKernelSpec::product({-0.6, -0.7, -0.7})}) {
      const std::int64_t N = 7, M = 5;
      const double A = 1.7;
      const CoefficientField f(spec, M);
      const SymmetricKernel k = partial_sum_kernel(f, N, A);
      SymmetricKernel ref(spec.order);
      std::vector<std::int64_t> lags(static_cast<std::size_t>(spec.order));
      for (std::int64_t n = 1; n <= N; ++n) {
        // Canonical i_1 < ... < i_k inside [n - M, n).
        std::vector<std::int64_t> idx(static_cast<std::size_t>(spec.order));
        for (std::size_t j = 0; j < idx.size(); ++j) idx[j] = n - M + static_cast<std::int64_t>(j);
        while (true) {
          for (std::size_t j = 0; j < idx.size(); ++j) lags[j] = n - idx[j];
          IndexTuple t(idx);
          ref.add(t, eval_coefficient(f, lags) / A);
          int j = spec.order - 1;
          while (j >= 0 && idx[static_cast<std::size_t>(j)] == n - 1 - (spec.order - 1 - j)) --j;
          if (j < 0) break;
          ++idx[static_cast<std::size_t>(j)];
          for (int q = j + 1; q < spec.order; ++q) idx[static_cast<std::size_t>(q)] = idx[static_cast<std::size_t>(q - 1)] + 1;
        }
      }
      CHECK(k.size() == ref.size());
      for (const auto& [t, v] : ref.sorted_entries()) CHECK(k.value(t) == doctest::Approx(v).epsilon(1e-13));
    }
  }
  SUBCASE("support cap") {
    const CoefficientField f(PowerKernelSpec::product({-0.75, -0.75}), 1000);
    CHECK_THROWS_AS(partial_sum_kernel(f, 1000, 1.0, {1e4}), ResourceError);
  }
}

TEST_CASE("tail_mass_bound") {
  SUBCASE("k = 1 closed form") {
    const double b = tail_mass_bound(PowerKernelSpec::product({-0.6}), 10);
    CHECK(b == doctest::Approx(std::pow(10.0, -0.2) / 0.2 + std::pow(10.0, -1.2)).epsilon(1e-14));
    CHECK(b == doctest::Approx(3.218).epsilon(1e-3));
    // Direct tail sum sum_{i > 10} i^{-1.2} stays below the bound.
    const double direct = numerics::power_sum(-1.2, numerics::kUnbounded) - numerics::power_sum(-1.2, 10);
    CHECK(direct <= b);
    CHECK(direct > 0.9 * b);
  }
  SUBCASE("k = 2 bounds the true off-window mass") {
    const PowerKernelSpec g = PowerKernelSpec::product({-0.75, -0.75});
    const std::int64_t M = 100;
    const double full = numerics::power_sum(-1.5, numerics::kUnbounded);
    const double inside = numerics::power_sum(-1.5, M);
    const double outside = full * full - inside * inside;  // diagonal terms only lower this
    CHECK(tail_mass_bound(g, M) >= outside - 1e-12);
    CHECK(tail_mass_bound(g, 1000000) < 0.2 * tail_mass_bound(g, 10000));
  }
  CHECK_THROWS_AS(tail_mass_bound(PowerKernelSpec::product({-0.4}), 10), Error);
}
