#include <doctest.h>

#include <cmath>

#include "chaoslab/analysis.hpp"
#include "chaoslab/errors.hpp"
#include "chaoslab/forms.hpp"
#include "chaoslab/numerics.hpp"
#include "chaoslab/process.hpp"

using namespace chaoslab;
using numerics::kUnbounded;

namespace {

double beta(double a, double b) { return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b)); }

const double kB = beta(0.25, 0.5);  // 5.2441151085842...

PowerKernelSpec boundary() { return PowerKernelSpec::product({-0.75, -0.75}); }

// Brute-force gamma(n) over ordered distinct pairs with both tuples in [1, M]^2.
double gamma_pairs(const CoefficientField& f, std::int64_t n) {
  const std::int64_t M = f.lag_horizon();
  double s = 0.0;
  for (std::int64_t i = 1; i + n <= M; ++i)
    for (std::int64_t j = 1; j + n <= M; ++j)
      if (i != j) s += eval_coefficient(f, {i, j}) * eval_coefficient(f, {i + n, j + n});
  return s;
}

}  // namespace

TEST_CASE("Beta oracle") { CHECK(kB == doctest::Approx(5.2441151085842).epsilon(1e-12)); }

TEST_CASE("closed-form and quadrature C_g") {
  CHECK(beta_power_integral(-0.75, -0.75) == doctest::Approx(kB).epsilon(1e-13));
  CHECK(c_g_separable(boundary()) == doctest::Approx(kB * kB).epsilon(1e-13));
  CHECK(c_g_separable(boundary()) == doctest::Approx(27.500743272081).epsilon(1e-12));
  const double q = C_g_quadrature(boundary());
  CHECK(q == doctest::Approx(kB * kB).epsilon(1e-6));
  CHECK(C_g_quadrature(PowerKernelSpec::product({-0.75})) == doctest::Approx(kB).epsilon(1e-6));
  CHECK(C_g_quadrature(PowerKernelSpec::product({-0.75, -0.75}, -1.0)) == doctest::Approx(q).epsilon(1e-12));
  const PowerKernelSpec k3 = PowerKernelSpec::product({-0.6, -0.6, -0.8});
  CHECK(C_g_quadrature(k3, {1e-5}) == doctest::Approx(c_g_separable(k3)).epsilon(1e-5));
  CHECK(c_g_separable(k3) == doctest::Approx(274.58299534).epsilon(1e-9));
}

TEST_CASE("quadrature spec validation") {
  QuadratureSpec bad;
  bad.rel_tol = -1.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  CHECK_THROWS_AS(C_g_quadrature(boundary(), bad), Error);
}

TEST_CASE("covariance_gamma") {
  SUBCASE("single tuple") {
    const CoefficientField f(PowerKernelSpec::product({-0.75, -0.75}, std::pow(2.0, 0.75)), 2);
    CHECK(covariance_gamma(f, 0) == doctest::Approx(2.0));
    CHECK(std::abs(covariance_gamma(f, 1)) < 1e-14);
    CHECK(std::abs(covariance_gamma(f, 2)) < 1e-14);
    CHECK(std::abs(covariance_gamma(f, 5)) < 1e-14);
    // E[S_N^2] = k! N gamma(0) = 4 N.
    CHECK(exact_variance(f, 10) == doctest::Approx(40.0));
    CHECK(exact_variance(f, 1) == doctest::Approx(2.0 * covariance_gamma(f, 0)));
  }
  SUBCASE("matches pair enumeration on a finite window") {
    for (const auto& g : {boundary(), PowerKernelSpec::product({-0.6, -0.9}), cancelling_kernel()}) {
      const CoefficientField f(g, 40);
      for (std::int64_t n : {0, 1, 3, 17, 39, 45}) CHECK(covariance_gamma(f, n) == doctest::Approx(gamma_pairs(f, n)).epsilon(1e-12));
    }
  }
  SUBCASE("gamma(0) is the one-step kernel norm over k!") {
    const CoefficientField f(boundary(), 30);
    const SymmetricKernel one = partial_sum_kernel(f, 1, 1.0);
    CHECK(covariance_gamma(f, 0) == doctest::Approx(inner_product(one, one) / 2.0).epsilon(1e-13));
  }
  SUBCASE("perturbed fields are enumerated") {
    const CoefficientField f(boundary(), 25, Perturbation::rational(0.5));
    for (std::int64_t n : {0, 2, 7}) CHECK(covariance_gamma(f, n) == doctest::Approx(gamma_pairs(f, n)).epsilon(1e-12));
    AnalysisOptions tight;
    tight.max_enumeration = 10;
    CHECK_THROWS_AS(covariance_gamma(f, 1, tight), ResourceError);
  }
  SUBCASE("infinite horizon") {
    const CoefficientField f(boundary(), kUnbounded);
    CHECK(covariance_gamma(f, 0) == doctest::Approx(5.62244805926003).epsilon(1e-12));
    // Finite windows approach the full series.
    CHECK(covariance_gamma(f, 4, 2000000) == doctest::Approx(covariance_gamma(f, 4)).epsilon(2e-3));
    const double cg = c_g_separable(boundary());
    const double r6 = 64.0 * covariance_gamma(f, 64) / cg;
    const double r8 = 256.0 * covariance_gamma(f, 256) / cg;
    const double r10 = 1024.0 * covariance_gamma(f, 1024) / cg;
    CHECK(r6 < r8);
    CHECK(r8 < r10);
    CHECK(r10 < 1.0);
    CHECK(r10 == doctest::Approx(0.778634).epsilon(1e-5));
  }
}

TEST_CASE("covariance_sequence and exact_variances are thread independent") {
  const CoefficientField f(boundary(), kUnbounded);
  const std::vector<double> one = covariance_sequence(f, 300, {1});
  const std::vector<double> four = covariance_sequence(f, 300, {4});
  CHECK(one == four);
  CHECK(one[17] == covariance_gamma(f, 17));
  const std::vector<std::int64_t> grid{10, 100, 300};
  CHECK(exact_variances(f, grid, {1}) == exact_variances(f, grid, {3}));
  CHECK(exact_variances(f, grid)[1] == doctest::Approx(exact_variance(f, 100)).epsilon(1e-14));
}

TEST_CASE("finite-horizon variance oracle") {
  const CoefficientField f(boundary(), 64);
  double ref = 512.0 * gamma_pairs(f, 0);
  for (std::int64_t n = 1; n < 512; ++n) ref += 2.0 * static_cast<double>(512 - n) * gamma_pairs(f, n);
  ref *= 2.0;
  CHECK(exact_variance(f, 512) == doctest::Approx(ref).epsilon(1e-12));
  CHECK(exact_variance(f, 512) == doctest::Approx(43715.9632370879).epsilon(1e-12));
}

TEST_CASE("variance_ratio_table") {
  const CoefficientField f(boundary(), kUnbounded);
  SUBCASE("single row") {
    const VarianceTable t = variance_ratio_table(f, {1024});
    CHECK(t.rows.size() == 1);
    CHECK_FALSE(t.degenerate);
    CHECK(t.rows[0].ratio_to_2cg == doctest::Approx(2.0 * t.rows[0].ratio));
  }
  SUBCASE("ratio rises with N") {
    const VarianceTable t = variance_ratio_table(f, {256, 1024, 4096});
    CHECK(t.rows[0].ratio < t.rows[1].ratio);
    CHECK(t.rows[1].ratio < t.rows[2].ratio);
    CHECK(t.rows[0].ratio == doctest::Approx(0.3477).epsilon(1e-3));
    CHECK(t.to_csv().header().front() == "N");
  }
  SUBCASE("cancelling kernel is degenerate") {
    const PowerKernelSpec c = cancelling_kernel();
    CHECK(std::abs(c_g_separable(c)) < 1e-12 * c_g_magnitude(c));
    const VarianceTable t = variance_ratio_table(CoefficientField(c, kUnbounded), {1024});
    CHECK(t.degenerate);
    CHECK(t.to_csv().header().back() == "ratio_to_NlnN");
  }
}

TEST_CASE("bound_diff_constant") {
  const double zeta15 = 2.612375348685488;
  CHECK(bound_diff_constant(-0.75, -0.75, {{5, 5}}) == doctest::Approx(zeta15).epsilon(1e-12));
  CHECK(bound_diff_constant(-0.75, -0.75, {{1, 1}}) == doctest::Approx(zeta15).epsilon(1e-12));
  const double far = bound_diff_constant(-0.75, -0.75, {{1, 100000}});
  CHECK(far < kB);
  CHECK(far > 0.95 * kB);
  CHECK(bound_diff_constant(-0.75, -0.75, {{1, 100000}, {5, 5}}) == doctest::Approx(far));
}

TEST_CASE("linear_case_table") {
  const LinearCaseTable t1 = linear_case_table(1.0, {1024, 4096, 16384});
  CHECK(t1.rows[0].gamma_ratio > 0.9);
  CHECK(t1.rows[0].gamma_ratio < 1.2);
  CHECK(t1.rows[0].gamma_ratio == doctest::Approx(1.08335).epsilon(1e-5));
  CHECK(t1.rows[2].variance_ratio == doctest::Approx(0.9603).epsilon(1e-3));
  // gamma(n) = c^2 H_n / n.
  double H = 0.0;
  for (int i = 1; i <= 1024; ++i) H += 1.0 / i;
  CHECK(t1.rows[0].gamma == doctest::Approx(H / 1024.0).epsilon(1e-12));
  const LinearCaseTable t2 = linear_case_table(2.0, {1024, 4096, 16384});
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(t2.rows[i].gamma == doctest::Approx(4.0 * t1.rows[i].gamma).epsilon(1e-15));
    CHECK(t2.rows[i].variance == doctest::Approx(4.0 * t1.rows[i].variance).epsilon(1e-15));
    CHECK(t2.rows[i].variance_ratio == doctest::Approx(t1.rows[i].variance_ratio).epsilon(1e-15));
  }
}

TEST_CASE("choose_lag_horizon") {
  const std::int64_t M = choose_lag_horizon(boundary(), 1e-3);
  CHECK(M == 3454144);
  const double full = covariance_gamma(CoefficientField(boundary(), kUnbounded), 0);
  CHECK(tail_mass_bound(boundary(), M) <= 1e-3 * full);
  CHECK(tail_mass_bound(boundary(), M - 1) > 1e-3 * full);
}
