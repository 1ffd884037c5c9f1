#include <doctest.h>

#include <cmath>
#include <numbers>

#include "chaoslab/analysis.hpp"
#include "chaoslab/errors.hpp"
#include "chaoslab/montecarlo.hpp"
#include "chaoslab/rng.hpp"

using namespace chaoslab;

namespace {

std::vector<double> normal_sample(std::size_t R, double sigma, std::uint64_t seed) {
  std::vector<double> x = sample_innovations(InnovationSpec{Family::gaussian}, R, seed);
  for (double& v : x) v *= sigma;
  return x;
}

CoefficientField finite_boundary(std::int64_t M) { return CoefficientField(PowerKernelSpec::product({-0.75, -0.75}), M); }

}  // namespace

TEST_CASE("KS distances") {
  CHECK(normal_cdf(0.0) == 0.5);
  CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-14));
  CHECK(ks_normal({0.0}, 1.0) == doctest::Approx(0.5));
  const std::vector<double> x = normal_sample(500, 2.0, 4);
  CHECK(ks_two_sample(x, x) == 0.0);
  CHECK(ks_two_sample({1.0, 2.0}, {3.0, 4.0}) == 1.0);
  CHECK(ks_two_sample({1.0, 2.0, 2.0}, {2.0}) == doctest::Approx(1.0 / 3.0));
  CHECK(ks_critical_one_sample_5pct(2000) == doctest::Approx(0.030366).epsilon(1e-4));
  CHECK(ks_critical_two_sample_1pct(2000) == doctest::Approx(1.628 * std::sqrt(2.0 / 2000.0)));
}

TEST_CASE("normality_report on exact normal samples") {
  int passes = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const NormalityReport r = normality_report(normal_sample(2000, 1.5, seed), 1.5);
    passes += r.pass ? 1 : 0;
  }
  CHECK(passes >= 36);
  const NormalityReport r = normality_report(normal_sample(2000, 1.5, 99), 1.5);
  CHECK(std::abs(r.skewness) < 0.2);
  CHECK(std::abs(r.excess_kurtosis) < 0.5);
  CHECK(std::abs(r.variance - 2.25) < 4.0 * r.variance_stderr);
  CHECK(r.ks_critical == doctest::Approx(1.358 / std::sqrt(2000.0)));
}

TEST_CASE("normality_report errors") {
  CHECK_THROWS_AS(normality_report(std::vector<double>(200, 1.0), 1.0), Error);
  try {
    normality_report(std::vector<double>(200, 1.0), 1.0);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::degenerate_sample);
  }
  CHECK_THROWS_AS(normality_report(normal_sample(50, 1.0, 1), 1.0), Error);
  CHECK_THROWS_AS(normality_report(normal_sample(200, 1.0, 1), 0.0), Error);
}

TEST_CASE("universality_compare") {
  const std::vector<double> a = normal_sample(2000, 1.0, 1);
  SUBCASE("sample against itself") {
    const UniversalityReport r = universality_compare({{"a", a}, {"b", a}}, 1.0);
    CHECK(r.pairs.at(0).ks == 0.0);
    CHECK(r.pass);
  }
  SUBCASE("wrong normalization is detected") {
    std::vector<double> b = normal_sample(2000, 1.0, 2);
    for (double& v : b) v *= std::sqrt(std::log(4096.0));
    CHECK_FALSE(universality_compare({{"a", a}, {"unnormalized", b}}, 1.0).pass);
  }
  CHECK_THROWS_AS(universality_compare({{"a", a}}, 1.0), Error);
  CHECK_THROWS_AS(universality_compare({{"a", a}, {"b", normal_sample(100, 1.0, 3)}}, 1.0), Error);
}

TEST_CASE("replicate_endpoint") {
  const CoefficientField f = finite_boundary(64);
  PathConfig cfg;
  cfg.N = 512;
  cfg.M = 64;
  SUBCASE("zero innovations") {
    const SourceFactory zero = [](std::uint64_t) -> std::unique_ptr<InnovationSource> {
      return std::make_unique<ZeroInnovations>();
    };
    for (double y : replicate_endpoint(f, cfg, zero, 100, 1)) CHECK(y == 0.0);
  }
  SUBCASE("independent of the thread count") {
    ReplicateOptions one, four;
    four.threads = 4;
    CHECK(replicate_endpoint(f, cfg, InnovationSpec{}, 200, 7, one) ==
          replicate_endpoint(f, cfg, InnovationSpec{}, 200, 7, four));
  }
  SUBCASE("endpoint equals the partial sum of the replicate path") {
    const std::vector<double> y = replicate_endpoint(f, cfg, InnovationSpec{}, 100, 7);
    PathConfig c = cfg;
    c.seed = rng::derive_seed(7, 3);
    const ChaosPath p = simulate_path(f, c, InnovationSpec{});
    double s = 0.0;
    for (double x : p.values) s += x;
    CHECK(y[3] == doctest::Approx(s / std::sqrt(512.0 * std::log(512.0))).epsilon(1e-12));
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(replicate_endpoint(f, cfg, InnovationSpec{}, 10, 1), Error);
    ReplicateOptions tight;
    tight.budget.max_operations = 100.0;
    CHECK_THROWS_AS(replicate_endpoint(f, cfg, InnovationSpec{}, 100, 1, tight), ResourceError);
    PathConfig wrong = cfg;
    wrong.M = 32;
    CHECK_THROWS_AS(replicate_endpoint(f, wrong, InnovationSpec{}, 100, 1), Error);
  }
}

TEST_CASE("sample variance agrees with the exact variance") {
  const CoefficientField f = finite_boundary(64);
  PathConfig cfg;
  cfg.N = 512;
  cfg.M = 64;
  const double exact = exact_variance(f, 512) / (512.0 * std::log(512.0));
  ReplicateOptions opt;
  opt.threads = 4;
  for (const InnovationSpec& spec : InnovationSpec::all()) {
    CAPTURE(spec.name());
    const NormalityReport r = normality_report(replicate_endpoint(f, cfg, spec, 1000, 21, opt), std::sqrt(exact));
    CHECK(std::abs(r.variance - exact) < 4.0 * r.variance_stderr);
  }
}

TEST_CASE("finite-dimensional covariances") {
  const CoefficientField f = finite_boundary(64);
  PathConfig cfg;
  cfg.N = 512;
  cfg.M = 64;
  cfg.grid = {0.5, 1.0};
  ReplicateOptions opt;
  opt.threads = 4;
  const FddReport r = fdd_covariance_check(f, cfg, InnovationSpec{}, 1000, 3, opt);
  REQUIRE(r.pairs.size() == 3);
  CHECK(r.pass);
  // s = t reduces to the variance at that time.
  const double A2 = 512.0 * std::log(512.0);
  CHECK(r.pairs[0].exact == doctest::Approx(exact_variance(f, 256) / A2).epsilon(1e-12));
  CHECK(r.pairs[2].exact == doctest::Approx(exact_variance(f, 512) / A2).epsilon(1e-12));
  CHECK(r.pairs[1].exact == doctest::Approx(0.5 * (exact_variance(f, 256) + exact_variance(f, 512) - exact_variance(f, 256)) / A2));
  CHECK(std::abs(r.pairs[1].z_exact) <= 4.0);
  CHECK(r.sigma2 == doctest::Approx(4.0 * c_g_separable(f.kernel())));
  PathConfig one = cfg;
  one.grid = {1.0};
  CHECK_THROWS_AS(fdd_covariance_check(f, one, InnovationSpec{}, 1000, 3), Error);
  CHECK_THROWS_AS(fdd_covariance_check(f, cfg, InnovationSpec{}, 100, 3), Error);
}

TEST_CASE("moment ratio") {
  CHECK(normal_moment_ratio(2.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(normal_moment_ratio(3.0) == doctest::Approx(std::cbrt(2.0 * std::sqrt(2.0 / std::numbers::pi))).epsilon(1e-14));
  CHECK(normal_moment_ratio(2.5) == doctest::Approx(1.087484427895792).epsilon(1e-13));
  const std::vector<double> z = normal_sample(20000, 3.0, 5);
  CHECK(moment_ratio(z, 2.5) == doctest::Approx(normal_moment_ratio(2.5)).epsilon(0.01));
  CHECK_THROWS_AS(moment_ratio(z, 3.5), Error);
  CHECK_THROWS_AS(moment_ratio(std::vector<double>(10, 0.0), 2.5), Error);
  const MomentRatioTable t = moment_ratio_diagnostic({{1024, z}, {2048, normal_sample(20000, 1.0, 6)}}, 2.5);
  CHECK(t.pass);
  CHECK(t.spread < 0.02);
  CHECK(t.to_csv().rows() == 2);
}

TEST_CASE("endpoint CSV") {
  const io::CsvTable t = endpoint_csv({0.5, -1.25});
  CHECK(t.str() == "Y_N(1)\n0.5\n-1.25\n");
}
