#include "chaoslab/montecarlo.hpp"

#include <algorithm>
#include <numbers>
#include <string>

#include "chaoslab/analysis.hpp"
#include "chaoslab/errors.hpp"
#include "chaoslab/numerics.hpp"
#include "chaoslab/parallel.hpp"
#include "chaoslab/rng.hpp"

namespace chaoslab {

using numerics::CompensatedSum;

namespace {

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

std::int64_t grid_index(double t, std::int64_t N) {
  return std::min<std::int64_t>(N, static_cast<std::int64_t>(std::floor(t * static_cast<double>(N) + 1e-9)));
}

double mean_of(const std::vector<double>& x) {
  CompensatedSum s;
  for (double v : x) s.add(v);
  return s.value() / static_cast<double>(x.size());
}

// Sample covariance (R - 1 denominator) and the standard error of its mean
// product estimator.
std::pair<double, double> covariance_with_se(const std::vector<double>& x, const std::vector<double>& y) {
  const double mx = mean_of(x);
  const double my = mean_of(y);
  const std::size_t R = x.size();
  std::vector<double> u(R);
  for (std::size_t i = 0; i < R; ++i) u[i] = (x[i] - mx) * (y[i] - my);
  const double mu = mean_of(u);
  CompensatedSum dev;
  for (double v : u) dev.add((v - mu) * (v - mu));
  const double cov = mu * static_cast<double>(R) / static_cast<double>(R - 1);
  const double se = std::sqrt(dev.value() / static_cast<double>(R - 1) / static_cast<double>(R));
  return {cov, se};
}

}  // namespace

SourceFactory stream_factory(const InnovationSpec& spec) {
  return [spec](std::uint64_t seed) -> std::unique_ptr<InnovationSource> {
    return std::make_unique<InnovationStream>(spec, seed);
  };
}

std::vector<double> PartialSumSample::column(std::size_t g) const {
  std::vector<double> out(replicates);
  for (std::size_t r = 0; r < replicates; ++r) out[r] = at(r, g);
  return out;
}

double replicate_path_cost(const CoefficientField& field, std::int64_t N) {
  if (field.separable()) return SeparablePathEngine(field, N).work_estimate();
  return brute_force_work(field, N);
}

PartialSumSample replicate_partial_sums(const CoefficientField& field, const PathConfig& cfg,
                                        const SourceFactory& sources, std::size_t R,
                                        std::uint64_t base_seed, const ReplicateOptions& opt) {
  cfg.validate(field.order());
  if (cfg.M != field.lag_horizon()) fail(ErrorKind::invalid_input, "path M differs from the field's lag horizon");
  if (R < opt.min_replicates) {
    fail(ErrorKind::invalid_input, "replication needs R >= " + std::to_string(opt.min_replicates));
  }
  const std::int64_t N = cfg.N;
  const double A = normalization_factor(regime_of(field), static_cast<double>(N));

  std::unique_ptr<SeparablePathEngine> engine;
  double cost = 0.0;
  if (field.separable()) {
    engine = std::make_unique<SeparablePathEngine>(field, N);
    cost = engine->work_estimate();
  } else {
    cost = brute_force_work(field, N);
  }
  if (cost > opt.budget.max_operations) {
    throw ResourceError("per-replicate cost " + io::format_double(cost) + " multiply-adds exceeds the budget " +
                            io::format_double(opt.budget.max_operations),
                        cost, opt.budget.max_operations);
  }

  PartialSumSample out;
  out.grid = cfg.grid;
  out.replicates = R;
  const std::size_t G = cfg.grid.size();
  out.values.assign(R * G, 0.0);
  out.endpoints.assign(R, 0.0);
  std::vector<std::int64_t> upto(G);
  for (std::size_t g = 0; g < G; ++g) upto[g] = grid_index(cfg.grid[g], N);

  parallel_for(R, opt.threads, [&](std::size_t r) {
    const std::uint64_t seed = rng::derive_seed(base_seed, r);
    const std::unique_ptr<InnovationSource> src = sources(seed);
    std::vector<double> X(static_cast<std::size_t>(N));
    if (engine) {
      engine->run(*src, X);
    } else {
      PathConfig c = cfg;
      c.seed = seed;
      X = simulate_path(field, c, *src, opt.budget).values;
    }
    CompensatedSum s;
    std::size_t g = 0;
    for (std::int64_t n = 0; n <= N; ++n) {
      while (g < G && upto[g] == n) {
        out.values[r * G + g] = s.value() / A;
        ++g;
      }
      if (n < N) s.add(X[static_cast<std::size_t>(n)]);
    }
    out.endpoints[r] = s.value() / A;
  });
  return out;
}

std::vector<double> replicate_endpoint(const CoefficientField& field, const PathConfig& cfg,
                                       const SourceFactory& sources, std::size_t R, std::uint64_t base_seed,
                                       const ReplicateOptions& opt) {
  return replicate_partial_sums(field, cfg, sources, R, base_seed, opt).endpoints;
}

std::vector<double> replicate_endpoint(const CoefficientField& field, const PathConfig& cfg,
                                       const InnovationSpec& spec, std::size_t R, std::uint64_t base_seed,
                                       const ReplicateOptions& opt) {
  return replicate_endpoint(field, cfg, stream_factory(spec), R, base_seed, opt);
}

// ------------------------------------------------------------ statistics

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double ks_normal(std::vector<double> sample, double sigma) {
  if (sample.empty()) fail(ErrorKind::insufficient_data, "KS distance of an empty sample");
  if (!(sigma > 0.0)) fail(ErrorKind::invalid_input, "KS target sigma must be > 0");
  std::sort(sample.begin(), sample.end());
  const auto R = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double F = normal_cdf(sample[i] / sigma);
    d = std::max({d, static_cast<double>(i + 1) / R - F, F - static_cast<double>(i) / R});
  }
  return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) fail(ErrorKind::insufficient_data, "KS distance of an empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

NormalityReport normality_report(const std::vector<double>& sample, double target_sigma) {
  if (sample.size() < 100) fail(ErrorKind::insufficient_data, "normality report needs at least 100 values");
  if (!(target_sigma > 0.0)) fail(ErrorKind::invalid_input, "target sigma must be > 0");
  NormalityReport rep;
  rep.R = sample.size();
  rep.target_sigma = target_sigma;
  const auto R = static_cast<double>(sample.size());
  rep.mean = mean_of(sample);
  CompensatedSum m2, m3, m4;
  for (double x : sample) {
    const double d = x - rep.mean;
    m2.add(d * d);
    m3.add(d * d * d);
    m4.add(d * d * d * d);
  }
  const double c2 = m2.value() / R;
  const double c3 = m3.value() / R;
  const double c4 = m4.value() / R;
  if (!(c2 > 0.0)) fail(ErrorKind::degenerate_sample, "sample has zero variance");
  rep.skewness = c3 / std::pow(c2, 1.5);
  rep.excess_kurtosis = c4 / (c2 * c2) - 3.0;
  rep.variance = m2.value() / (R - 1.0);
  const double s4 = rep.variance * rep.variance;
  rep.variance_stderr = std::sqrt(std::max(0.0, (c4 - s4 * (R - 3.0) / (R - 1.0)) / R));
  rep.ks = ks_normal(sample, target_sigma);
  rep.ks_critical = ks_critical_one_sample_5pct(sample.size());
  rep.pass = rep.ks < rep.ks_critical;
  return rep;
}

UniversalityReport universality_compare(const std::vector<std::pair<std::string, std::vector<double>>>& samples,
                                        double target_sigma) {
  if (samples.size() < 2) fail(ErrorKind::invalid_comparison, "universality comparison needs at least 2 samples");
  const std::size_t R = samples.front().second.size();
  for (const auto& [name, s] : samples) {
    if (s.size() != R) {
      fail(ErrorKind::invalid_comparison, "sample '" + name + "' has R=" + std::to_string(s.size()) +
                                              ", expected " + std::to_string(R));
    }
  }
  UniversalityReport rep;
  for (const auto& [name, s] : samples) rep.samples.emplace_back(name, normality_report(s, target_sigma));
  rep.pass = true;
  const double crit = ks_critical_two_sample_1pct(R);
  for (std::size_t i = 0; i < samples.size(); ++i)
    for (std::size_t j = i + 1; j < samples.size(); ++j) {
      PairwiseKs p;
      p.a = samples[i].first;
      p.b = samples[j].first;
      p.ks = ks_two_sample(samples[i].second, samples[j].second);
      p.critical = crit;
      p.pass = p.ks < crit;
      rep.pass = rep.pass && p.pass;
      rep.pairs.push_back(p);
    }
  return rep;
}

FddReport fdd_covariance_report(const CoefficientField& field, std::int64_t N, const PartialSumSample& sample,
                                unsigned threads) {
  const std::size_t G = sample.grid.size();
  if (G < 2) fail(ErrorKind::insufficient_data, "covariance check needs at least 2 grid points");
  FddReport rep;
  rep.R = sample.replicates;
  rep.sigma2 = 2.0 * factorial(field.order()) * c_g_separable(field.kernel());
  const double A = normalization_factor(regime_of(field), static_cast<double>(N));
  const double A2 = A * A;

  // Exact variances of S_n for every n the check needs.
  std::vector<std::int64_t> need;
  for (std::size_t g = 0; g < G; ++g) need.push_back(grid_index(sample.grid[g], N));
  for (std::size_t a = 0; a < G; ++a)
    for (std::size_t b = a + 1; b < G; ++b) need.push_back(need[b] - need[a]);
  std::vector<std::int64_t> sorted = need;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  sorted.erase(std::remove(sorted.begin(), sorted.end(), std::int64_t{0}), sorted.end());
  const std::vector<double> v = sorted.empty() ? std::vector<double>{} : exact_variances(field, sorted, {threads});
  auto V = [&](std::int64_t n) {
    if (n == 0) return 0.0;
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), n);
    return v[static_cast<std::size_t>(it - sorted.begin())];
  };

  rep.pass = true;
  for (std::size_t a = 0; a < G; ++a)
    for (std::size_t b = a; b < G; ++b) {
      FddPair p;
      p.s = sample.grid[a];
      p.t = sample.grid[b];
      const std::int64_t ns = need[a];
      const std::int64_t nt = need[b];
      const std::vector<double> ys = sample.column(a);
      const std::vector<double> yt = sample.column(b);
      std::tie(p.empirical, p.stderr_) = covariance_with_se(ys, yt);
      // E S_s S_t = (V(s) + V(t) - V(t - s)) / 2 by stationarity.
      p.exact = 0.5 * (V(ns) + V(nt) - V(nt - ns)) / A2;
      p.asymptotic = rep.sigma2 * std::min(p.s, p.t);
      p.z_exact = p.stderr_ > 0.0 ? (p.empirical - p.exact) / p.stderr_ : 0.0;
      p.z_asymptotic = p.stderr_ > 0.0 ? (p.empirical - p.asymptotic) / p.stderr_ : 0.0;
      if (b > a) {
        std::vector<double> inc(ys.size());
        for (std::size_t r = 0; r < ys.size(); ++r) inc[r] = yt[r] - ys[r];
        std::tie(p.increment_cov, p.increment_stderr) = covariance_with_se(inc, ys);
        p.z_increment = p.increment_stderr > 0.0 ? p.increment_cov / p.increment_stderr : 0.0;
      }
      if (!(std::abs(p.z_exact) <= 4.0)) rep.pass = false;
      rep.pairs.push_back(p);
    }
  return rep;
}

FddReport fdd_covariance_check(const CoefficientField& field, const PathConfig& cfg, const InnovationSpec& spec,
                               std::size_t R, std::uint64_t base_seed, const ReplicateOptions& opt) {
  if (cfg.grid.size() < 2) fail(ErrorKind::insufficient_data, "covariance check needs at least 2 grid points");
  if (R < 500) fail(ErrorKind::invalid_input, "covariance check needs R >= 500");
  const PartialSumSample sample = replicate_partial_sums(field, cfg, stream_factory(spec), R, base_seed, opt);
  return fdd_covariance_report(field, cfg.N, sample, opt.threads);
}

double normal_moment_ratio(double p) {
  if (!(p > 0.0)) fail(ErrorKind::domain, "moment order must be > 0");
  const double m = std::exp(0.5 * p * std::log(2.0) + std::lgamma(0.5 * (p + 1.0))) / std::sqrt(std::numbers::pi);
  return std::pow(m, 1.0 / p);
}

double moment_ratio(const std::vector<double>& sample, double p) {
  if (!(p > 2.0 && p < 3.0)) fail(ErrorKind::domain, "moment ratio needs p in (2, 3)");
  if (sample.empty()) fail(ErrorKind::insufficient_data, "moment ratio of an empty sample");
  CompensatedSum mp, m2;
  for (double x : sample) {
    mp.add(std::pow(std::abs(x), p));
    m2.add(x * x);
  }
  if (!(m2.value() > 0.0)) fail(ErrorKind::degenerate_sample, "moment ratio of an all-zero sample");
  const auto R = static_cast<double>(sample.size());
  return std::pow(mp.value() / R, 1.0 / p) / std::sqrt(m2.value() / R);
}

MomentRatioTable moment_ratio_diagnostic(const std::vector<std::pair<std::int64_t, std::vector<double>>>& samples,
                                         double p, double cap) {
  if (!(p > 2.0 && p < 3.0)) fail(ErrorKind::domain, "moment ratio needs p in (2, 3)");
  if (samples.empty()) fail(ErrorKind::insufficient_data, "moment ratio diagnostic needs samples");
  MomentRatioTable t;
  t.p = p;
  t.cap = cap;
  double lo = 0.0, hi = 0.0;
  for (const auto& [N, s] : samples) {
    const double r = moment_ratio(s, p);
    t.rows.push_back({N, r});
    lo = t.rows.size() == 1 ? r : std::min(lo, r);
    hi = t.rows.size() == 1 ? r : std::max(hi, r);
  }
  t.spread = hi / lo - 1.0;
  t.pass = t.spread < cap;
  return t;
}

io::CsvTable MomentRatioTable::to_csv() const {
  io::CsvTable t({"N", "moment_ratio"});
  for (const auto& r : rows) t.add_row({std::to_string(r.N), io::format_double(r.ratio)});
  return t;
}

io::CsvTable endpoint_csv(const std::vector<double>& endpoints) {
  io::CsvTable t({"Y_N(1)"});
  for (double v : endpoints) t.add_row({io::format_double(v)});
  return t;
}

}  // namespace chaoslab
