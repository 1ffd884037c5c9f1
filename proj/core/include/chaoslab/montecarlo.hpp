#pragma once

#include <cstdint>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "chaoslab/innovations.hpp"
#include "chaoslab/io.hpp"
#include "chaoslab/kernels.hpp"
#include "chaoslab/process.hpp"

namespace chaoslab {

// Innovation source for replicate seed `seed`.
using SourceFactory = std::function<std::unique_ptr<InnovationSource>(std::uint64_t seed)>;
SourceFactory stream_factory(const InnovationSpec& spec);

struct ReplicateOptions {
  unsigned threads = 1;
  WorkBudget budget;
  std::size_t min_replicates = 100;
};

// Y_N at each point of cfg.grid for R paths with seeds derive_seed(base_seed, r).
struct PartialSumSample {
  std::vector<double> grid;
  std::size_t replicates = 0;
  std::vector<double> values;  // row-major, replicate r at [r * grid.size(), ...)
  std::vector<double> endpoints;  // Y_N(1)

  double at(std::size_t r, std::size_t g) const { return values[r * grid.size() + g]; }
  std::vector<double> column(std::size_t g) const;
};

PartialSumSample replicate_partial_sums(const CoefficientField& field, const PathConfig& cfg,
                                        const SourceFactory& sources, std::size_t R,
                                        std::uint64_t base_seed, const ReplicateOptions& opt = {});

std::vector<double> replicate_endpoint(const CoefficientField& field, const PathConfig& cfg,
                                       const InnovationSpec& spec, std::size_t R, std::uint64_t base_seed,
                                       const ReplicateOptions& opt = {});
std::vector<double> replicate_endpoint(const CoefficientField& field, const PathConfig& cfg,
                                       const SourceFactory& sources, std::size_t R, std::uint64_t base_seed,
                                       const ReplicateOptions& opt = {});

// Multiply-adds per replicate path for the method replicate_* would use.
double replicate_path_cost(const CoefficientField& field, std::int64_t N);

inline double ks_critical_one_sample_5pct(std::size_t R) { return 1.358 / std::sqrt(static_cast<double>(R)); }
inline double ks_critical_two_sample_1pct(std::size_t R) { return 1.628 * std::sqrt(2.0 / static_cast<double>(R)); }

struct NormalityReport {
  std::size_t R = 0;
  double target_sigma = 0.0;
  double ks = 0.0;
  double ks_critical = 0.0;
  double mean = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  double variance = 0.0;
  double variance_stderr = 0.0;
  bool pass = false;  // ks below the 5% critical value
};

double normal_cdf(double x);
// One-sample KS distance of the sample against N(0, sigma^2).
double ks_normal(std::vector<double> sample, double sigma);
// Two-sample KS distance.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

NormalityReport normality_report(const std::vector<double>& sample, double target_sigma);

struct PairwiseKs {
  std::string a, b;
  double ks = 0.0;
  double critical = 0.0;
  bool pass = false;
};

struct UniversalityReport {
  std::vector<std::pair<std::string, NormalityReport>> samples;
  std::vector<PairwiseKs> pairs;
  bool pass = false;
};

UniversalityReport universality_compare(const std::vector<std::pair<std::string, std::vector<double>>>& samples,
                                        double target_sigma);

struct FddPair {
  double s = 0.0, t = 0.0;
  double empirical = 0.0;
  double stderr_ = 0.0;
  double exact = 0.0;       // finite-N covariance from exact variances
  double asymptotic = 0.0;  // sigma^2 min(s, t)
  double z_exact = 0.0;
  double z_asymptotic = 0.0;
  // Cov(Y(t) - Y(s), Y(s)) against 0.
  double increment_cov = 0.0;
  double increment_stderr = 0.0;
  double z_increment = 0.0;
};

struct FddReport {
  std::size_t R = 0;
  double sigma2 = 0.0;
  std::vector<FddPair> pairs;
  bool pass = false;  // every |z_exact| <= 4
};

FddReport fdd_covariance_check(const CoefficientField& field, const PathConfig& cfg, const InnovationSpec& spec,
                               std::size_t R, std::uint64_t base_seed, const ReplicateOptions& opt = {});
// Builds the report from a sample already drawn.
FddReport fdd_covariance_report(const CoefficientField& field, std::int64_t N, const PartialSumSample& sample,
                                unsigned threads = 1);

struct MomentRatioRow {
  std::int64_t N = 0;
  double ratio = 0.0;  // (E|Y|^p)^{1/p} / (E Y^2)^{1/2}
};

struct MomentRatioTable {
  double p = 0.0;
  double cap = 0.0;        // allowed relative spread max/min - 1
  double spread = 0.0;
  std::vector<MomentRatioRow> rows;
  bool pass = false;
  io::CsvTable to_csv() const;
};

// (E|Z|^p)^{1/p} for Z ~ N(0, 1).
double normal_moment_ratio(double p);
double moment_ratio(const std::vector<double>& sample, double p);
MomentRatioTable moment_ratio_diagnostic(const std::vector<std::pair<std::int64_t, std::vector<double>>>& samples,
                                         double p, double cap = 0.2);

io::CsvTable endpoint_csv(const std::vector<double>& endpoints);

}  // namespace chaoslab
