#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "chaoslab/innovations.hpp"
#include "chaoslab/io.hpp"
#include "chaoslab/kernels.hpp"

namespace chaoslab {

struct WorkBudget {
  double max_operations = 1e10;  // multiply-adds per path
};

struct PathConfig {
  std::int64_t N = 1;
  std::int64_t M = 1;
  std::vector<double> grid{1.0};
  std::uint64_t seed = 0;

  // Throws invalid-input on a bad grid, degenerate-window when M < k.
  void validate(int k) const;
};

struct ChaosPath {
  std::vector<double> values;  // X(1) .. X(N)
  PathConfig config;
};

// A(N): sqrt(N), sqrt(N ln N), sqrt(N) ln N or N^H by regime.
double normalization_factor(const MemoryRegime& regime, double N);

// Regime used for a field's normalization: k = 1 at alpha = -1 is the linear case.
MemoryRegime regime_of(const CoefficientField& field);

// Y_N(t) = A(N)^{-1} sum_{n <= floor(N t)} X(n) for every grid point.
std::vector<std::pair<double, double>> partial_sum_process(const ChaosPath& path,
                                                           const MemoryRegime& regime);

// Brute force over ordered distinct lag tuples in [1, M]^k.
ChaosPath simulate_path(const CoefficientField& field, const PathConfig& cfg,
                        const InnovationSpec& innovations, const WorkBudget& budget = {});
ChaosPath simulate_path(const CoefficientField& field, const PathConfig& cfg,
                        const InnovationSource& innovations, const WorkBudget& budget = {});
double brute_force_work(const CoefficientField& field, std::int64_t N);

struct EngineOptions {
  // Far-field expansion truncation, relative to the leading term.
  double series_tolerance = 1e-17;
  // Use the far-field expansion only when M exceeds this multiple of N.
  std::int64_t near_multiple = 4;
  // N * M at or below this uses the direct sum instead of transforms.
  double direct_limit = 2.0e5;
};

// Path simulation for separable fields (L = 1): each row is a product of
// powers, so X(n) is a polynomial in the moving averages
// W_{a,p}(n) = sum_{i=1}^{M} i^a e_{n-i}^p with diagonals removed by
// inclusion-exclusion over set partitions of the coordinates.
class SeparablePathEngine {
 public:
  SeparablePathEngine(const CoefficientField& field, std::int64_t N, const EngineOptions& opt = {});
  ~SeparablePathEngine();
  SeparablePathEngine(const SeparablePathEngine&) = delete;
  SeparablePathEngine& operator=(const SeparablePathEngine&) = delete;

  // Thread-safe; each call uses its own scratch memory.
  void run(const InnovationSource& innovations, std::span<double> X) const;

  std::int64_t N() const noexcept;
  std::int64_t M() const noexcept;
  double work_estimate() const noexcept;
  std::size_t series_count() const noexcept;
  bool uses_far_field() const noexcept;

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
};

ChaosPath fast_path_product_kernel(const CoefficientField& field, const PathConfig& cfg,
                                   const InnovationSpec& innovations, const WorkBudget& budget = {});
ChaosPath fast_path_product_kernel(const CoefficientField& field, const PathConfig& cfg,
                                   const InnovationSource& innovations,
                                   const WorkBudget& budget = {});

io::CsvTable path_csv(const ChaosPath& path);
io::CsvTable partial_sum_csv(const std::vector<std::pair<double, double>>& Y);

}  // namespace chaoslab
