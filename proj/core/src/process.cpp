#include "chaoslab/process.hpp"

#include <cmath>
#include <string>

#include "chaoslab/errors.hpp"
#include "chaoslab/numerics.hpp"

namespace chaoslab {

using numerics::CompensatedSum;

void PathConfig::validate(int k) const {
  if (N < 1) fail(ErrorKind::invalid_input, "path length N must be >= 1");
  if (grid.empty()) fail(ErrorKind::invalid_input, "time grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0 && grid[i] <= 1.0)) fail(ErrorKind::invalid_input, "time grid values must lie in (0, 1]");
    if (i > 0 && !(grid[i] > grid[i - 1])) fail(ErrorKind::invalid_input, "time grid must be strictly increasing");
  }
  if (M < k) {
    fail(ErrorKind::degenerate_window, "lag horizon M=" + std::to_string(M) + " < k=" + std::to_string(k) +
                                           ": the window holds no off-diagonal tuple");
  }
}

double normalization_factor(const MemoryRegime& regime, double N) {
  if (!(N >= 2.0)) fail(ErrorKind::domain, "normalization needs N >= 2");
  switch (regime.kind) {
    case Regime::short_memory: return std::sqrt(N);
    case Regime::boundary: return std::sqrt(N * std::log(N));
    case Regime::long_k1_boundary: return std::sqrt(N) * std::log(N);
    case Regime::long_memory: return std::pow(N, regime.hurst());
  }
  return 1.0;
}

MemoryRegime regime_of(const CoefficientField& field) {
  return classify_regime(field.order(), field.kernel().alpha);
}

std::vector<std::pair<double, double>> partial_sum_process(const ChaosPath& path,
                                                           const MemoryRegime& regime) {
  const auto N = static_cast<std::int64_t>(path.values.size());
  if (N == 0) fail(ErrorKind::invalid_input, "partial sums of an empty path");
  const double A = normalization_factor(regime, static_cast<double>(N));
  std::vector<std::pair<double, double>> out;
  CompensatedSum s;
  std::int64_t done = 0;
  for (double t : path.config.grid) {
    std::int64_t upto = static_cast<std::int64_t>(std::floor(t * static_cast<double>(N) + 1e-9));
    upto = std::min(upto, N);
    for (; done < upto; ++done) s.add(path.values[static_cast<std::size_t>(done)]);
    out.emplace_back(t, s.value() / A);
  }
  return out;
}

double brute_force_work(const CoefficientField& field, std::int64_t N) {
  const int k = field.order();
  double combos = 1.0;
  for (int j = 0; j < k; ++j) combos = combos * static_cast<double>(field.lag_horizon() - j) / (j + 1);
  return static_cast<double>(N) * std::max(combos, 0.0) * k;
}

ChaosPath simulate_path(const CoefficientField& field, const PathConfig& cfg,
                        const InnovationSpec& innovations, const WorkBudget& budget) {
  return simulate_path(field, cfg, InnovationStream(innovations, cfg.seed), budget);
}

ChaosPath simulate_path(const CoefficientField& field, const PathConfig& cfg,
                        const InnovationSource& innovations, const WorkBudget& budget) {
  const int k = field.order();
  cfg.validate(k);
  if (cfg.M != field.lag_horizon()) fail(ErrorKind::invalid_input, "path M differs from the field's lag horizon");
  const double work = brute_force_work(field, cfg.N);
  if (work > budget.max_operations) {
    throw ResourceError("simulate_path: work estimate " + std::to_string(work) +
                            " multiply-adds exceeds the budget",
                        work, budget.max_operations);
  }
  const std::int64_t M = cfg.M;
  const std::int64_t N = cfg.N;

  // Canonical lag tuples l_1 < ... < l_k with their coefficient times k!.
  std::vector<std::int64_t> lags_flat;
  std::vector<double> coef;
  double kfact = 1.0;
  for (int i = 2; i <= k; ++i) kfact *= i;
  std::vector<std::int64_t> l(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) l[static_cast<std::size_t>(j)] = j + 1;
  while (true) {
    const double a = eval_coefficient(field, l);
    if (a != 0.0) {
      lags_flat.insert(lags_flat.end(), l.begin(), l.end());
      coef.push_back(kfact * a);
    }
    int j = k - 1;
    while (j >= 0 && l[static_cast<std::size_t>(j)] == M - (k - 1 - j)) --j;
    if (j < 0) break;
    ++l[static_cast<std::size_t>(j)];
    for (int q = j + 1; q < k; ++q) l[static_cast<std::size_t>(q)] = l[static_cast<std::size_t>(q - 1)] + 1;
  }

  // e_{1-M} .. e_{N-1}; index j lives at slot j + M - 1.
  std::vector<double> eps(static_cast<std::size_t>(N + M - 1));
  innovations.fill(1 - M, eps);

  ChaosPath path;
  path.config = cfg;
  path.values.assign(static_cast<std::size_t>(N), 0.0);
  for (std::int64_t n = 1; n <= N; ++n) {
    CompensatedSum s;
    const std::int64_t base = n + M - 1;
    for (std::size_t c = 0; c < coef.size(); ++c) {
      double p = coef[c];
      for (int j = 0; j < k; ++j) p *= eps[static_cast<std::size_t>(base - lags_flat[c * static_cast<std::size_t>(k) + static_cast<std::size_t>(j)])];
      s.add(p);
    }
    path.values[static_cast<std::size_t>(n - 1)] = s.value();
  }
  return path;
}

ChaosPath fast_path_product_kernel(const CoefficientField& field, const PathConfig& cfg,
                                   const InnovationSpec& innovations, const WorkBudget& budget) {
  return fast_path_product_kernel(field, cfg, InnovationStream(innovations, cfg.seed), budget);
}

ChaosPath fast_path_product_kernel(const CoefficientField& field, const PathConfig& cfg,
                                   const InnovationSource& innovations, const WorkBudget& budget) {
  cfg.validate(field.order());
  if (cfg.M != field.lag_horizon()) fail(ErrorKind::invalid_input, "path M differs from the field's lag horizon");
  if (!field.separable()) {
    fail(ErrorKind::unsupported, "fast path needs L = 1 so each row factorizes over coordinates");
  }
  SeparablePathEngine engine(field, cfg.N);
  if (engine.work_estimate() > budget.max_operations) {
    throw ResourceError("fast path: work estimate " + std::to_string(engine.work_estimate()) +
                            " exceeds the budget",
                        engine.work_estimate(), budget.max_operations);
  }
  ChaosPath path;
  path.config = cfg;
  path.values.assign(static_cast<std::size_t>(cfg.N), 0.0);
  engine.run(innovations, path.values);
  return path;
}

io::CsvTable path_csv(const ChaosPath& path) {
  io::CsvTable t({"n", "X(n)"});
  for (std::size_t i = 0; i < path.values.size(); ++i) {
    t.add_row({std::to_string(i + 1), io::format_double(path.values[i])});
  }
  return t;
}

io::CsvTable partial_sum_csv(const std::vector<std::pair<double, double>>& Y) {
  io::CsvTable t({"t", "Y_N(t)"});
  for (const auto& [tt, y] : Y) t.add_row({io::format_double(tt), io::format_double(y)});
  return t;
}

}  // namespace chaoslab
