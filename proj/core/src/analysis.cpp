#include "chaoslab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <string>

#include "chaoslab/errors.hpp"
#include "chaoslab/numerics.hpp"
#include "chaoslab/parallel.hpp"

namespace chaoslab {

using numerics::CompensatedSum;
using numerics::kUnbounded;

namespace {

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

// gamma(n) for a separable field as a polynomial in pair sums
// s(a, b, n, H) = sum_{i=1}^{H} i^a (i+n)^b: each row pair (r, r') expands over
// set partitions of the coordinates, one pair sum per block.
struct GammaPlan {
  std::vector<std::pair<double, double>> sums;
  struct Term {
    double coef;
    std::vector<int> factors;
  };
  std::vector<Term> terms;
};

GammaPlan make_plan(const PowerKernelSpec& g) {
  GammaPlan plan;
  const int k = g.order;
  std::map<std::pair<double, double>, int> ids;
  std::map<std::vector<int>, double> merged;
  const auto partitions = numerics::set_partitions(k);
  for (std::size_t r = 0; r < g.rows.size(); ++r) {
    for (std::size_t q = 0; q < g.rows.size(); ++q) {
      const double w = g.weights[r] * g.weights[q];
      if (w == 0.0) continue;
      for (const auto& rgs : partitions) {
        const int blocks = *std::max_element(rgs.begin(), rgs.end()) + 1;
        std::vector<double> a(static_cast<std::size_t>(blocks), 0.0), b(static_cast<std::size_t>(blocks), 0.0);
        for (int l = 0; l < k; ++l) {
          const auto blk = static_cast<std::size_t>(rgs[static_cast<std::size_t>(l)]);
          a[blk] += g.rows[r][static_cast<std::size_t>(l)];
          b[blk] += g.rows[q][static_cast<std::size_t>(l)];
        }
        std::vector<int> factors;
        for (int blk = 0; blk < blocks; ++blk) {
          const auto key = std::make_pair(a[static_cast<std::size_t>(blk)], b[static_cast<std::size_t>(blk)]);
          auto it = ids.find(key);
          if (it == ids.end()) {
            it = ids.emplace(key, static_cast<int>(plan.sums.size())).first;
            plan.sums.push_back(key);
          }
          factors.push_back(it->second);
        }
        std::sort(factors.begin(), factors.end());
        merged[factors] += w * numerics::partition_weight(rgs);
      }
    }
  }
  for (const auto& [factors, coef] : merged)
    if (coef != 0.0) plan.terms.push_back({coef, factors});
  return plan;
}

double eval_plan(const GammaPlan& plan, std::int64_t n, std::int64_t H) {
  std::vector<double> vals(plan.sums.size());
  for (std::size_t s = 0; s < plan.sums.size(); ++s) {
    const auto [a, b] = plan.sums[s];
    if (H == kUnbounded && a + b >= -1.0) {
      fail(ErrorKind::divergence, "covariance series diverges: block exponent sum " +
                                      io::format_double(a + b) + " >= -1");
    }
    vals[s] = numerics::power_pair_sum(a, b, n, H);
  }
  CompensatedSum total;
  for (const auto& t : plan.terms) {
    double p = t.coef;
    for (int f : t.factors) p *= vals[static_cast<std::size_t>(f)];
    total.add(p);
  }
  return total.value();
}

// Ordered distinct tuples in [1, H]^k, visited lexicographically.
template <class F>
void for_each_ordered_distinct(int k, std::int64_t H, F&& f) {
  std::vector<std::int64_t> t(static_cast<std::size_t>(k), 1);
  while (true) {
    bool distinct = true;
    for (int i = 0; i < k && distinct; ++i)
      for (int j = i + 1; j < k; ++j)
        if (t[static_cast<std::size_t>(i)] == t[static_cast<std::size_t>(j)]) {
          distinct = false;
          break;
        }
    if (distinct) f(t);
    int i = k - 1;
    while (i >= 0 && t[static_cast<std::size_t>(i)] == H) {
      t[static_cast<std::size_t>(i)] = 1;
      --i;
    }
    if (i < 0) break;
    ++t[static_cast<std::size_t>(i)];
  }
}

double gamma_enumerated(const CoefficientField& field, std::int64_t n, std::int64_t H,
                        const AnalysisOptions& opt) {
  const int k = field.order();
  if (H == kUnbounded) {
    fail(ErrorKind::unsupported, "covariance of a non-separable field needs a finite lag horizon");
  }
  const std::int64_t Hn = H - n;
  if (Hn < k) return 0.0;
  const double visits = std::pow(static_cast<double>(Hn), k);
  if (visits > opt.max_enumeration) {
    throw ResourceError("covariance_gamma: " + io::format_double(visits) +
                            " tuples to enumerate exceeds the cap",
                        visits, opt.max_enumeration);
  }
  CompensatedSum s;
  std::vector<std::int64_t> shifted(static_cast<std::size_t>(k));
  for_each_ordered_distinct(k, Hn, [&](const std::vector<std::int64_t>& t) {
    for (int l = 0; l < k; ++l) shifted[static_cast<std::size_t>(l)] = t[static_cast<std::size_t>(l)] + n;
    s.add(eval_coefficient(field, t) * eval_coefficient(field, shifted));
  });
  return s.value();
}

std::int64_t window_for(std::int64_t horizon, std::int64_t n) {
  return horizon == kUnbounded ? kUnbounded : horizon - n;
}

}  // namespace

void QuadratureSpec::validate() const {
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) fail(ErrorKind::invalid_input, "quadrature tolerance must lie in (0, 1)");
  if (max_subdivisions < 1) fail(ErrorKind::invalid_input, "quadrature needs at least one subdivision");
  if (near_power < 0.0 || tail_power < 0.0) fail(ErrorKind::invalid_input, "substitution powers must be >= 0");
}

double covariance_gamma(const CoefficientField& field, std::int64_t n, const AnalysisOptions& opt) {
  return covariance_gamma(field, n, field.lag_horizon(), opt);
}

double covariance_gamma(const CoefficientField& field, std::int64_t n, std::int64_t horizon,
                        const AnalysisOptions& opt) {
  if (horizon < 1) fail(ErrorKind::invalid_input, "covariance horizon must be >= 1");
  if (n < 0) n = -n;  // gamma(-n) = gamma(n)
  const std::int64_t H = window_for(horizon, n);
  if (H != kUnbounded && H < 1) return 0.0;
  if (!field.separable()) return gamma_enumerated(field, n, horizon, opt);
  return eval_plan(make_plan(field.kernel()), n, H);
}

std::vector<double> covariance_sequence(const CoefficientField& field, std::int64_t n_max,
                                        const AnalysisOptions& opt) {
  if (n_max < 0) fail(ErrorKind::invalid_input, "n_max must be >= 0");
  const auto count = static_cast<std::size_t>(n_max + 1);
  std::vector<double> out(count, 0.0);
  const std::int64_t horizon = field.lag_horizon();
  const bool sep = field.separable();
  const GammaPlan plan = sep ? make_plan(field.kernel()) : GammaPlan{};
  const unsigned workers = std::max(1u, opt.threads);
  const std::size_t chunks = std::min<std::size_t>(count, static_cast<std::size_t>(workers) * 8);
  parallel_for(chunks, workers, [&](std::size_t c) {
    const std::size_t lo = count * c / chunks;
    const std::size_t hi = count * (c + 1) / chunks;
    for (std::size_t i = lo; i < hi; ++i) {
      const auto n = static_cast<std::int64_t>(i);
      const std::int64_t H = window_for(horizon, n);
      if (H != kUnbounded && H < 1) continue;
      out[i] = sep ? eval_plan(plan, n, H) : gamma_enumerated(field, n, horizon, opt);
    }
  });
  return out;
}

std::vector<double> exact_variances(const CoefficientField& field, const std::vector<std::int64_t>& grid,
                                    const AnalysisOptions& opt) {
  if (grid.empty()) return {};
  std::int64_t n_max = 0;
  for (std::int64_t N : grid) {
    if (N < 1) fail(ErrorKind::invalid_input, "exact_variance needs N >= 1");
    n_max = std::max(n_max, N - 1);
  }
  const std::vector<double> g = covariance_sequence(field, n_max, opt);
  const double kf = factorial(field.order());
  std::vector<double> out;
  out.reserve(grid.size());
  for (std::int64_t N : grid) {
    CompensatedSum s;
    s.add(static_cast<double>(N) * g[0]);
    for (std::int64_t n = 1; n < N; ++n) s.add(2.0 * static_cast<double>(N - n) * g[static_cast<std::size_t>(n)]);
    out.push_back(kf * s.value());
  }
  return out;
}

double exact_variance(const CoefficientField& field, std::int64_t N, const AnalysisOptions& opt) {
  return exact_variances(field, {N}, opt).front();
}

// ------------------------------------------------------------------ C_g

double beta_power_integral(double a, double b) {
  if (!(a > -1.0) || !(a + b < -1.0)) {
    fail(ErrorKind::divergence, "int x^a (1+x)^b diverges for a=" + io::format_double(a) +
                                    ", b=" + io::format_double(b));
  }
  const double p = a + 1.0;
  const double q = -a - b - 1.0;
  return std::exp(std::lgamma(p) + std::lgamma(q) - std::lgamma(p + q));
}

double c_g_separable(const PowerKernelSpec& g) {
  CompensatedSum s;
  for (std::size_t r = 0; r < g.rows.size(); ++r)
    for (std::size_t q = 0; q < g.rows.size(); ++q) {
      double p = g.weights[r] * g.weights[q];
      for (int l = 0; l < g.order; ++l)
        p *= beta_power_integral(g.rows[r][static_cast<std::size_t>(l)], g.rows[q][static_cast<std::size_t>(l)]);
      s.add(p);
    }
  return s.value();
}

double c_g_magnitude(const PowerKernelSpec& g) {
  CompensatedSum s;
  for (std::size_t r = 0; r < g.rows.size(); ++r)
    for (std::size_t q = 0; q < g.rows.size(); ++q) {
      double p = std::abs(g.weights[r] * g.weights[q]);
      for (int l = 0; l < g.order; ++l)
        p *= beta_power_integral(g.rows[r][static_cast<std::size_t>(l)], g.rows[q][static_cast<std::size_t>(l)]);
      s.add(p);
    }
  return s.value();
}

double C_g_quadrature(const PowerKernelSpec& g, const QuadratureSpec& spec) {
  spec.validate();
  const int k = g.order;
  if (k < 1 || g.rows.empty()) fail(ErrorKind::invalid_input, "C_g needs a kernel with at least one row");
  const auto K = static_cast<std::size_t>(k);
  std::vector<double> near_p(K), tail_q(K);
  for (std::size_t l = 0; l < K; ++l) {
    double gmin = 0.0;
    double smax = -1e300;
    for (std::size_t r = 0; r < g.rows.size(); ++r) {
      gmin = std::min(gmin, g.rows[r][l]);
      for (std::size_t q = 0; q < g.rows.size(); ++q) smax = std::max(smax, g.rows[r][l] + g.rows[q][l]);
    }
    if (!(gmin > -1.0) || !(smax < -1.0)) {
      fail(ErrorKind::divergence, "C_g integral diverges in coordinate " + std::to_string(l + 1));
    }
    near_p[l] = spec.near_power > 0.0 ? spec.near_power : 1.0 / (1.0 + gmin);
    tail_q[l] = spec.tail_power > 0.0 ? spec.tail_power : 1.0 / (-smax - 1.0);
  }

  std::vector<double> x(K), x1(K);
  bool converged = true;
  double outer_error = 0.0;
  std::function<double(std::size_t)> level = [&](std::size_t d) -> double {
    if (d == K) {
      for (std::size_t l = 0; l < K; ++l) x1[l] = 1.0 + x[l];
      return g.eval(x) * g.eval(x1);
    }
    // Inner levels run tighter so their noise stays below the outer target.
    numerics::QuadOptions qo;
    qo.rel_tol = spec.rel_tol * std::pow(0.1, static_cast<double>(d));
    qo.max_subdivisions = spec.max_subdivisions;
    const double p = near_p[d];
    const double q = tail_q[d];
    auto near = [&, d, p](double u) {
      x[d] = std::pow(u, p);
      return level(d + 1) * p * std::pow(u, p - 1.0);
    };
    auto tail = [&, d, q](double v) {
      x[d] = std::pow(v, -q);
      return level(d + 1) * q * std::pow(v, -q - 1.0);
    };
    const numerics::QuadResult a = numerics::integrate(near, 0.0, 1.0, qo);
    const numerics::QuadResult b = numerics::integrate(tail, 0.0, 1.0, qo);
    if (!a.converged || !b.converged) converged = false;
    if (d == 0) outer_error = a.error + b.error;
    return a.value + b.value;
  };
  const double value = level(0);
  if (!converged || outer_error > spec.rel_tol * std::abs(value)) {
    throw AccuracyError("C_g quadrature did not reach relative tolerance " + io::format_double(spec.rel_tol),
                        value, outer_error);
  }
  return value;
}

// ------------------------------------------------------------ tables

VarianceTable variance_ratio_table(const CoefficientField& field, const std::vector<std::int64_t>& grid,
                                   const AnalysisOptions& opt) {
  if (grid.empty()) fail(ErrorKind::invalid_input, "variance table needs a non-empty grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 2) fail(ErrorKind::invalid_input, "variance table needs N >= 2");
    if (i > 0 && grid[i] <= grid[i - 1]) fail(ErrorKind::invalid_input, "variance grid must be increasing");
  }
  VarianceTable t;
  t.order = field.order();
  t.c_g = c_g_separable(field.kernel());
  t.degenerate = std::abs(t.c_g) <= 1e-9 * c_g_magnitude(field.kernel());
  const double kf = factorial(t.order);
  const std::vector<double> v = exact_variances(field, grid, opt);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto N = static_cast<double>(grid[i]);
    const double nl = N * std::log(N);
    VarianceRow row;
    row.N = grid[i];
    row.exact_variance = v[i];
    row.reference = t.degenerate ? nl : 2.0 * kf * t.c_g * nl;
    row.ratio = v[i] / row.reference;
    row.ratio_to_2cg = t.degenerate ? 0.0 : v[i] / (2.0 * t.c_g * nl);
    t.rows.push_back(row);
  }
  return t;
}

io::CsvTable VarianceTable::to_csv() const {
  if (degenerate) {
    io::CsvTable t({"N", "exact_variance", "NlnN", "ratio_to_NlnN"});
    for (const auto& r : rows) {
      t.add_row({std::to_string(r.N), io::format_double(r.exact_variance), io::format_double(r.reference),
                 io::format_double(r.ratio)});
    }
    return t;
  }
  io::CsvTable t({"N", "exact_variance", "sigma2_NlnN", "ratio_to_sigma2_NlnN", "ratio_to_2Cg_NlnN"});
  for (const auto& r : rows) {
    t.add_row({std::to_string(r.N), io::format_double(r.exact_variance), io::format_double(r.reference),
               io::format_double(r.ratio), io::format_double(r.ratio_to_2cg)});
  }
  return t;
}

double bound_diff_constant(double g1, double g2,
                           const std::vector<std::pair<std::int64_t, std::int64_t>>& grid) {
  for (double g : {g1, g2})
    if (!(g > -1.0 && g < -0.5)) fail(ErrorKind::domain, "bound_diff_constant needs exponents in (-1, -1/2)");
  if (grid.empty()) fail(ErrorKind::invalid_input, "bound_diff_constant needs a non-empty grid");
  double best = 0.0;
  for (const auto& [n1, n2] : grid) {
    // With j = min(n1, n2) - p >= 1 the sum is sum_j j^{g_lo} (j + d)^{g_hi}.
    const std::int64_t d = n1 > n2 ? n1 - n2 : n2 - n1;
    const double a = n1 <= n2 ? g1 : g2;
    const double b = n1 <= n2 ? g2 : g1;
    const double num = numerics::power_pair_sum(a, b, d, kUnbounded);
    const double den = d == 0 ? 1.0 : std::pow(static_cast<double>(d), g1 + g2 + 1.0);
    best = std::max(best, num / den);
  }
  return best;
}

LinearCaseTable linear_case_table(double c, const std::vector<std::int64_t>& grid, const AnalysisOptions& opt) {
  if (c == 0.0 || !std::isfinite(c)) fail(ErrorKind::invalid_input, "linear case needs a finite c != 0");
  if (grid.empty()) fail(ErrorKind::invalid_input, "linear case needs a non-empty grid");
  std::int64_t n_max = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 2) fail(ErrorKind::invalid_input, "linear case needs N >= 2");
    if (i > 0 && grid[i] <= grid[i - 1]) fail(ErrorKind::invalid_input, "linear case grid must be increasing");
    n_max = std::max(n_max, grid[i]);
  }
  const CoefficientField field(PowerKernelSpec::product({-1.0}, c), kUnbounded);
  const std::vector<double> g = covariance_sequence(field, n_max, opt);
  LinearCaseTable t;
  t.c = c;
  const double c2 = c * c;
  for (std::int64_t N : grid) {
    const auto Nd = static_cast<double>(N);
    const double ln = std::log(Nd);
    CompensatedSum s;
    s.add(Nd * g[0]);
    for (std::int64_t n = 1; n < N; ++n) s.add(2.0 * static_cast<double>(N - n) * g[static_cast<std::size_t>(n)]);
    LinearCaseRow row;
    row.N = N;
    row.gamma = g[static_cast<std::size_t>(N)];
    row.gamma_ratio = row.gamma * Nd / (c2 * ln);
    row.variance = s.value();
    row.variance_ratio = row.variance / (c2 * Nd * ln * ln);
    row.ratio_to_2c2 = row.variance / (2.0 * c2 * Nd * ln * ln);
    t.rows.push_back(row);
  }
  return t;
}

io::CsvTable LinearCaseTable::to_csv() const {
  io::CsvTable t({"N", "gamma", "gamma_N_over_c2_lnN", "variance", "ratio_to_c2_N_lnN2", "ratio_to_2c2_N_lnN2"});
  for (const auto& r : rows) {
    t.add_row({std::to_string(r.N), io::format_double(r.gamma), io::format_double(r.gamma_ratio),
               io::format_double(r.variance), io::format_double(r.variance_ratio),
               io::format_double(r.ratio_to_2c2)});
  }
  return t;
}

std::int64_t choose_lag_horizon(const PowerKernelSpec& kernel, double tol) {
  if (!(tol > 0.0 && tol < 1.0)) fail(ErrorKind::invalid_input, "tail tolerance must lie in (0, 1)");
  const CoefficientField full_field(kernel, kUnbounded);
  const double full = covariance_gamma(full_field, 0);
  if (!(full > 0.0)) fail(ErrorKind::degenerate_window, "kernel has no off-diagonal mass");
  auto ok = [&](std::int64_t M) { return tail_mass_bound(kernel, M) <= tol * full; };
  std::int64_t hi = 1;
  while (!ok(hi)) {
    if (hi > (std::int64_t{1} << 52)) fail(ErrorKind::divergence, "tail bound does not reach the tolerance");
    hi *= 2;
  }
  std::int64_t lo = hi / 2;  // !ok(lo) unless hi == 1
  if (hi == 1) return 1;
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

PowerKernelSpec cancelling_kernel(double a) {
  const double b = -1.5 - a;
  if (!(a > -1.0 && a < -0.5 && b > -1.0 && b < -0.5) || a == -0.75) {
    fail(ErrorKind::domain, "cancelling kernel needs a, -3/2-a in (-1, -1/2) and a != -3/4");
  }
  const PowerKernelSpec A = PowerKernelSpec::product({-0.75, -0.75});
  const PowerKernelSpec B = PowerKernelSpec::combination({{a, b}, {b, a}}, {0.5, 0.5});
  // For these rows the C_g form is rank one, C_g(A - wB) = (sqrt(P_AA) - w sqrt(P_BB))^2.
  const double w = std::sqrt(c_g_separable(A) / c_g_separable(B));
  return PowerKernelSpec::combination({{-0.75, -0.75}, {a, b}, {b, a}}, {1.0, -0.5 * w, -0.5 * w});
}

}  // namespace chaoslab
