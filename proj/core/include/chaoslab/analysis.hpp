#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "chaoslab/io.hpp"
#include "chaoslab/kernels.hpp"

namespace chaoslab {

struct QuadratureSpec {
  double rel_tol = 1e-7;
  // x = u^p on [0, 1] and x = v^{-q} on [1, inf); 0 picks the exponent that
  // flattens the worst power at that end.
  double near_power = 0.0;
  double tail_power = 0.0;
  int max_subdivisions = 400;

  void validate() const;
};

struct AnalysisOptions {
  unsigned threads = 1;
  // Cap on ordered tuples visited when the field does not factorize (L != 1).
  double max_enumeration = 1e9;
};

// gamma(n) = sum over ordered distinct tuples i with i and i + n in [1, M]^k
// of a(i) a(i + n), M the field's lag horizon (kUnbounded: the full series).
// E X(m) X(m+n) = k! gamma(n).
double covariance_gamma(const CoefficientField& field, std::int64_t n, const AnalysisOptions& opt = {});
// Same sum with the window [1, horizon] in place of the field's.
double covariance_gamma(const CoefficientField& field, std::int64_t n, std::int64_t horizon,
                        const AnalysisOptions& opt = {});
// gamma(0) .. gamma(n_max).
std::vector<double> covariance_sequence(const CoefficientField& field, std::int64_t n_max,
                                        const AnalysisOptions& opt = {});

// E[S_N^2] = k! (N gamma(0) + 2 sum_{n=1}^{N-1} (N - n) gamma(n)).
double exact_variance(const CoefficientField& field, std::int64_t N, const AnalysisOptions& opt = {});
// Exact variances on an increasing grid from one covariance sequence.
std::vector<double> exact_variances(const CoefficientField& field, const std::vector<std::int64_t>& grid,
                                    const AnalysisOptions& opt = {});

// C_g = int_{R_+^k} g(x) g(1 + x) dx by nested adaptive quadrature.
double C_g_quadrature(const PowerKernelSpec& g, const QuadratureSpec& spec = {});
// The same constant from the row factorization into Beta integrals
// int_0^inf x^a (1+x)^b dx = B(a + 1, -a - b - 1).
double c_g_separable(const PowerKernelSpec& g);
// sum_{r,r'} |w_r w_r' P_{rr'}|: the scale against which C_g = 0 is judged.
double c_g_magnitude(const PowerKernelSpec& g);
double beta_power_integral(double a, double b);

struct VarianceRow {
  std::int64_t N = 0;
  double exact_variance = 0.0;
  double reference = 0.0;        // 2 k! C_g N ln N, or N ln N when degenerate
  double ratio = 0.0;            // exact / reference
  double ratio_to_2cg = 0.0;     // exact / (2 C_g N ln N)
};

struct VarianceTable {
  int order = 0;
  double c_g = 0.0;
  bool degenerate = false;  // C_g = 0: the table tracks E[S_N^2] / (N ln N)
  std::vector<VarianceRow> rows;

  io::CsvTable to_csv() const;
};

VarianceTable variance_ratio_table(const CoefficientField& field, const std::vector<std::int64_t>& grid,
                                   const AnalysisOptions& opt = {});

// max over the grid of sum_p (n1-p)_+^{g1} (n2-p)_+^{g2} / (n1,n2)_0^{g1+g2+1}.
double bound_diff_constant(double g1, double g2,
                           const std::vector<std::pair<std::int64_t, std::int64_t>>& grid);

struct LinearCaseRow {
  std::int64_t N = 0;
  double gamma = 0.0;            // c^2 sum_i i^{-1} (i+N)^{-1}
  double gamma_ratio = 0.0;      // gamma N / (c^2 ln N)
  double variance = 0.0;         // E[S_N^2]
  double variance_ratio = 0.0;   // variance / (c^2 N (ln N)^2)
  double ratio_to_2c2 = 0.0;     // variance / (2 c^2 N (ln N)^2)
};

struct LinearCaseTable {
  double c = 1.0;
  std::vector<LinearCaseRow> rows;
  io::CsvTable to_csv() const;
};

// a(n) = c n^{-1}, n >= 1, with the infinite past.
LinearCaseTable linear_case_table(double c, const std::vector<std::int64_t>& grid,
                                  const AnalysisOptions& opt = {});

// Smallest M whose g*-tail bound is at most tol times the full off-diagonal mass.
std::int64_t choose_lag_horizon(const PowerKernelSpec& kernel, double tol);

// k = 2, alpha = -3/2: x1^{-3/4} x2^{-3/4} - w sym(x1^a x2^{-3/2-a}) with w
// chosen so that C_g = 0. Mixed sign, so outside the positive class.
PowerKernelSpec cancelling_kernel(double a = -0.6);

}  // namespace chaoslab
