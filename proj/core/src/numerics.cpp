#include "chaoslab/numerics.hpp"

#include <string>

#include "chaoslab/errors.hpp"

namespace chaoslab::numerics {

double compensated_total(std::span<const double> xs) noexcept {
  CompensatedSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

double binomial(double b, int m) noexcept {
  double c = 1.0;
  for (int j = 0; j < m; ++j) c *= (b - j) / (j + 1);
  return c;
}

namespace {

// First index handled by Euler-Maclaurin; terms below it are summed directly.
constexpr std::int64_t kEmStart = 32;

double pair_term(double a, double b, double n, double x) {
  if (b == 0.0) return std::pow(x, a);
  return std::pow(x, a) * std::pow(x + n, b);
}

// Falling factorial (a)_q = a (a-1) ... (a-q+1).
double falling(double a, int q) {
  double r = 1.0;
  for (int j = 0; j < q; ++j) r *= a - j;
  return r;
}

// m-th derivative of x^a (x+n)^b by Leibniz.
double pair_derivative(double a, double b, double n, double x, int m) {
  if (n == 0.0 || b == 0.0) {
    const double e = a + b;
    return falling(e, m) * std::pow(x, e - m);
  }
  double binom = 1.0;
  CompensatedSum s;
  for (int q = 0; q <= m; ++q) {
    if (q > 0) binom = binom * (m - q + 1) / q;
    s.add(binom * falling(a, q) * std::pow(x, a - q) * falling(b, m - q) *
          std::pow(x + n, b - (m - q)));
  }
  return s.value();
}

// Integral_0^1 u^{q-1} (1+cu)^b du for 0 <= c <= 1/2.
double beta_like_series(double b, double q, double c) {
  CompensatedSum s;
  double binom = 1.0;
  double cm = 1.0;
  for (int m = 0; m < 200; ++m) {
    const double t = binom * cm / (q + m);
    s.add(t);
    if (std::abs(t) < 1e-19 * std::abs(s.value())) break;
    binom *= (b - m) / (m + 1);
    cm *= c;
  }
  return s.value();
}

// Sum_{i >= x0} x^a (x+n)^b by Euler-Maclaurin with five Bernoulli corrections.
double em_tail(double a, double b, double n, double x0) {
  const double integral = power_pair_tail_integral(a, b, n, x0);
  const double f0 = pair_term(a, b, n, x0);
  const double d1 = pair_derivative(a, b, n, x0, 1);
  const double d3 = pair_derivative(a, b, n, x0, 3);
  const double d5 = pair_derivative(a, b, n, x0, 5);
  const double d7 = pair_derivative(a, b, n, x0, 7);
  const double d9 = pair_derivative(a, b, n, x0, 9);
  CompensatedSum s;
  s.add(integral);
  s.add(0.5 * f0);
  s.add(-d1 / 12.0);
  s.add(d3 / 720.0);
  s.add(-d5 / 30240.0);
  s.add(d7 / 1209600.0);
  s.add(-d9 / 47900160.0);
  return s.value();
}

}  // namespace

double power_pair_tail_integral(double a, double b, double n, double x0) {
  const double q = -(a + b + 1.0);
  if (!(q > 0.0)) {
    fail(ErrorKind::divergence, "tail integral diverges: a + b = " + std::to_string(a + b));
  }
  if (n == 0.0 || b == 0.0) return std::pow(x0, a + b + 1.0) / q;
  const double c = n / x0;
  if (c <= 0.5) return std::pow(x0, a + b + 1.0) * beta_like_series(b, q, c);
  // Dyadic panels up to X = 2n keep the singularities at 0 and -n far from
  // each panel relative to its width; the rest is the convergent series.
  const double X = 2.0 * n;
  auto f = [a, b, n](double x) { return std::pow(x, a) * std::pow(x + n, b); };
  CompensatedSum s;
  double y = x0;
  while (y < X) {
    const double y2 = std::min(2.0 * y, X);
    s.add(gauss_kronrod15(f, y, y2).value);
    y = y2;
  }
  s.add(std::pow(X, a + b + 1.0) * beta_like_series(b, q, 0.5));
  return s.value();
}

double power_pair_sum(double a, double b, std::int64_t n, std::int64_t H) {
  if (n < 0) fail(ErrorKind::domain, "power_pair_sum: n must be nonnegative");
  if (H < 1) return 0.0;
  const double nd = static_cast<double>(n);
  if (H != kUnbounded && H <= 4 * kEmStart) {
    CompensatedSum s;
    for (std::int64_t i = 1; i <= H; ++i) s.add(pair_term(a, b, nd, static_cast<double>(i)));
    return s.value();
  }
  if (!(a + b < -1.0)) {
    if (H == kUnbounded) {
      fail(ErrorKind::divergence, "power sum diverges: a + b = " + std::to_string(a + b));
    }
    CompensatedSum s;
    for (std::int64_t i = 1; i <= H; ++i) s.add(pair_term(a, b, nd, static_cast<double>(i)));
    return s.value();
  }
  CompensatedSum s;
  for (std::int64_t i = 1; i < kEmStart; ++i) s.add(pair_term(a, b, nd, static_cast<double>(i)));
  s.add(em_tail(a, b, nd, static_cast<double>(kEmStart)));
  if (H != kUnbounded) s.add(-em_tail(a, b, nd, static_cast<double>(H) + 1.0));
  return s.value();
}

std::vector<std::vector<int>> set_partitions(int k) {
  std::vector<std::vector<int>> out;
  if (k <= 0) return out;
  const auto K = static_cast<std::size_t>(k);
  std::vector<int> a(K, 0);
  std::vector<int> mx(K, 0);  // mx[i] = max(a[0..i])
  while (true) {
    out.push_back(a);
    std::size_t i = K - 1;
    while (i > 0 && a[i] == mx[i - 1] + 1) --i;
    if (i == 0) break;
    ++a[i];
    mx[i] = std::max(mx[i - 1], a[i]);
    for (std::size_t j = i + 1; j < K; ++j) {
      a[j] = 0;
      mx[j] = mx[i];
    }
  }
  return out;
}

double partition_weight(const std::vector<int>& rgs) {
  if (rgs.empty()) return 1.0;
  const int blocks = *std::max_element(rgs.begin(), rgs.end()) + 1;
  std::vector<int> size(static_cast<std::size_t>(blocks), 0);
  for (int b : rgs) ++size[static_cast<std::size_t>(b)];
  double mu = 1.0;
  for (int sz : size)
    for (int q = 1; q < sz; ++q) mu *= -q;
  return mu;
}

}  // namespace chaoslab::numerics
