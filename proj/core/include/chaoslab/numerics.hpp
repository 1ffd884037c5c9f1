#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace chaoslab::numerics {

// Neumaier's variant of Kahan summation. Order dependent, so callers that
// need reproducibility must feed terms in a fixed order.
class CompensatedSum {
 public:
  CompensatedSum() = default;
  explicit CompensatedSum(double init) : sum_(init) {}

  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) noexcept {
    add(x);
    return *this;
  }
  void merge(const CompensatedSum& other) noexcept {
    add(other.sum_);
    add(other.comp_);
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double compensated_total(std::span<const double> xs) noexcept;

// Set partitions of {0..k-1} as restricted growth strings: entry l is the
// block of element l, blocks numbered in order of first appearance.
std::vector<std::vector<int>> set_partitions(int k);

// Moebius weight prod_B (-1)^{|B|-1} (|B|-1)! of a partition of distinct
// indices; sum_pi mu(pi) prod_B (sum over equal indices) = sum over distinct.
double partition_weight(const std::vector<int>& rgs);

// Generalized binomial coefficient binom(b, m) for real b.
double binomial(double b, int m) noexcept;

// ---------------------------------------------------------------- quadrature

struct QuadOptions {
  double rel_tol = 1e-10;
  double abs_tol = 0.0;
  int max_subdivisions = 500;
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
  int subdivisions = 0;
  bool converged = false;
};

namespace detail {
// 15-point Kronrod abscissae and weights, 7-point Gauss weights (QUADPACK qk15).
inline constexpr std::array<double, 8> xgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> wgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> wg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
}  // namespace detail

// One 15-point Gauss-Kronrod panel. The error estimate is |K15 - G7|.
template <class F>
QuadResult gauss_kronrod15(F&& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double resk = fc * detail::wgk[7];
  double resg = fc * detail::wg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * detail::xgk[j];
    const double f1 = f(center - dx);
    const double f2 = f(center + dx);
    resk += detail::wgk[j] * (f1 + f2);
    if (j % 2 == 1) resg += detail::wg[j / 2] * (f1 + f2);
  }
  QuadResult r;
  r.value = resk * half;
  r.error = std::abs((resk - resg) * half);
  r.evaluations = 15;
  r.subdivisions = 1;
  r.converged = true;
  return r;
}

// Globally adaptive bisection on [a, b] (finite). Reports converged=false
// instead of throwing so callers decide how to surface the shortfall.
template <class F>
QuadResult integrate(F&& f, double a, double b, const QuadOptions& opt = {}) {
  struct Panel {
    double a, b, value, error;
  };
  auto by_error = [](const Panel& x, const Panel& y) { return x.error < y.error; };
  std::vector<Panel> heap;
  QuadResult first = gauss_kronrod15(f, a, b);
  heap.push_back({a, b, first.value, first.error});
  double total = first.value;
  double err = first.error;
  int evals = first.evaluations;
  auto done = [&] {
    return err <= std::max(opt.abs_tol, opt.rel_tol * std::abs(total));
  };
  while (!done() && static_cast<int>(heap.size()) < opt.max_subdivisions) {
    std::pop_heap(heap.begin(), heap.end(), by_error);
    const Panel p = heap.back();
    const double mid = 0.5 * (p.a + p.b);
    if (!(mid > p.a && mid < p.b)) {
      std::push_heap(heap.begin(), heap.end(), by_error);
      break;  // no more resolution available in double
    }
    heap.pop_back();
    const QuadResult l = gauss_kronrod15(f, p.a, mid);
    const QuadResult r = gauss_kronrod15(f, mid, p.b);
    evals += 30;
    heap.push_back({p.a, mid, l.value, l.error});
    std::push_heap(heap.begin(), heap.end(), by_error);
    heap.push_back({mid, p.b, r.value, r.error});
    std::push_heap(heap.begin(), heap.end(), by_error);
    // Re-add from scratch to keep the running totals free of drift.
    CompensatedSum tv, te;
    for (const Panel& q : heap) {
      tv.add(q.value);
      te.add(q.error);
    }
    total = tv.value();
    err = te.value();
  }
  const int panels = static_cast<int>(heap.size());
  QuadResult out;
  out.value = total;
  out.error = err;
  out.evaluations = evals;
  out.subdivisions = panels;
  out.converged = done();
  return out;
}

// -------------------------------------------------------------- power sums

inline constexpr std::int64_t kUnbounded = std::numeric_limits<std::int64_t>::max();

// Sum_{i=1}^{H} i^a (i+n)^b for integer n >= 0. H may be kUnbounded when
// a + b < -1. Large ranges use Euler-Maclaurin on the tail with the tail
// integral evaluated by a convergent series or panel quadrature.
double power_pair_sum(double a, double b, std::int64_t n, std::int64_t H);

// Sum_{i=1}^{H} i^a.
inline double power_sum(double a, std::int64_t H) { return power_pair_sum(a, 0.0, 0, H); }

// Integral over [x0, inf) of x^a (x+n)^b, a + b < -1, x0 > 0.
double power_pair_tail_integral(double a, double b, double n, double x0);

}  // namespace chaoslab::numerics
