#include "chaoslab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "chaoslab/errors.hpp"
#include "chaoslab/io.hpp"
#include "chaoslab/numerics.hpp"
#include "chaoslab/rng.hpp"

namespace chaoslab {

using numerics::CompensatedSum;

// ------------------------------------------------------------------ IndexTuple

IndexTuple::IndexTuple(std::initializer_list<std::int64_t> idx) {
  for (std::int64_t x : idx) push_back(x);
}

IndexTuple::IndexTuple(std::span<const std::int64_t> idx) {
  for (std::int64_t x : idx) push_back(x);
}

void IndexTuple::push_back(std::int64_t x) {
  if (n_ >= kMaxOrder) fail(ErrorKind::invalid_input, "tuple longer than the maximum order");
  set(n_++, x);
}

void IndexTuple::set(int i, std::int64_t x) {
  if (x < std::numeric_limits<std::int32_t>::min() || x > std::numeric_limits<std::int32_t>::max()) {
    fail(ErrorKind::invalid_input, "index " + std::to_string(x) + " outside the 32-bit range");
  }
  v_[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(x);
}

IndexTuple IndexTuple::sorted() const noexcept {
  IndexTuple t = *this;
  std::sort(t.v_.begin(), t.v_.begin() + t.n_);
  return t;
}

bool IndexTuple::has_repeat() const noexcept {
  for (int i = 0; i < n_; ++i)
    for (int j = i + 1; j < n_; ++j)
      if (v_[static_cast<std::size_t>(i)] == v_[static_cast<std::size_t>(j)]) return true;
  return false;
}

IndexTuple IndexTuple::concat(const IndexTuple& other) const {
  IndexTuple t = *this;
  for (int i = 0; i < other.size(); ++i) t.push_back(other[i]);
  return t;
}

IndexTuple IndexTuple::slice(int first, int count) const {
  IndexTuple t;
  for (int i = first; i < first + count; ++i) t.push_back((*this)[i]);
  return t;
}

bool operator==(const IndexTuple& a, const IndexTuple& b) noexcept {
  if (a.n_ != b.n_) return false;
  return std::equal(a.v_.begin(), a.v_.begin() + a.n_, b.v_.begin());
}

std::strong_ordering operator<=>(const IndexTuple& a, const IndexTuple& b) noexcept {
  const int n = std::min(a.n_, b.n_);
  for (int i = 0; i < n; ++i) {
    const auto c = a.v_[static_cast<std::size_t>(i)] <=> b.v_[static_cast<std::size_t>(i)];
    if (c != 0) return c;
  }
  return a.n_ <=> b.n_;
}

std::size_t IndexTupleHash::operator()(const IndexTuple& t) const noexcept {
  std::uint64_t h = static_cast<std::uint64_t>(t.size());
  for (int i = 0; i < t.size(); ++i) {
    h = rng::mix64(h + static_cast<std::uint64_t>(static_cast<std::uint32_t>(t[i])) +
                   0x9e3779b97f4a7c15ULL);
  }
  return static_cast<std::size_t>(h);
}

// ------------------------------------------------------------- SymmetricKernel

SymmetricKernel::SymmetricKernel(int order) : order_(order) {
  if (order < 1 || order > kMaxOrder) {
    fail(ErrorKind::invalid_input, "kernel order must be in [1, " + std::to_string(kMaxOrder) + "]");
  }
}

IndexTuple SymmetricKernel::canonical(std::span<const std::int64_t> idx) const {
  if (static_cast<int>(idx.size()) != order_) {
    fail(ErrorKind::invalid_input, "tuple of length " + std::to_string(idx.size()) +
                                       " for a kernel of order " + std::to_string(order_));
  }
  return IndexTuple(idx).sorted();
}

void SymmetricKernel::set(std::span<const std::int64_t> idx, double v) {
  const IndexTuple key = canonical(idx);
  if (key.has_repeat()) fail(ErrorKind::invalid_input, "kernel entries must be off-diagonal");
  if (v == 0.0) {
    entries_.erase(key);
  } else {
    entries_[key] = v;
  }
}

void SymmetricKernel::set(std::initializer_list<std::int64_t> idx, double v) {
  set(std::span<const std::int64_t>(idx.begin(), idx.size()), v);
}

void SymmetricKernel::add(const IndexTuple& idx, double v) {
  if (idx.size() != order_) fail(ErrorKind::invalid_input, "tuple length does not match order");
  const IndexTuple key = idx.sorted();
  if (key.has_repeat()) fail(ErrorKind::invalid_input, "kernel entries must be off-diagonal");
  auto it = entries_.find(key);
  if (it == entries_.end()) {
    if (v != 0.0) entries_.emplace(key, v);
    return;
  }
  it->second += v;
  if (it->second == 0.0) entries_.erase(it);
}

double SymmetricKernel::value(std::span<const std::int64_t> idx) const {
  const IndexTuple key = canonical(idx);
  return value(key);
}

double SymmetricKernel::value(std::initializer_list<std::int64_t> idx) const {
  return value(std::span<const std::int64_t>(idx.begin(), idx.size()));
}

double SymmetricKernel::value(const IndexTuple& idx) const {
  if (idx.size() != order_) fail(ErrorKind::invalid_input, "tuple length does not match order");
  const IndexTuple key = idx.sorted();
  if (key.has_repeat()) return 0.0;
  auto it = entries_.find(key);
  return it == entries_.end() ? 0.0 : it->second;
}

std::vector<std::pair<IndexTuple, double>> SymmetricKernel::sorted_entries() const {
  std::vector<std::pair<IndexTuple, double>> out(entries_.begin(), entries_.end());
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

double SymmetricKernel::ordered_squared_norm() const {
  double perms = 1.0;
  for (int i = 2; i <= order_; ++i) perms *= i;
  CompensatedSum s;
  for (const auto& [key, v] : sorted_entries()) s.add(v * v);
  return perms * s.value();
}

SymmetricKernel& SymmetricKernel::scale(double s) {
  if (s == 0.0) {
    entries_.clear();
    return *this;
  }
  for (auto& [key, v] : entries_) v *= s;
  return *this;
}

SymmetricKernel& SymmetricKernel::axpy(double s, const SymmetricKernel& other) {
  if (other.order_ != order_) fail(ErrorKind::invalid_input, "axpy on kernels of different order");
  for (const auto& [key, v] : other.sorted_entries()) add(key, s * v);
  return *this;
}

void SymmetricKernel::write(std::ostream& os) const {
  os << "k=" << order_ << '\n';
  for (const auto& [key, v] : sorted_entries()) {
    for (int i = 0; i < key.size(); ++i) os << key[i] << ' ';
    os << io::format_double(v) << '\n';
  }
}

SymmetricKernel SymmetricKernel::read(std::istream& is) {
  std::string line;
  int lineno = 0;
  int order = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line.rfind("k=", 0) != 0) {
      fail(ErrorKind::invalid_input, "line " + std::to_string(lineno) + ": expected header 'k=<int>'");
    }
    try {
      std::size_t used = 0;
      order = std::stoi(line.substr(2), &used);
      if (used + 2 != line.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      fail(ErrorKind::invalid_input, "line " + std::to_string(lineno) + ": bad order in header");
    }
    break;
  }
  if (order == 0) fail(ErrorKind::invalid_input, "kernel text has no header");
  SymmetricKernel f(order);
  std::vector<std::int64_t> idx(static_cast<std::size_t>(order));
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    for (auto& x : idx) {
      if (!(ls >> x)) fail(ErrorKind::invalid_input, "line " + std::to_string(lineno) + ": bad index");
    }
    std::string vs;
    if (!(ls >> vs)) fail(ErrorKind::invalid_input, "line " + std::to_string(lineno) + ": missing value");
    std::string extra;
    if (ls >> extra) fail(ErrorKind::invalid_input, "line " + std::to_string(lineno) + ": trailing field");
    double v = 0.0;
    try {
      std::size_t used = 0;
      v = std::stod(vs, &used);
      if (used != vs.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      fail(ErrorKind::invalid_input, "line " + std::to_string(lineno) + ": bad value '" + vs + "'");
    }
    f.set(idx, v);
  }
  return f;
}

// ------------------------------------------------------------- PowerKernelSpec

namespace {

void check_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty() || rows.front().empty()) fail(ErrorKind::invalid_input, "empty exponent matrix");
  const std::size_t k = rows.front().size();
  for (const auto& r : rows) {
    if (r.size() != k) fail(ErrorKind::invalid_input, "exponent rows have different lengths");
    for (double g : r) {
      if (std::isnan(g)) fail(ErrorKind::invalid_input, "NaN exponent");
      if (!std::isfinite(g)) fail(ErrorKind::invalid_input, "non-finite exponent");
    }
  }
  if (static_cast<int>(k) > kMaxOrder) fail(ErrorKind::invalid_input, "order above the maximum");
}

double max_abs(const std::vector<double>& w) {
  double m = 0.0;
  for (double x : w) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

PowerKernelSpec PowerKernelSpec::product(std::vector<double> gammas, double weight) {
  return combination({std::move(gammas)}, {weight});
}

PowerKernelSpec PowerKernelSpec::combination(std::vector<std::vector<double>> rows,
                                             std::vector<double> weights) {
  check_rows(rows);
  if (weights.size() != rows.size()) fail(ErrorKind::invalid_input, "one weight per exponent row required");
  PowerKernelSpec s;
  s.order = static_cast<int>(rows.front().size());
  s.alpha = std::accumulate(rows.front().begin(), rows.front().end(), 0.0);
  s.rows = std::move(rows);
  s.weights = std::move(weights);
  s.scale = max_abs(s.weights);
  return s;
}

double PowerKernelSpec::eval(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != order) fail(ErrorKind::invalid_input, "point dimension mismatch");
  for (double xi : x)
    if (xi < 0.0) return 0.0;
  double s = 0.0;
  for (std::size_t j = 0; j < rows.size(); ++j) {
    double p = weights[j];
    for (int l = 0; l < order; ++l) p *= std::pow(x[static_cast<std::size_t>(l)], rows[j][static_cast<std::size_t>(l)]);
    s += p;
  }
  return s;
}

double PowerKernelSpec::majorant(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != order) fail(ErrorKind::invalid_input, "point dimension mismatch");
  for (double xi : x)
    if (xi < 0.0) return 0.0;
  double s = 0.0;
  for (const auto& r : rows) {
    double p = 1.0;
    for (int l = 0; l < order; ++l) p *= std::pow(x[static_cast<std::size_t>(l)], r[static_cast<std::size_t>(l)]);
    s += p;
  }
  return scale * s;
}

PowerKernelSpec PowerKernelSpec::symmetrized() const {
  std::map<std::vector<double>, double> merged;
  std::vector<int> perm(static_cast<std::size_t>(order));
  double kfact = 1.0;
  for (int i = 2; i <= order; ++i) kfact *= i;
  for (std::size_t j = 0; j < rows.size(); ++j) {
    std::iota(perm.begin(), perm.end(), 0);
    do {
      std::vector<double> r(static_cast<std::size_t>(order));
      for (int l = 0; l < order; ++l) r[static_cast<std::size_t>(l)] = rows[j][static_cast<std::size_t>(perm[static_cast<std::size_t>(l)])];
      merged[r] += weights[j] / kfact;
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  PowerKernelSpec s;
  s.order = order;
  s.alpha = alpha;
  for (const auto& [r, w] : merged) {
    if (w == 0.0) continue;
    s.rows.push_back(r);
    s.weights.push_back(w);
  }
  if (s.rows.empty()) {
    // Identically zero kernel; keep one row so the shape stays well defined.
    s.rows.push_back(rows.front());
    s.weights.push_back(0.0);
  }
  const double wmax = max_abs(weights);
  s.scale = wmax > 0.0 ? scale * max_abs(s.weights) / wmax : scale;
  return s;
}

bool PowerKernelSpec::is_symmetric() const {
  const PowerKernelSpec sym = symmetrized();
  std::map<std::vector<double>, double> own;
  for (std::size_t j = 0; j < rows.size(); ++j) own[rows[j]] += weights[j];
  std::map<std::vector<double>, double> other;
  for (std::size_t j = 0; j < sym.rows.size(); ++j) other[sym.rows[j]] += sym.weights[j];
  if (own.size() != other.size()) return false;
  for (const auto& [r, w] : own) {
    auto it = other.find(r);
    if (it == other.end() || std::abs(it->second - w) > 1e-14 * std::max(1.0, std::abs(w))) return false;
  }
  return true;
}

// ---------------------------------------------------------- validation, regime

ExponentReport validate_exponents(const std::vector<std::vector<double>>& rows, double alpha) {
  check_rows(rows);
  if (std::isnan(alpha)) fail(ErrorKind::invalid_input, "NaN alpha");
  const int k = static_cast<int>(rows.front().size());
  ExponentReport rep;
  rep.valid = true;
  for (std::size_t j = 0; j < rows.size(); ++j) {
    const auto& r = rows[j];
    RowValidation v;
    v.exponents_in_range = std::all_of(r.begin(), r.end(), [](double g) { return g > -1.0 && g < -0.5; });
    const double sum = std::accumulate(r.begin(), r.end(), 0.0);
    v.sums_to_alpha = std::abs(sum - alpha) <= 1e-12;
    if (alpha >= -0.5 * (k + 1) - 1e-12) {
      v.partial_sums_checked = true;
      double ps = 0.0;
      for (int rr = 1; rr < k; ++rr) {
        ps += r[static_cast<std::size_t>(rr - 1)];
        v.partial_sums.push_back(ps);
        if (!(ps > -0.5 * rr - 0.5 && ps < -0.5 * rr)) v.partial_sums_ok = false;
      }
    }
    const std::string tag = "row " + std::to_string(j) + ": ";
    if (!v.exponents_in_range) rep.problems.push_back(tag + "exponent outside (-1, -1/2)");
    if (!v.sums_to_alpha) rep.problems.push_back(tag + "exponents do not sum to alpha");
    if (!v.partial_sums_ok) rep.problems.push_back(tag + "partial-sum bound violated");
    rep.valid = rep.valid && v.exponents_in_range && v.sums_to_alpha && v.partial_sums_ok;
    rep.rows.push_back(std::move(v));
  }
  return rep;
}

std::string_view MemoryRegime::name() const noexcept {
  switch (kind) {
    case Regime::short_memory: return "short";
    case Regime::boundary: return "boundary";
    case Regime::long_k1_boundary: return "long_k1_boundary";
    case Regime::long_memory: return "long";
  }
  return "unknown";
}

MemoryRegime classify_regime(int k, double alpha) {
  if (k < 1) fail(ErrorKind::invalid_input, "order k must be >= 1");
  if (std::isnan(alpha)) fail(ErrorKind::invalid_input, "NaN alpha");
  if (alpha >= -0.5 * k) {
    fail(ErrorKind::out_of_model, "alpha >= -k/2: kernel is not square-summable in this family");
  }
  const double edge = -0.5 * (k + 1);
  MemoryRegime r{Regime::long_memory, k, alpha};
  if (std::abs(alpha - edge) <= 1e-12) {
    // For k = 1 the edge is a(n) ~ c/n, the linear boundary case.
    r.kind = k >= 2 ? Regime::boundary : Regime::long_k1_boundary;
  } else if (alpha < edge) {
    r.kind = Regime::short_memory;
  }
  return r;
}

MemoryRegime regime_from_name(std::string_view name, int k, double alpha) {
  if (name == "short") return {Regime::short_memory, k, alpha};
  if (name == "boundary") return {Regime::boundary, k, alpha};
  if (name == "long_k1_boundary") return {Regime::long_k1_boundary, k, alpha};
  if (name == "long") return {Regime::long_memory, k, alpha};
  fail(ErrorKind::config, "unknown regime '" + std::string(name) + "'");
}

// ---------------------------------------------------------------- Perturbation

Perturbation Perturbation::unit() { return Perturbation(); }

Perturbation Perturbation::rational(double strength) {
  if (!std::isfinite(strength)) fail(ErrorKind::invalid_input, "perturbation strength must be finite");
  Perturbation p;
  if (strength == 0.0) return p;
  p.kind_ = Kind::rational;
  p.strength_ = strength;
  return p;
}

Perturbation Perturbation::custom(Rule rule, DecayCertificate cert, int order) {
  if (!rule) fail(ErrorKind::invalid_input, "custom perturbation needs a rule");
  if (cert.radius < 1 || !(cert.bound >= 0.0)) fail(ErrorKind::invalid_input, "bad decay certificate");
  if (order < 1 || order > kMaxOrder) fail(ErrorKind::invalid_input, "bad order for perturbation");
  // Geometric shells R 2^s; in each, one coordinate sits on the shell and the
  // rest are either 1 or on the shell.
  std::vector<std::int64_t> lags(static_cast<std::size_t>(order));
  double first_shell = 0.0;
  double last_shell = 0.0;
  constexpr int kShells = 12;
  for (int s = 0; s < kShells; ++s) {
    const std::int64_t r = cert.radius << s;
    double shell_sup = 0.0;
    for (int l = 0; l < order; ++l) {
      for (std::uint32_t mask = 0; mask < (1u << (order - 1)); ++mask) {
        int bit = 0;
        for (int q = 0; q < order; ++q) {
          if (q == l) {
            lags[static_cast<std::size_t>(q)] = r;
          } else {
            lags[static_cast<std::size_t>(q)] = ((mask >> bit) & 1u) ? r : 1 + q;
            ++bit;
          }
        }
        const double v = rule(lags);
        if (!std::isfinite(v)) fail(ErrorKind::invalid_input, "perturbation rule returned a non-finite value");
        shell_sup = std::max(shell_sup, std::abs(v - 1.0));
      }
    }
    if (shell_sup > cert.bound) {
      fail(ErrorKind::invalid_input, "perturbation violates its decay certificate at radius " + std::to_string(r));
    }
    if (s == 0) first_shell = shell_sup;
    last_shell = shell_sup;
  }
  if (last_shell > first_shell) fail(ErrorKind::invalid_input, "perturbation does not decay toward 1");
  Perturbation p;
  p.kind_ = Kind::custom;
  p.strength_ = cert.bound;
  p.rule_ = std::move(rule);
  return p;
}

std::string_view Perturbation::name() const noexcept {
  switch (kind_) {
    case Kind::unit: return "unit";
    case Kind::rational: return "rational";
    case Kind::custom: return "custom";
  }
  return "unknown";
}

double Perturbation::operator()(std::span<const std::int64_t> lags) const {
  switch (kind_) {
    case Kind::unit: return 1.0;
    case Kind::rational: {
      double s = 1.0;
      for (std::int64_t x : lags) s += static_cast<double>(x);
      return 1.0 + strength_ / s;
    }
    case Kind::custom: return rule_(lags);
  }
  return 1.0;
}

// ------------------------------------------------------------ CoefficientField

CoefficientField::CoefficientField(const PowerKernelSpec& kernel, std::int64_t lag_horizon,
                                   Perturbation perturbation)
    : kernel_(kernel.symmetrized()), horizon_(lag_horizon), perturbation_(std::move(perturbation)) {
  if (lag_horizon < 1) fail(ErrorKind::invalid_input, "lag horizon M must be >= 1");
}

CoefficientField CoefficientField::with_horizon(std::int64_t M) const {
  CoefficientField f = *this;
  if (M < 1) fail(ErrorKind::invalid_input, "lag horizon M must be >= 1");
  f.horizon_ = M;
  return f;
}

double eval_coefficient(const CoefficientField& field, std::span<const std::int64_t> lags) {
  const int k = field.order();
  if (static_cast<int>(lags.size()) != k) fail(ErrorKind::invalid_input, "lag tuple length does not match order");
  for (std::int64_t x : lags) {
    if (x <= 0) fail(ErrorKind::domain, "lags must be >= 1, got " + std::to_string(x));
  }
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j)
      if (lags[static_cast<std::size_t>(i)] == lags[static_cast<std::size_t>(j)]) return 0.0;
  std::array<double, kMaxOrder> x{};
  for (int i = 0; i < k; ++i) x[static_cast<std::size_t>(i)] = static_cast<double>(lags[static_cast<std::size_t>(i)]);
  const double g = field.kernel().eval(std::span<const double>(x.data(), static_cast<std::size_t>(k)));
  return g * field.perturbation()(lags);
}

double eval_coefficient(const CoefficientField& field, std::initializer_list<std::int64_t> lags) {
  return eval_coefficient(field, std::span<const std::int64_t>(lags.begin(), lags.size()));
}

// --------------------------------------------------------- partial_sum_kernel

namespace {

double binomial_count(std::int64_t n, int r) {
  if (r < 0 || n < r) return 0.0;
  double c = 1.0;
  for (int j = 0; j < r; ++j) c = c * static_cast<double>(n - j) / (j + 1);
  return c;
}

// Visits every strictly increasing 0 = d_0 < d_1 < ... < d_{k-1} <= top.
template <class F>
void for_each_shape(int k, std::int64_t top, F&& f) {
  std::vector<std::int64_t> d(static_cast<std::size_t>(k), 0);
  if (k == 1) {
    f(d);
    return;
  }
  for (int j = 1; j < k; ++j) d[static_cast<std::size_t>(j)] = j;
  if (d.back() > top) return;
  while (true) {
    f(d);
    int j = k - 1;
    while (j >= 1 && d[static_cast<std::size_t>(j)] == top - (k - 1 - j)) --j;
    if (j < 1) return;
    ++d[static_cast<std::size_t>(j)];
    for (int q = j + 1; q < k; ++q) d[static_cast<std::size_t>(q)] = d[static_cast<std::size_t>(q - 1)] + 1;
  }
}

}  // namespace

SymmetricKernel partial_sum_kernel(const CoefficientField& field, std::int64_t N,
                                   double normalization, const PartialSumOptions& opt) {
  if (N < 1) fail(ErrorKind::invalid_input, "N must be >= 1");
  if (!(normalization > 0.0)) fail(ErrorKind::domain, "normalization must be positive");
  const int k = field.order();
  const std::int64_t M = field.lag_horizon();
  const double estimate = binomial_count(M - 1, k - 1) * static_cast<double>(N + M);
  if (estimate > opt.max_entries) {
    throw ResourceError("partial_sum_kernel: support estimate " + io::format_double(estimate) +
                            " entries exceeds cap " + io::format_double(opt.max_entries),
                        estimate, opt.max_entries);
  }
  SymmetricKernel f(k);
  const double inv = 1.0 / normalization;
  std::vector<double> A, prefix, suffix;
  std::vector<std::int64_t> lags(static_cast<std::size_t>(k));
  std::vector<std::int64_t> idx(static_cast<std::size_t>(k));

  // Entries sharing a shape d (i_j = i_1 + d_j) are sums of A(t) = a(t, t-d_1, ...)
  // over a window of t, so one pass of prefix/suffix sums serves them all.
  for_each_shape(k, M - 1, [&](const std::vector<std::int64_t>& d) {
    const std::int64_t dk = d.back();
    const std::int64_t t0 = dk + 1;  // smallest admissible top lag
    const std::size_t len = static_cast<std::size_t>(M - dk);
    A.assign(len, 0.0);
    for (std::size_t s = 0; s < len; ++s) {
      const std::int64_t t = t0 + static_cast<std::int64_t>(s);
      for (int j = 0; j < k; ++j) lags[static_cast<std::size_t>(j)] = t - d[static_cast<std::size_t>(j)];
      A[s] = eval_coefficient(field, lags);
    }
    prefix.assign(len + 1, 0.0);
    suffix.assign(len + 1, 0.0);
    {
      CompensatedSum s;
      for (std::size_t q = 0; q < len; ++q) {
        s.add(A[q]);
        prefix[q + 1] = s.value();
      }
      CompensatedSum u;
      for (std::size_t q = len; q-- > 0;) {
        u.add(A[q]);
        suffix[q] = u.value();
      }
    }
    for (std::int64_t i1 = 1 - M; i1 + dk <= N - 1; ++i1) {
      const std::int64_t lo = std::max(t0, 1 - i1);
      const std::int64_t hi = std::min(M, N - i1);
      if (lo > hi) continue;
      const std::size_t a = static_cast<std::size_t>(lo - t0);
      const std::size_t b = static_cast<std::size_t>(hi - t0);  // inclusive
      double v;
      if (b - a < 32) {
        CompensatedSum s;
        for (std::size_t q = a; q <= b; ++q) s.add(A[q]);
        v = s.value();
      } else if (b + 1 == len) {
        v = suffix[a];
      } else if (a == 0) {
        v = prefix[b + 1];
      } else if (std::abs(prefix[a]) <= std::abs(suffix[b + 1])) {
        v = prefix[b + 1] - prefix[a];
      } else {
        v = suffix[a] - suffix[b + 1];
      }
      if (v == 0.0) continue;
      for (int j = 0; j < k; ++j) idx[static_cast<std::size_t>(j)] = i1 + d[static_cast<std::size_t>(j)];
      f.set(idx, v * inv);
    }
  });
  return f;
}

// ------------------------------------------------------------ tail_mass_bound

double tail_mass_bound(const PowerKernelSpec& kernel, std::int64_t M) {
  if (M < 1) fail(ErrorKind::invalid_input, "M must be >= 1");
  for (const auto& r : kernel.rows)
    for (double g : r)
      if (2.0 * g + 1.0 >= 0.0) {
        fail(ErrorKind::divergence, "exponent " + io::format_double(g) + " is not square-summable");
      }
  const double Md = static_cast<double>(M);
  auto tail = [Md](double g) { return std::pow(Md, 2.0 * g + 1.0) / (-2.0 * g - 1.0) + std::pow(Md, 2.0 * g); };
  auto full = [](double g) { return numerics::power_sum(2.0 * g, numerics::kUnbounded); };
  // (sum_j p_j)^2 <= m sum_j p_j^2, then a union bound over which coordinate exceeds M.
  CompensatedSum total;
  for (const auto& r : kernel.rows) {
    for (std::size_t l = 0; l < r.size(); ++l) {
      double term = tail(r[l]);
      for (std::size_t q = 0; q < r.size(); ++q)
        if (q != l) term *= full(r[q]);
      total.add(term);
    }
  }
  return kernel.scale * kernel.scale * static_cast<double>(kernel.rows.size()) * total.value();
}

double tail_mass_bound(const CoefficientField& field, std::int64_t M) {
  return tail_mass_bound(field.kernel(), M);
}

}  // namespace chaoslab
