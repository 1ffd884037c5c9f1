#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace chaoslab {

inline constexpr int kMaxOrder = 8;

// Small fixed-capacity integer tuple used as a kernel key.
class IndexTuple {
 public:
  IndexTuple() = default;
  IndexTuple(std::initializer_list<std::int64_t> idx);
  explicit IndexTuple(std::span<const std::int64_t> idx);

  int size() const noexcept { return n_; }
  std::int64_t operator[](int i) const noexcept { return v_[static_cast<std::size_t>(i)]; }
  void push_back(std::int64_t x);
  void set(int i, std::int64_t x);

  IndexTuple sorted() const noexcept;
  bool has_repeat() const noexcept;
  // Concatenation, used for tensor-like contraction outputs.
  IndexTuple concat(const IndexTuple& other) const;
  IndexTuple slice(int first, int count) const;

  friend bool operator==(const IndexTuple& a, const IndexTuple& b) noexcept;
  friend std::strong_ordering operator<=>(const IndexTuple& a, const IndexTuple& b) noexcept;

 private:
  std::array<std::int32_t, kMaxOrder> v_{};
  std::uint8_t n_ = 0;
};

struct IndexTupleHash {
  std::size_t operator()(const IndexTuple& t) const noexcept;
};

// Symmetric function on Z^k vanishing on diagonals. Only canonical (strictly
// increasing) tuples are stored; every permutation reads the same value.
class SymmetricKernel {
 public:
  using Map = std::unordered_map<IndexTuple, double, IndexTupleHash>;

  explicit SymmetricKernel(int order);

  int order() const noexcept { return order_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  // Stores v at the canonical form of idx. A zero value erases the entry.
  void set(std::span<const std::int64_t> idx, double v);
  void set(std::initializer_list<std::int64_t> idx, double v);
  void add(const IndexTuple& idx, double v);

  // Any permutation of a stored tuple; 0 on diagonals and outside the support.
  double value(std::span<const std::int64_t> idx) const;
  double value(std::initializer_list<std::int64_t> idx) const;
  double value(const IndexTuple& idx) const;

  const Map& entries() const noexcept { return entries_; }
  // Canonical entries in lexicographic order; the basis of every deterministic loop.
  std::vector<std::pair<IndexTuple, double>> sorted_entries() const;

  // Sum over all ordered tuples of f^2 = k! * sum of stored squares.
  double ordered_squared_norm() const;

  SymmetricKernel& scale(double s);
  SymmetricKernel& axpy(double s, const SymmetricKernel& other);

  void write(std::ostream& os) const;
  static SymmetricKernel read(std::istream& is);

 private:
  IndexTuple canonical(std::span<const std::int64_t> idx) const;

  int order_;
  Map entries_;
};

// g(x) = sum_j w_j prod_l x_l^{gamma_jl}, homogeneous of degree alpha.
struct PowerKernelSpec {
  int order = 0;
  double alpha = 0.0;
  std::vector<std::vector<double>> rows;
  std::vector<double> weights;
  double scale = 1.0;  // c in the majorant c * sum_j prod_l x_l^{gamma_jl}

  static PowerKernelSpec product(std::vector<double> gammas, double weight = 1.0);
  static PowerKernelSpec combination(std::vector<std::vector<double>> rows,
                                     std::vector<double> weights);

  int row_count() const noexcept { return static_cast<int>(rows.size()); }
  // 0 when any coordinate is negative.
  double eval(std::span<const double> x) const;
  double majorant(std::span<const double> x) const;
  // Rows expanded over coordinate permutations with weights / k!, merged.
  PowerKernelSpec symmetrized() const;
  bool is_symmetric() const;
};

struct RowValidation {
  bool exponents_in_range = false;
  bool sums_to_alpha = false;
  bool partial_sums_checked = false;
  bool partial_sums_ok = true;
  std::vector<double> partial_sums;
};

struct ExponentReport {
  std::vector<RowValidation> rows;
  bool valid = false;
  std::vector<std::string> problems;
};

ExponentReport validate_exponents(const std::vector<std::vector<double>>& rows, double alpha);

enum class Regime { short_memory, boundary, long_k1_boundary, long_memory };

struct MemoryRegime {
  Regime kind = Regime::boundary;
  int k = 0;
  double alpha = 0.0;

  std::string_view name() const noexcept;
  double hurst() const noexcept { return alpha + 0.5 * k + 1.0; }
};

MemoryRegime classify_regime(int k, double alpha);
MemoryRegime regime_from_name(std::string_view name, int k, double alpha);

// Sup of |L - 1| over the test grid at lag radius >= radius is at most bound.
struct DecayCertificate {
  std::int64_t radius = 1;
  double bound = 0.0;
};

// Slowly varying perturbation L with L(i) -> 1 as |i| -> infinity.
class Perturbation {
 public:
  using Rule = std::function<double(std::span<const std::int64_t>)>;

  Perturbation() = default;
  static Perturbation unit();
  // L(i) = 1 + s / (1 + i_1 + ... + i_k).
  static Perturbation rational(double strength);
  // User rule; the certificate is checked on a geometric grid of order k.
  static Perturbation custom(Rule rule, DecayCertificate certificate, int order);

  bool is_unit() const noexcept { return kind_ == Kind::unit; }
  std::string_view name() const noexcept;
  double strength() const noexcept { return strength_; }
  double operator()(std::span<const std::int64_t> lags) const;

 private:
  enum class Kind { unit, rational, custom };
  Kind kind_ = Kind::unit;
  double strength_ = 0.0;
  Rule rule_;
};

// a(i) = g(i) L(i) 1{i off-diagonal}, truncated to lags in [1, M].
class CoefficientField {
 public:
  CoefficientField(const PowerKernelSpec& kernel, std::int64_t lag_horizon,
                   Perturbation perturbation = Perturbation::unit());

  const PowerKernelSpec& kernel() const noexcept { return kernel_; }
  int order() const noexcept { return kernel_.order; }
  std::int64_t lag_horizon() const noexcept { return horizon_; }
  const Perturbation& perturbation() const noexcept { return perturbation_; }
  bool separable() const noexcept { return perturbation_.is_unit(); }
  CoefficientField with_horizon(std::int64_t M) const;

 private:
  PowerKernelSpec kernel_;
  std::int64_t horizon_;
  Perturbation perturbation_;
};

double eval_coefficient(const CoefficientField& field, std::span<const std::int64_t> lags);
double eval_coefficient(const CoefficientField& field, std::initializer_list<std::int64_t> lags);

struct PartialSumOptions {
  double max_entries = 5e7;  // cap on the canonical support estimate
};

// f_N(i) = (1/normalization) sum_{n=1}^{N} a(n - i) 1{n - M <= i_j < n}.
SymmetricKernel partial_sum_kernel(const CoefficientField& field, std::int64_t N,
                                   double normalization, const PartialSumOptions& opt = {});

// Upper bound on the g*-squared mass of tuples with max coordinate > M.
double tail_mass_bound(const CoefficientField& field, std::int64_t M);
double tail_mass_bound(const PowerKernelSpec& kernel, std::int64_t M);

}  // namespace chaoslab
