#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace chaoslab {

enum class Family { gaussian, rademacher, standardized_uniform, centered_exponential };

// A standardized innovation law: mean 0, variance 1, finite E|e|^3.
struct InnovationSpec {
  Family family = Family::gaussian;

  static InnovationSpec from_name(std::string_view name);  // config error if unknown
  static std::vector<InnovationSpec> all();

  std::string_view name() const noexcept;
  double mean() const noexcept { return 0.0; }
  double variance() const noexcept { return 1.0; }
  double third_abs_moment() const noexcept;
  double excess_kurtosis() const noexcept;
};

// Random-access source of e_j, j in Z. Paths only ever ask for contiguous blocks.
class InnovationSource {
 public:
  virtual ~InnovationSource() = default;
  virtual void fill(std::int64_t first, std::span<double> out) const = 0;
};

// Counter-based stream: e_j is a pure function of (law, seed, j).
class InnovationStream final : public InnovationSource {
 public:
  InnovationStream(InnovationSpec spec, std::uint64_t seed);

  double at(std::int64_t j) const noexcept;
  void fill(std::int64_t first, std::span<double> out) const override;

  const InnovationSpec& spec() const noexcept { return spec_; }
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  InnovationSpec spec_;
  std::uint64_t seed_;
  std::uint64_t key_;
};

// Test double producing zeros.
class ZeroInnovations final : public InnovationSource {
 public:
  void fill(std::int64_t, std::span<double> out) const override;
};

// Test double backed by an explicit table; indices outside it read as 0.
class TableInnovations final : public InnovationSource {
 public:
  TableInnovations(std::int64_t first_index, std::vector<double> values)
      : first_(first_index), values_(std::move(values)) {}
  void fill(std::int64_t first, std::span<double> out) const override;

 private:
  std::int64_t first_;
  std::vector<double> values_;
};

// e_0 .. e_{count-1} of the stream (spec, seed).
std::vector<double> sample_innovations(const InnovationSpec& spec, std::size_t count,
                                       std::uint64_t seed);

}  // namespace chaoslab
