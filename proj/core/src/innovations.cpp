#include "chaoslab/innovations.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "chaoslab/errors.hpp"
#include "chaoslab/rng.hpp"

namespace chaoslab {

namespace {

std::uint64_t family_tag(Family f) {
  switch (f) {
    case Family::gaussian: return 0x67617573ULL;
    case Family::rademacher: return 0x72616465ULL;
    case Family::standardized_uniform: return 0x756e6966ULL;
    case Family::centered_exponential: return 0x6578706fULL;
  }
  return 0;
}

}  // namespace

InnovationSpec InnovationSpec::from_name(std::string_view name) {
  if (name == "gaussian") return {Family::gaussian};
  if (name == "rademacher") return {Family::rademacher};
  if (name == "standardized_uniform") return {Family::standardized_uniform};
  if (name == "centered_exponential") return {Family::centered_exponential};
  fail(ErrorKind::config, "unknown innovation family '" + std::string(name) + "'");
}

std::vector<InnovationSpec> InnovationSpec::all() {
  return {{Family::gaussian},
          {Family::rademacher},
          {Family::standardized_uniform},
          {Family::centered_exponential}};
}

std::string_view InnovationSpec::name() const noexcept {
  switch (family) {
    case Family::gaussian: return "gaussian";
    case Family::rademacher: return "rademacher";
    case Family::standardized_uniform: return "standardized_uniform";
    case Family::centered_exponential: return "centered_exponential";
  }
  return "unknown";
}

double InnovationSpec::third_abs_moment() const noexcept {
  switch (family) {
    case Family::gaussian: return 2.0 * std::sqrt(2.0 / std::numbers::pi);
    case Family::rademacher: return 1.0;
    case Family::standardized_uniform: return 0.75 * std::numbers::sqrt3;
    case Family::centered_exponential: return 12.0 / std::numbers::e - 2.0;
  }
  return 0.0;
}

double InnovationSpec::excess_kurtosis() const noexcept {
  switch (family) {
    case Family::gaussian: return 0.0;
    case Family::rademacher: return -2.0;
    case Family::standardized_uniform: return -1.2;
    case Family::centered_exponential: return 6.0;
  }
  return 0.0;
}

InnovationStream::InnovationStream(InnovationSpec spec, std::uint64_t seed)
    : spec_(spec), seed_(seed), key_(rng::counter_hash(rng::mix64(seed), family_tag(spec.family))) {}

double InnovationStream::at(std::int64_t j) const noexcept {
  double v;
  fill(j, std::span<double>(&v, 1));
  return v;
}

void InnovationStream::fill(std::int64_t first, std::span<double> out) const {
  const std::size_t n = out.size();
  const std::uint64_t key = key_;
  double* o = out.data();
  switch (spec_.family) {
    case Family::gaussian: {
      // Branch-free central part in bulk, tails patched afterwards.
      constexpr std::size_t kChunk = 1024;
      double u[kChunk];
      for (std::size_t c0 = 0; c0 < n; c0 += kChunk) {
        const std::size_t m = std::min(kChunk, n - c0);
        const auto base = static_cast<std::uint64_t>(first + static_cast<std::int64_t>(c0));
        for (std::size_t t = 0; t < m; ++t) u[t] = rng::open_unit(rng::counter_hash(key, base + t));
        double* oc = o + c0;
        for (std::size_t t = 0; t < m; ++t) {
          const double q = u[t] - 0.5;
          const double lo = static_cast<double>(q < 0.0);
          const double pm = lo * u[t] + (1.0 - lo) * (1.0 - u[t]);
          const double x = rng::normal_quantile_tail_poly(std::sqrt(-rng::log_positive(pm)));
          const double tail = std::copysign(x, q);
          const double mid = rng::normal_quantile_central(q);
          // Both branches are finite, so the 0/1 blend is exact.
          const double w = static_cast<double>(std::abs(q) <= 0.425);
          oc[t] = w * mid + (1.0 - w) * tail;
        }
        // Far tail (r > 5 needs p < exp(-25)): rare, take the full routine.
        for (std::size_t t = 0; t < m; ++t) {
          if (u[t] < 1.5e-11 || u[t] > 1.0 - 1.5e-11) oc[t] = rng::normal_quantile(u[t]);
        }
      }
      break;
    }
    case Family::rademacher: {
      // 64 signs per hash; word index is floor(j / 64).
      std::size_t t = 0;
      while (t < n) {
        const std::int64_t j = first + static_cast<std::int64_t>(t);
        const std::uint64_t bits = rng::counter_hash(key, static_cast<std::uint64_t>(j >> 6));
        const int bit0 = static_cast<int>(j & 63);
        const std::size_t m = std::min<std::size_t>(static_cast<std::size_t>(64 - bit0), n - t);
        for (std::size_t b = 0; b < m; ++b) {
          o[t + b] = static_cast<double>(static_cast<int>((bits >> (bit0 + static_cast<int>(b))) & 1ULL) * 2 - 1);
        }
        t += m;
      }
      break;
    }
    case Family::standardized_uniform:
      for (std::size_t t = 0; t < n; ++t) {
        const auto c = static_cast<std::uint64_t>(first + static_cast<std::int64_t>(t));
        o[t] = std::numbers::sqrt3 * (2.0 * rng::open_unit(rng::counter_hash(key, c)) - 1.0);
      }
      break;
    case Family::centered_exponential:
      for (std::size_t t = 0; t < n; ++t) {
        const auto c = static_cast<std::uint64_t>(first + static_cast<std::int64_t>(t));
        o[t] = rng::open_unit(rng::counter_hash(key, c));
      }
      for (std::size_t t = 0; t < n; ++t) o[t] = -rng::log_positive(o[t]) - 1.0;
      break;
  }
}

void ZeroInnovations::fill(std::int64_t, std::span<double> out) const {
  for (double& v : out) v = 0.0;
}

void TableInnovations::fill(std::int64_t first, std::span<double> out) const {
  for (std::size_t t = 0; t < out.size(); ++t) {
    const std::int64_t j = first + static_cast<std::int64_t>(t) - first_;
    out[t] = (j >= 0 && j < static_cast<std::int64_t>(values_.size()))
                 ? values_[static_cast<std::size_t>(j)]
                 : 0.0;
  }
}

std::vector<double> sample_innovations(const InnovationSpec& spec, std::size_t count,
                                       std::uint64_t seed) {
  if (count < 1) fail(ErrorKind::invalid_input, "sample_innovations: count must be >= 1");
  std::vector<double> out(count);
  InnovationStream(spec, seed).fill(0, out);
  return out;
}

}  // namespace chaoslab
