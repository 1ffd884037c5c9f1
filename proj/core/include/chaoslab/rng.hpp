#pragma once

#include <bit>
#include <cstdint>

namespace chaoslab::rng {

// Stafford's "Mix13" finalizer (the splitmix64 output function).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Keyed counter hash: the value at position `counter` of the stream `key`.
// Two keyed mixing rounds, so distinct keys do not produce shifted copies of
// one another the way plain splitmix64 seeds do.
constexpr std::uint64_t counter_hash(std::uint64_t key, std::uint64_t counter) noexcept {
  std::uint64_t z = counter * 0x9e3779b97f4a7c15ULL + key;
  z = mix64(z);
  z ^= (key << 32) | (key >> 32);
  return mix64(z + 0xd1b54a32d192ed03ULL);
}

// Seed of replicate `index` under `base`: counter-mode hash of the pair.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept {
  return counter_hash(mix64(base ^ 0x6a09e667f3bcc909ULL), index);
}

// Uniform on the open interval (0, 1) from the top 53 bits.
constexpr double open_unit(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// Natural log for positive normal doubles by pure arithmetic, so it vectorizes
// and rounds identically everywhere. Max error about 2 ulp.
inline double log_positive(double x) noexcept {
  const auto bits = std::bit_cast<std::uint64_t>(x);
  const std::uint64_t frac = bits & 0x000fffffffffffffULL;
  // Fold m into [sqrt(1/2), sqrt(2)) without branching: big is 0 or 1.
  const std::uint64_t big = static_cast<std::uint64_t>(frac > 0x6a09e667f3bcdULL);
  const auto e = static_cast<std::int64_t>(((bits >> 52) & 0x7ff) + big) - 1023;
  const double m = std::bit_cast<double>(frac | ((0x3ffULL - big) << 52));
  const double s = (m - 1.0) / (m + 1.0);
  const double z = s * s;
  // atanh series: 2 (s + s^3/3 + ... + s^21/21)
  double p = 1.0 / 21.0;
  p = p * z + 1.0 / 19.0;
  p = p * z + 1.0 / 17.0;
  p = p * z + 1.0 / 15.0;
  p = p * z + 1.0 / 13.0;
  p = p * z + 1.0 / 11.0;
  p = p * z + 1.0 / 9.0;
  p = p * z + 1.0 / 7.0;
  p = p * z + 1.0 / 5.0;
  p = p * z + 1.0 / 3.0;
  const double lm = 2.0 * s + 2.0 * s * z * p;
  const double de = static_cast<double>(e);
  return de * 0.6931471805599453 + (lm + de * 2.3190468138462996e-17);
}

// Central branch of AS 241, valid for |q| <= 0.425 with q = p - 1/2.
inline double normal_quantile_central(double q) noexcept {
  const double r = 0.180625 - q * q;
  return q *
         (((((((2509.0809287301226727 * r + 33430.575583588128105) * r +
               67265.770927008700853) * r + 45921.953931549871457) * r +
             13731.693765509461125) * r + 1971.5909503065514427) * r +
           133.14166789178437745) * r + 3.387132872796366608) /
         (((((((5226.495278852545925 * r + 28729.085735721942674) * r +
               39307.89580009271061) * r + 21213.794301586595867) * r +
             5394.1960214247511077) * r + 687.1870074920579083) * r +
           42.313330701600911252) * r + 1.0);
}

// AS 241 tail branch for 1.6 <= r <= 5, r = sqrt(-log(min(p, 1 - p))).
inline double normal_quantile_tail_poly(double r) noexcept {
  r -= 1.6;
  return (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r +
            0.24178072517745061177) * r + 1.27045825245236838258) * r +
          3.64784832476320460504) * r + 5.7694972214606914055) * r +
        4.6303378461565452959) * r + 1.42343711074968357734) /
      (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r +
            0.0151986665636164571966) * r + 0.14810397642748007459) * r +
          0.68976733498510000455) * r + 1.6763848301838038494) * r +
        2.05319162663775882187) * r + 1.0);
}

// Inverse standard normal CDF, Wichura's AS 241 (PPND16), |rel err| ~ 1e-16.
double normal_quantile(double p) noexcept;

}  // namespace chaoslab::rng
