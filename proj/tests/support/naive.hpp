#pragma once

// Brute-force references used as oracles by the unit and acceptance tests.

#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "chaoslab/forms.hpp"
#include "chaoslab/kernels.hpp"
#include "chaoslab/numerics.hpp"
#include "chaoslab/rng.hpp"

namespace naive {

using chaoslab::IndexTuple;
using chaoslab::SymmetricKernel;

inline std::vector<std::int64_t> support_indices(const SymmetricKernel& f, const SymmetricKernel& g) {
  std::set<std::int64_t> s;
  for (const auto* k : {&f, &g})
    for (const auto& [t, v] : k->entries())
      for (int i = 0; i < t.size(); ++i) s.insert(t[i]);
  return {s.begin(), s.end()};
}

// Calls fn(tuple) for every tuple in U^len.
template <class F>
void for_each_tuple(const std::vector<std::int64_t>& U, int len, F&& fn) {
  std::vector<std::size_t> pos(static_cast<std::size_t>(len), 0);
  std::vector<std::int64_t> t(static_cast<std::size_t>(len));
  if (U.empty() && len > 0) return;
  while (true) {
    for (int i = 0; i < len; ++i) t[static_cast<std::size_t>(i)] = U[pos[static_cast<std::size_t>(i)]];
    fn(t);
    int i = len - 1;
    while (i >= 0 && ++pos[static_cast<std::size_t>(i)] == U.size()) pos[static_cast<std::size_t>(i--)] = 0;
    if (i < 0) return;
  }
}

inline double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

inline double inner_product(const SymmetricKernel& f, const SymmetricKernel& g) {
  if (f.order() != g.order()) return 0.0;
  const auto U = support_indices(f, g);
  chaoslab::numerics::CompensatedSum s;
  for_each_tuple(U, f.order(), [&](const std::vector<std::int64_t>& t) { s.add(f.value(t) * g.value(t)); });
  return factorial(f.order()) * s.value();
}

// Value of f *_r g at (x, y) summed over j in U^r.
inline double contraction_at(const SymmetricKernel& f, const SymmetricKernel& g, int r,
                             const std::vector<std::int64_t>& x, const std::vector<std::int64_t>& y,
                             const std::vector<std::int64_t>& U) {
  chaoslab::numerics::CompensatedSum s;
  std::vector<std::int64_t> a(x), b(y);
  a.resize(x.size() + static_cast<std::size_t>(r));
  b.resize(y.size() + static_cast<std::size_t>(r));
  for_each_tuple(U, r, [&](const std::vector<std::int64_t>& j) {
    for (int i = 0; i < r; ++i) {
      a[x.size() + static_cast<std::size_t>(i)] = j[static_cast<std::size_t>(i)];
      b[y.size() + static_cast<std::size_t>(i)] = j[static_cast<std::size_t>(i)];
    }
    s.add(f.value(a) * g.value(b));
  });
  return s.value();
}

inline double contraction_squared_norm(const SymmetricKernel& f, const SymmetricKernel& g, int r) {
  const auto U = support_indices(f, g);
  const int p = f.order() - r;
  const int q = g.order() - r;
  chaoslab::numerics::CompensatedSum s;
  for_each_tuple(U, p + q, [&](const std::vector<std::int64_t>& xy) {
    const std::vector<std::int64_t> x(xy.begin(), xy.begin() + p);
    const std::vector<std::int64_t> y(xy.begin() + p, xy.end());
    const double v = contraction_at(f, g, r, x, y, U);
    s.add(v * v);
  });
  return s.value();
}

// Random symmetric kernel with up to `entries` canonical tuples drawn from [0, range).
inline SymmetricKernel random_kernel(int k, std::int64_t range, int entries, std::uint64_t seed) {
  SymmetricKernel f(k);
  std::uint64_t c = 0;
  auto next = [&] { return chaoslab::rng::counter_hash(seed, c++); };
  for (int e = 0; e < entries; ++e) {
    std::vector<std::int64_t> t(static_cast<std::size_t>(k));
    for (auto& x : t) x = static_cast<std::int64_t>(next() % static_cast<std::uint64_t>(range));
    std::set<std::int64_t> d(t.begin(), t.end());
    if (static_cast<int>(d.size()) < k) continue;
    f.set(t, 2.0 * chaoslab::rng::open_unit(next()) - 1.0);
  }
  return f;
}

}  // namespace naive
