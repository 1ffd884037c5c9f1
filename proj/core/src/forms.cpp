#include "chaoslab/forms.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "chaoslab/errors.hpp"
#include "chaoslab/numerics.hpp"
#include "chaoslab/parallel.hpp"

namespace chaoslab {

using numerics::CompensatedSum;

namespace {

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

// Calls f(tuple) for all k! orderings of a canonical (sorted, distinct) tuple.
template <class F>
void for_each_ordering(const IndexTuple& canonical, F&& f) {
  std::array<std::int64_t, kMaxOrder> v{};
  const int k = canonical.size();
  for (int i = 0; i < k; ++i) v[static_cast<std::size_t>(i)] = canonical[i];
  do {
    f(IndexTuple(std::span<const std::int64_t>(v.data(), static_cast<std::size_t>(k))));
  } while (std::next_permutation(v.begin(), v.begin() + k));
}

struct OrderedEntry {
  IndexTuple head;  // free coordinates
  double value;
};

// Ordered tuples grouped by their last r coordinates.
std::map<IndexTuple, std::vector<OrderedEntry>> group_by_tail(const SymmetricKernel& f, int r) {
  std::map<IndexTuple, std::vector<OrderedEntry>> groups;
  const int k = f.order();
  for (const auto& [key, v] : f.sorted_entries()) {
    for_each_ordering(key, [&](const IndexTuple& t) {
      groups[t.slice(k - r, r)].push_back({t.slice(0, k - r), v});
    });
  }
  return groups;
}

}  // namespace

std::vector<std::pair<IndexTuple, double>> ContractionResult::sorted_entries() const {
  std::vector<std::pair<IndexTuple, double>> out(entries.begin(), entries.end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

double ContractionResult::at(const IndexTuple& t) const {
  auto it = entries.find(t);
  return it == entries.end() ? 0.0 : it->second;
}

double eval_form(const SymmetricKernel& f, const std::unordered_map<std::int64_t, double>& X) {
  CompensatedSum s;
  for (const auto& [key, v] : f.sorted_entries()) {
    double p = v;
    for (int i = 0; i < key.size(); ++i) {
      auto it = X.find(key[i]);
      if (it == X.end()) {
        fail(ErrorKind::incomplete_input, "eval_form: no value for index " + std::to_string(key[i]));
      }
      p *= it->second;
    }
    s.add(p);
  }
  return factorial(f.order()) * s.value();
}

double eval_form(const SymmetricKernel& f, std::int64_t first_index, std::span<const double> X) {
  CompensatedSum s;
  const auto n = static_cast<std::int64_t>(X.size());
  for (const auto& [key, v] : f.sorted_entries()) {
    double p = v;
    for (int i = 0; i < key.size(); ++i) {
      const std::int64_t j = key[i] - first_index;
      if (j < 0 || j >= n) {
        fail(ErrorKind::incomplete_input, "eval_form: no value for index " + std::to_string(key[i]));
      }
      p *= X[static_cast<std::size_t>(j)];
    }
    s.add(p);
  }
  return factorial(f.order()) * s.value();
}

double inner_product(const SymmetricKernel& f1, const SymmetricKernel& f2) {
  if (f1.order() != f2.order()) return 0.0;
  const SymmetricKernel& small = f1.size() <= f2.size() ? f1 : f2;
  const SymmetricKernel& large = f1.size() <= f2.size() ? f2 : f1;
  CompensatedSum s;
  for (const auto& [key, v] : small.sorted_entries()) {
    auto it = large.entries().find(key);
    if (it != large.entries().end()) s.add(v * it->second);
  }
  // k! orderings per canonical tuple, times the k! pairing factor.
  const double kf = factorial(f1.order());
  return kf * kf * s.value();
}

ContractionResult contract(const SymmetricKernel& f, const SymmetricKernel& g, int r) {
  const int p = f.order();
  const int q = g.order();
  if (r < 0 || r > std::min(p, q)) {
    fail(ErrorKind::domain, "contraction index r=" + std::to_string(r) + " outside [0, min(p,q)]");
  }
  if (p + q - 2 * r > kMaxOrder) fail(ErrorKind::invalid_input, "contraction output order too large");
  ContractionResult res;
  res.left_order = p;
  res.right_order = q;
  res.r = r;
  const auto gf = group_by_tail(f, r);
  const auto gg = group_by_tail(g, r);
  std::map<IndexTuple, CompensatedSum> acc;
  for (const auto& [j, fl] : gf) {
    auto it = gg.find(j);
    if (it == gg.end()) continue;
    for (const auto& a : fl)
      for (const auto& b : it->second) acc[a.head.concat(b.head)].add(a.value * b.value);
  }
  CompensatedSum norm;
  res.entries.reserve(acc.size());
  for (const auto& [t, s] : acc) {
    const double v = s.value();
    norm.add(v * v);
    res.entries.emplace(t, v);
  }
  res.squared_norm = norm.value();
  return res;
}

double contraction_norm(const SymmetricKernel& f, int r, const ContractionOptions& opt) {
  const int k = f.order();
  if (k < 2 || r < 1 || r > k - 1) {
    fail(ErrorKind::domain, "contraction_norm needs 1 <= r <= k-1, got r=" + std::to_string(r));
  }
  // ||f *_r f||^2 = sum_{j,j'} G(j,j')^2 with G(j,j') = sum_u f(j,u) f(j',u):
  // j are r-prefixes, u are (k-r)-suffixes of ordered tuples.
  struct Item {
    IndexTuple prefix, suffix;
    double value;
  };
  std::vector<Item> items;
  items.reserve(f.size() * static_cast<std::size_t>(factorial(k)));
  for (const auto& [key, v] : f.sorted_entries()) {
    for_each_ordering(key, [&](const IndexTuple& t) {
      items.push_back({t.slice(0, r), t.slice(r, k - r), v});
    });
  }
  if (items.empty()) return 0.0;

  auto dense_ids = [&](auto member) {
    std::vector<IndexTuple> keys;
    keys.reserve(items.size());
    for (const auto& it : items) keys.push_back(it.*member);
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    return keys;
  };
  const std::vector<IndexTuple> prefixes = dense_ids(&Item::prefix);
  const std::vector<IndexTuple> suffixes = dense_ids(&Item::suffix);
  auto id_of = [](const std::vector<IndexTuple>& keys, const IndexTuple& t) {
    return static_cast<std::uint32_t>(std::lower_bound(keys.begin(), keys.end(), t) - keys.begin());
  };

  struct Link {
    std::uint32_t id;
    double value;
  };
  // CSR by prefix (links to suffixes) and by suffix (links to prefixes).
  std::vector<std::uint32_t> prow(prefixes.size() + 1, 0), srow(suffixes.size() + 1, 0);
  std::vector<std::uint32_t> pid(items.size()), sid(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    pid[i] = id_of(prefixes, items[i].prefix);
    sid[i] = id_of(suffixes, items[i].suffix);
    ++prow[pid[i] + 1];
    ++srow[sid[i] + 1];
  }
  for (std::size_t i = 1; i < prow.size(); ++i) prow[i] += prow[i - 1];
  for (std::size_t i = 1; i < srow.size(); ++i) srow[i] += srow[i - 1];
  std::vector<Link> plinks(items.size()), slinks(items.size());
  {
    std::vector<std::uint32_t> pfill(prow.begin(), prow.end() - 1), sfill(srow.begin(), srow.end() - 1);
    for (std::size_t i = 0; i < items.size(); ++i) {
      plinks[pfill[pid[i]]++] = {sid[i], items[i].value};
      slinks[sfill[sid[i]]++] = {pid[i], items[i].value};
    }
  }
  items.clear();
  items.shrink_to_fit();

  const std::size_t P = prefixes.size();
  std::vector<double> row_sum(P, 0.0);
  const unsigned workers = std::max(1u, opt.threads);
  const std::size_t chunks = std::min<std::size_t>(P, workers);
  parallel_for(chunks, workers, [&](std::size_t c) {
    const std::size_t lo = P * c / chunks;
    const std::size_t hi = P * (c + 1) / chunks;
    std::vector<double> acc(P, 0.0);
    std::vector<std::uint32_t> touched;
    std::vector<char> mark(P, 0);
    for (std::size_t j = lo; j < hi; ++j) {
      touched.clear();
      for (std::uint32_t a = prow[j]; a < prow[j + 1]; ++a) {
        const Link& ju = plinks[a];
        for (std::uint32_t b = srow[ju.id]; b < srow[ju.id + 1]; ++b) {
          const Link& uj = slinks[b];
          if (!mark[uj.id]) {
            mark[uj.id] = 1;
            touched.push_back(uj.id);
          }
          acc[uj.id] += ju.value * uj.value;
        }
      }
      std::sort(touched.begin(), touched.end());
      CompensatedSum s;
      for (std::uint32_t t : touched) {
        s.add(acc[t] * acc[t]);
        acc[t] = 0.0;
        mark[t] = 0;
      }
      row_sum[j] = s.value();
    }
  });
  CompensatedSum total;
  for (double v : row_sum) total.add(v);
  return std::sqrt(total.value());
}

CltCriterionRow clt_criterion_row(std::int64_t N, const SymmetricKernel& f_N,
                                  const ContractionOptions& opt) {
  CltCriterionRow row;
  row.N = N;
  row.inner_product = inner_product(f_N, f_N);
  for (int r = 1; r < f_N.order(); ++r) row.contraction_norms.push_back(contraction_norm(f_N, r, opt));
  return row;
}

CltCriterionReport clt_criterion_report(const std::vector<CltCriterionRow>& rows, int order,
                                        double target_variance, const CltCriterionOptions& opt) {
  if (rows.size() < 3) fail(ErrorKind::insufficient_data, "criterion report needs at least 3 grid points");
  if (order < 2) fail(ErrorKind::invalid_input, "criterion report needs order k >= 2");
  CltCriterionReport rep;
  rep.order = order;
  rep.target_variance = target_variance;
  rep.variance_band = opt.variance_band;
  rep.rows = rows;
  const double last = rows.back().inner_product;
  rep.variance_ok = target_variance > 0.0 &&
                    std::abs(last / target_variance - 1.0) <= opt.variance_band;
  // Top half of the grid: the last ceil(n/2) points.
  const std::size_t start = rows.size() / 2;
  rep.decay_ok = true;
  for (int r = 0; r < order - 1; ++r) {
    for (std::size_t i = start + 1; i < rows.size(); ++i) {
      if (!(rows[i].contraction_norms[static_cast<std::size_t>(r)] <
            rows[i - 1].contraction_norms[static_cast<std::size_t>(r)])) {
        rep.decay_ok = false;
      }
    }
  }
  rep.pass = rep.variance_ok && rep.decay_ok;
  return rep;
}

CltCriterionReport clt_criterion_report(
    const std::vector<std::pair<std::int64_t, SymmetricKernel>>& kernels, double target_variance,
    const CltCriterionOptions& opt) {
  if (kernels.size() < 3) fail(ErrorKind::insufficient_data, "criterion report needs at least 3 grid points");
  const int order = kernels.front().second.order();
  std::vector<CltCriterionRow> rows;
  for (const auto& [N, f] : kernels) {
    if (f.order() != order) fail(ErrorKind::invalid_input, "kernels in a criterion report must share an order");
    rows.push_back(clt_criterion_row(N, f, {opt.threads}));
  }
  return clt_criterion_report(rows, order, target_variance, opt);
}

io::CsvTable CltCriterionReport::to_csv() const {
  std::vector<std::string> header = {"N", "inner_product"};
  for (int r = 1; r < order; ++r) header.push_back("contraction_norm_r" + std::to_string(r));
  io::CsvTable t(header);
  for (const auto& row : rows) {
    std::vector<std::string> cells = {std::to_string(row.N), io::format_double(row.inner_product)};
    for (double c : row.contraction_norms) cells.push_back(io::format_double(c));
    t.add_row(std::move(cells));
  }
  return t;
}

}  // namespace chaoslab
