#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "chaoslab/io.hpp"
#include "chaoslab/kernels.hpp"

namespace chaoslab {

// f *_r g on Z^{p+q-2r}, stored over ordered tuples: f's free indices first,
// then g's. Not symmetrized.
struct ContractionResult {
  int left_order = 0;
  int right_order = 0;
  int r = 0;
  std::unordered_map<IndexTuple, double, IndexTupleHash> entries;
  double squared_norm = 0.0;

  std::vector<std::pair<IndexTuple, double>> sorted_entries() const;
  // Value at an ordered tuple (0 outside the support).
  double at(const IndexTuple& t) const;
};

// Q_k(f, X) = sum over ordered tuples of f(i) X_{i_1} ... X_{i_k}.
double eval_form(const SymmetricKernel& f, const std::unordered_map<std::int64_t, double>& X);
// Same with X given densely as X[first_index + t].
double eval_form(const SymmetricKernel& f, std::int64_t first_index, std::span<const double> X);

// k! * sum over ordered tuples of f1 f2; 0 when the orders differ.
double inner_product(const SymmetricKernel& f1, const SymmetricKernel& f2);

ContractionResult contract(const SymmetricKernel& f, const SymmetricKernel& g, int r);

struct ContractionOptions {
  unsigned threads = 1;
};

// ||f *_r f|| computed without materializing the contraction.
double contraction_norm(const SymmetricKernel& f, int r, const ContractionOptions& opt = {});

struct CltCriterionRow {
  std::int64_t N = 0;
  double inner_product = 0.0;
  std::vector<double> contraction_norms;  // r = 1 .. k-1
};

struct CltCriterionOptions {
  double variance_band = 0.15;
  unsigned threads = 1;
};

struct CltCriterionReport {
  int order = 0;
  double target_variance = 0.0;
  double variance_band = 0.15;
  std::vector<CltCriterionRow> rows;
  bool variance_ok = false;
  bool decay_ok = false;
  bool pass = false;

  io::CsvTable to_csv() const;
};

// One row per N from a kernel already built for that N.
CltCriterionRow clt_criterion_row(std::int64_t N, const SymmetricKernel& f_N,
                                  const ContractionOptions& opt = {});
CltCriterionReport clt_criterion_report(const std::vector<CltCriterionRow>& rows, int order,
                                        double target_variance,
                                        const CltCriterionOptions& opt = {});
CltCriterionReport clt_criterion_report(
    const std::vector<std::pair<std::int64_t, SymmetricKernel>>& kernels, double target_variance,
    const CltCriterionOptions& opt = {});

}  // namespace chaoslab
