#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <map>
#include <mutex>

#include "chaoslab/errors.hpp"
#include "chaoslab/numerics.hpp"
#include "chaoslab/process.hpp"

namespace chaoslab {

namespace {

// The FFTW planner is not thread-safe; execution with the new-array
// interface is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n) : n(n), data(static_cast<double*>(fftw_malloc(sizeof(double) * n))) {
    if (!data) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  std::size_t n;
  double* data;
};

struct FftwComplexBuffer {
  explicit FftwComplexBuffer(std::size_t n)
      : n(n), data(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
    if (!data) throw std::bad_alloc();
  }
  ~FftwComplexBuffer() { fftw_free(data); }
  FftwComplexBuffer(const FftwComplexBuffer&) = delete;
  FftwComplexBuffer& operator=(const FftwComplexBuffer&) = delete;
  std::size_t n;
  fftw_complex* data;
};

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

constexpr int kLanes = 32;
// Four 8-wide accumulators per term; lane l always holds the same residues.
typedef double Vec8 __attribute__((vector_size(64)));
constexpr std::int64_t kBlock = 2048;

}  // namespace

struct SeparablePathEngine::Impl {
  struct Series {
    double a;
    int p;
  };
  struct Term {
    double coef;
    std::vector<int> factors;
  };
  enum class Mode { direct, single_fft, far_field };

  // One FFT convolution region: innovations e_j for j in [first, first+length)
  // against a fixed lag kernel per series.
  struct Region {
    std::int64_t first = 0;
    std::int64_t length = 0;
    std::size_t P = 0;
    fftw_plan fwd = nullptr;
    fftw_plan inv = nullptr;
    std::vector<std::vector<std::complex<double>>> spectra;  // per series
  };

  struct Shell {
    std::int64_t lo;  // -j in [lo, hi)
    std::int64_t hi;
    int terms;
  };

  std::int64_t N = 0;
  std::int64_t M = 0;
  std::vector<Series> series;
  std::vector<int> powers;  // distinct p values
  std::vector<Term> terms;
  Mode mode = Mode::direct;
  double work = 0.0;

  std::vector<std::vector<double>> lag_pow;  // direct mode, index l in [0, M]
  Region full, near, edge;

  std::int64_t B = 0;
  std::vector<Shell> shells;
  int max_terms = 0;
  std::vector<std::vector<double>> far_weight;  // (-j)^a, index j - (N - M)
  std::vector<std::vector<double>> far_binom;

  ~Impl() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    for (Region* r : {&full, &near, &edge}) {
      if (r->fwd) fftw_destroy_plan(r->fwd);
      if (r->inv) fftw_destroy_plan(r->inv);
    }
  }

  void plan_region(Region& r, const std::vector<std::vector<double>>& kernels) {
    {
      std::lock_guard<std::mutex> lock(planner_mutex());
      FftwBuffer in(r.P);
      FftwComplexBuffer out(r.P / 2 + 1);
      // ESTIMATE keeps the chosen algorithm, and so the rounding, fixed run to run.
      r.fwd = fftw_plan_dft_r2c_1d(static_cast<int>(r.P), in.data, out.data, FFTW_ESTIMATE);
      r.inv = fftw_plan_dft_c2r_1d(static_cast<int>(r.P), out.data, in.data, FFTW_ESTIMATE);
    }
    FftwBuffer in(r.P);
    FftwComplexBuffer out(r.P / 2 + 1);
    for (const auto& h : kernels) {
      std::fill(in.data, in.data + r.P, 0.0);
      std::copy(h.begin(), h.end(), in.data);
      fftw_execute_dft_r2c(r.fwd, in.data, out.data);
      std::vector<std::complex<double>> spec(r.P / 2 + 1);
      for (std::size_t i = 0; i < spec.size(); ++i) spec[i] = {out.data[i][0], out.data[i][1]};
      r.spectra.push_back(std::move(spec));
    }
  }

  // W_s(n) += sum over the region of x_j^p K_s(...) by one forward transform
  // per power and one inverse per series; out_index maps n to the output slot.
  template <class OutIndex>
  void convolve_region(const Region& r, const std::vector<double>& eps, bool reversed,
                       std::vector<std::vector<double>>& W, OutIndex out_index) const {
    FftwBuffer in(r.P);
    FftwComplexBuffer xf(r.P / 2 + 1);
    FftwComplexBuffer prod(r.P / 2 + 1);
    const double scale = 1.0 / static_cast<double>(r.P);
    const auto L = static_cast<std::size_t>(r.length);
    for (int p : powers) {
      std::fill(in.data, in.data + r.P, 0.0);
      for (std::size_t t = 0; t < L; ++t) {
        const double e = eps[reversed ? L - 1 - t : t];
        in.data[t] = p == 1 ? e : std::pow(e, p);
      }
      fftw_execute_dft_r2c(r.fwd, in.data, xf.data);
      for (std::size_t s = 0; s < series.size(); ++s) {
        if (series[s].p != p) continue;
        const auto& spec = r.spectra[s];
        for (std::size_t i = 0; i < spec.size(); ++i) {
          const std::complex<double> v = std::complex<double>(xf.data[i][0], xf.data[i][1]) * spec[i];
          prod.data[i][0] = v.real();
          prod.data[i][1] = v.imag();
        }
        fftw_execute_dft_c2r(r.inv, prod.data, in.data);
        for (std::int64_t n = 1; n <= N; ++n) {
          W[s][static_cast<std::size_t>(n - 1)] += in.data[out_index(n)] * scale;
        }
      }
    }
  }

  void accumulate_far(const InnovationSource& src, std::vector<std::vector<double>>& W) const {
    const std::size_t S = series.size();
    const auto T = static_cast<std::size_t>(max_terms);
    const std::int64_t j0 = N - M;  // first middle index
    // acc[s][m][lane]: fixed lane assignment keeps the summation order, and
    // so the result, independent of anything but the path itself.
    std::vector<double> acc(S * T * kLanes, 0.0);
    std::vector<double> eps(static_cast<std::size_t>(kBlock));
    std::vector<double> rr(static_cast<std::size_t>(kBlock));
    std::vector<double> v(static_cast<std::size_t>(kBlock));
    for (auto sh = shells.rbegin(); sh != shells.rend(); ++sh) {
      const auto terms_here = static_cast<std::size_t>(sh->terms);
      // j ascends from -(hi-1) to -lo.
      for (std::int64_t first = -(sh->hi - 1); first <= -sh->lo; first += kBlock) {
        const std::int64_t last = std::min<std::int64_t>(first + kBlock - 1, -sh->lo);
        const auto len = static_cast<std::size_t>(last - first + 1);
        const std::size_t padded = (len + kLanes - 1) / kLanes * kLanes;
        src.fill(first, std::span<double>(eps.data(), len));
        const double fb = static_cast<double>(B);
        const double x0 = static_cast<double>(-first);
        for (std::size_t q = 0; q < len; ++q) rr[q] = fb / (x0 - static_cast<double>(q));
        for (std::size_t q = len; q < padded; ++q) rr[q] = 0.0;
        for (std::size_t s = 0; s < S; ++s) {
          const int p = series[s].p;
          const double* w = far_weight[s].data() + (first - j0);
          if (p == 1) {
            for (std::size_t q = 0; q < len; ++q) v[q] = eps[q] * w[q];
          } else if (p == 2) {
            for (std::size_t q = 0; q < len; ++q) v[q] = eps[q] * eps[q] * w[q];
          } else {
            for (std::size_t q = 0; q < len; ++q) v[q] = std::pow(eps[q], p) * w[q];
          }
          for (std::size_t q = len; q < padded; ++q) v[q] = 0.0;
          double* a = acc.data() + s * T * kLanes;
          double* vp = v.data();
          const double* rp = rr.data();
          for (std::size_t m = 0; m < terms_here; ++m) {
            Vec8 acc4[4];
            std::memcpy(acc4, a + m * kLanes, sizeof(acc4));
            for (std::size_t q0 = 0; q0 < padded; q0 += kLanes) {
              for (int l = 0; l < 4; ++l) {
                Vec8 x, y;
                std::memcpy(&x, vp + q0 + 8 * l, sizeof(Vec8));
                std::memcpy(&y, rp + q0 + 8 * l, sizeof(Vec8));
                acc4[l] += x;
                x *= y;
                std::memcpy(vp + q0 + 8 * l, &x, sizeof(Vec8));
              }
            }
            std::memcpy(a + m * kLanes, acc4, sizeof(acc4));
          }
        }
      }
    }
    for (std::size_t s = 0; s < S; ++s) {
      std::vector<double> c(T, 0.0);
      for (std::size_t m = 0; m < T; ++m) {
        double g = 0.0;
        for (int l = 0; l < kLanes; ++l) g += acc[(s * T + m) * kLanes + static_cast<std::size_t>(l)];
        c[m] = far_binom[s][m] * g;
      }
      for (std::int64_t n = 1; n <= N; ++n) {
        const double x = static_cast<double>(n) / static_cast<double>(B);
        double h = 0.0;
        for (std::size_t m = T; m-- > 0;) h = h * x + c[m];
        W[s][static_cast<std::size_t>(n - 1)] += h;
      }
    }
  }
};

SeparablePathEngine::SeparablePathEngine(const CoefficientField& field, std::int64_t N,
                                         const EngineOptions& opt)
    : impl_(std::make_unique<Impl>()) {
  if (!field.separable()) fail(ErrorKind::unsupported, "separable engine needs L = 1");
  if (N < 1) fail(ErrorKind::invalid_input, "N must be >= 1");
  Impl& d = *impl_;
  d.N = N;
  d.M = field.lag_horizon();
  const int k = field.order();
  const PowerKernelSpec& g = field.kernel();

  // Expand each row over set partitions: the distinct-index sum of a product
  // equals sum_pi mu(pi) prod_blocks W_{a_B, |B|}, mu = prod (-1)^{|B|-1}(|B|-1)!.
  std::map<std::pair<double, int>, int> series_id;
  std::map<std::vector<int>, double> merged;
  const auto partitions = numerics::set_partitions(k);
  for (std::size_t row = 0; row < g.rows.size(); ++row) {
    if (g.weights[row] == 0.0) continue;
    for (const auto& rgs : partitions) {
      const int blocks = *std::max_element(rgs.begin(), rgs.end()) + 1;
      std::vector<double> a(static_cast<std::size_t>(blocks), 0.0);
      std::vector<int> size(static_cast<std::size_t>(blocks), 0);
      for (int l = 0; l < k; ++l) {
        a[static_cast<std::size_t>(rgs[static_cast<std::size_t>(l)])] += g.rows[row][static_cast<std::size_t>(l)];
        ++size[static_cast<std::size_t>(rgs[static_cast<std::size_t>(l)])];
      }
      double mu = 1.0;
      std::vector<int> factors;
      for (int b = 0; b < blocks; ++b) {
        const int sz = size[static_cast<std::size_t>(b)];
        for (int q = 1; q < sz; ++q) mu *= -q;
        const auto key = std::make_pair(a[static_cast<std::size_t>(b)], sz);
        auto it = series_id.find(key);
        if (it == series_id.end()) {
          it = series_id.emplace(key, static_cast<int>(d.series.size())).first;
          d.series.push_back({key.first, key.second});
        }
        factors.push_back(it->second);
      }
      std::sort(factors.begin(), factors.end());
      merged[factors] += g.weights[row] * mu;
    }
  }
  for (const auto& [factors, coef] : merged)
    if (coef != 0.0) d.terms.push_back({coef, factors});
  for (const auto& s : d.series)
    if (std::find(d.powers.begin(), d.powers.end(), s.p) == d.powers.end()) d.powers.push_back(s.p);
  std::sort(d.powers.begin(), d.powers.end());

  const std::int64_t M = d.M;
  const double S = static_cast<double>(d.series.size());
  auto fft_cost = [](std::size_t P) { return 5.0 * static_cast<double>(P) * std::log2(static_cast<double>(P)); };

  if (static_cast<double>(N) * static_cast<double>(M) <= opt.direct_limit) {
    d.mode = Impl::Mode::direct;
    for (const auto& s : d.series) {
      std::vector<double> h(static_cast<std::size_t>(M + 1), 0.0);
      for (std::int64_t l = 1; l <= M; ++l) h[static_cast<std::size_t>(l)] = std::pow(static_cast<double>(l), s.a);
      d.lag_pow.push_back(std::move(h));
    }
    d.work = S * static_cast<double>(N) * static_cast<double>(M);
  } else if (M <= opt.near_multiple * N) {
    d.mode = Impl::Mode::single_fft;
    d.full.first = 1 - M;
    d.full.length = N + M - 1;
    d.full.P = next_pow2(static_cast<std::size_t>(N + M));
    std::vector<std::vector<double>> ker;
    for (const auto& s : d.series) {
      std::vector<double> h(static_cast<std::size_t>(M + 1), 0.0);
      for (std::int64_t l = 1; l <= M; ++l) h[static_cast<std::size_t>(l)] = std::pow(static_cast<double>(l), s.a);
      ker.push_back(std::move(h));
    }
    d.plan_region(d.full, ker);
    d.work = (static_cast<double>(d.powers.size()) + S) * fft_cost(d.full.P);
  } else {
    d.mode = Impl::Mode::far_field;
    d.B = 2 * N;
    const std::int64_t B = d.B;
    // Near: j in [-B+1, N-1], lags 1 .. N+B-1.
    d.near.first = -B + 1;
    d.near.length = N + B - 1;
    d.near.P = next_pow2(static_cast<std::size_t>(2 * N + B));
    // Edge: j in [1-M, N-M-1], only lags <= M count; handled reversed.
    d.edge.first = 1 - M;
    d.edge.length = N - 1;
    d.edge.P = next_pow2(static_cast<std::size_t>(2 * N));
    std::vector<std::vector<double>> kn, ke;
    for (const auto& s : d.series) {
      std::vector<double> h(static_cast<std::size_t>(N + B), 0.0);
      for (std::int64_t l = 1; l <= N + B - 1; ++l) h[static_cast<std::size_t>(l)] = std::pow(static_cast<double>(l), s.a);
      kn.push_back(std::move(h));
      std::vector<double> h2(static_cast<std::size_t>(N), 0.0);
      for (std::int64_t q = 0; q < N; ++q) h2[static_cast<std::size_t>(q)] = std::pow(static_cast<double>(M - q), s.a);
      ke.push_back(std::move(h2));
    }
    d.plan_region(d.near, kn);
    d.plan_region(d.edge, ke);

    // Middle: -j in [B, M-N], expanded in powers of n/(-j) shell by shell.
    const std::int64_t top = M - N;  // inclusive
    for (std::int64_t lo = B; lo <= top; lo *= 2) {
      const std::int64_t hi = std::min(2 * lo, top + 1);
      const double rho = static_cast<double>(N) / static_cast<double>(lo);
      int T = 0;
      for (const auto& s : d.series) {
        int t = 1;
        double prev = std::abs(numerics::binomial(s.a, 0));
        while (t < 256) {
          const double term = std::abs(numerics::binomial(s.a, t)) * std::pow(rho, t);
          if (term <= opt.series_tolerance && term <= prev) break;
          prev = term;
          ++t;
        }
        T = std::max(T, t);
      }
      d.shells.push_back({lo, hi, T});
      d.max_terms = std::max(d.max_terms, T);
    }
    for (const auto& s : d.series) {
      std::vector<double> w(static_cast<std::size_t>(top - B + 1));
      for (std::int64_t x = B; x <= top; ++x) w[static_cast<std::size_t>(top - x)] = std::pow(static_cast<double>(x), s.a);
      d.far_weight.push_back(std::move(w));
      std::vector<double> bc(static_cast<std::size_t>(d.max_terms));
      for (int m = 0; m < d.max_terms; ++m) bc[static_cast<std::size_t>(m)] = numerics::binomial(s.a, m);
      d.far_binom.push_back(std::move(bc));
    }
    double far = 0.0;
    for (const auto& sh : d.shells) far += static_cast<double>(sh.hi - sh.lo) * sh.terms;
    d.work = (static_cast<double>(d.powers.size()) + S) * (fft_cost(d.near.P) + fft_cost(d.edge.P)) +
             S * far + static_cast<double>(M);
  }
  d.work += static_cast<double>(d.terms.size()) * static_cast<double>(N) * k;
}

SeparablePathEngine::~SeparablePathEngine() = default;

std::int64_t SeparablePathEngine::N() const noexcept { return impl_->N; }
std::int64_t SeparablePathEngine::M() const noexcept { return impl_->M; }
double SeparablePathEngine::work_estimate() const noexcept { return impl_->work; }
std::size_t SeparablePathEngine::series_count() const noexcept { return impl_->series.size(); }
bool SeparablePathEngine::uses_far_field() const noexcept { return impl_->mode == Impl::Mode::far_field; }

void SeparablePathEngine::run(const InnovationSource& src, std::span<double> X) const {
  const Impl& d = *impl_;
  const std::int64_t N = d.N;
  const std::int64_t M = d.M;
  if (static_cast<std::int64_t>(X.size()) != N) fail(ErrorKind::invalid_input, "output span must hold N values");
  std::vector<std::vector<double>> W(d.series.size(), std::vector<double>(static_cast<std::size_t>(N), 0.0));

  switch (d.mode) {
    case Impl::Mode::direct: {
      std::vector<double> eps(static_cast<std::size_t>(N + M - 1));
      src.fill(1 - M, eps);
      for (std::size_t s = 0; s < d.series.size(); ++s) {
        const int p = d.series[s].p;
        std::vector<double> x(eps.size());
        for (std::size_t i = 0; i < eps.size(); ++i) x[i] = p == 1 ? eps[i] : std::pow(eps[i], p);
        const auto& h = d.lag_pow[s];
        for (std::int64_t n = 1; n <= N; ++n) {
          double acc = 0.0;
          // slot of e_{n-l} is n - l + M - 1
          for (std::int64_t l = 1; l <= M; ++l) acc += h[static_cast<std::size_t>(l)] * x[static_cast<std::size_t>(n - l + M - 1)];
          W[s][static_cast<std::size_t>(n - 1)] = acc;
        }
      }
      break;
    }
    case Impl::Mode::single_fft: {
      std::vector<double> eps(static_cast<std::size_t>(d.full.length));
      src.fill(d.full.first, eps);
      d.convolve_region(d.full, eps, false, W, [M](std::int64_t n) { return static_cast<std::size_t>(n + M - 1); });
      break;
    }
    case Impl::Mode::far_field: {
      std::vector<double> eps(static_cast<std::size_t>(d.near.length));
      src.fill(d.near.first, eps);
      const std::int64_t B = d.B;
      d.convolve_region(d.near, eps, false, W, [B](std::int64_t n) { return static_cast<std::size_t>(n + B - 1); });
      if (d.edge.length > 0) {
        std::vector<double> ee(static_cast<std::size_t>(d.edge.length));
        src.fill(d.edge.first, ee);
        d.convolve_region(d.edge, ee, true, W, [N](std::int64_t n) { return static_cast<std::size_t>(N - 1 - n); });
      }
      d.accumulate_far(src, W);
      break;
    }
  }

  for (std::int64_t n = 0; n < N; ++n) {
    double x = 0.0;
    for (const auto& t : d.terms) {
      double p = t.coef;
      for (int f : t.factors) p *= W[static_cast<std::size_t>(f)][static_cast<std::size_t>(n)];
      x += p;
    }
    X[static_cast<std::size_t>(n)] = x;
  }
}

}  // namespace chaoslab
