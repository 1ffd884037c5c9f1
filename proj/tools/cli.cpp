#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "chaoslab/analysis.hpp"
#include "chaoslab/errors.hpp"
#include "chaoslab/forms.hpp"
#include "chaoslab/io.hpp"
#include "chaoslab/montecarlo.hpp"
#include "chaoslab/numerics.hpp"
#include "chaoslab/process.hpp"
#include "experiment_config.hpp"

namespace chaoslab::cli {

namespace {

struct Context {
  ExperimentConfig cfg;
  unsigned threads = 1;
  std::ostream& out;
  std::ostream& log;

  std::filesystem::path file(const std::string& name) const { return cfg.output_dir / name; }

  void emit_json(const std::string& name, const Json& j) const {
    const std::string text = j.dump(2) + "\n";
    io::write_text(file(name), text);
    out << text;
  }
  void emit_csv(const std::string& name, const io::CsvTable& t) const {
    t.write(file(name));
    out << t.str();
  }
};

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

// ------------------------------------------------------------- classify

int cmd_classify(const Context& ctx) {
  const PowerKernelSpec& g = ctx.cfg.kernel;
  Json j;
  j["order"] = g.order;
  j["alpha"] = g.alpha;
  bool in_model = true;
  try {
    const MemoryRegime r = resolve_regime(ctx.cfg);
    j["regime"] = std::string(r.name());
    j["regime_source"] = ctx.cfg.regime == "auto" ? "classified" : "override";
    j["hurst"] = r.hurst();
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::out_of_model) throw;
    in_model = false;
    j["regime"] = "out_of_model";
    j["regime_source"] = "classified";
    j["hurst"] = nullptr;
  }
  const ExponentReport rep = validate_exponents(g.rows, g.alpha);
  const bool valid = rep.valid && in_model;
  j["valid"] = valid;
  Json rows = Json::array();
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const RowValidation& v = rep.rows[i];
    rows.push_back({{"exponents", g.rows[i]},
                    {"exponents_in_range", v.exponents_in_range},
                    {"sums_to_alpha", v.sums_to_alpha},
                    {"partial_sums_checked", v.partial_sums_checked},
                    {"partial_sums_ok", v.partial_sums_ok},
                    {"partial_sums", v.partial_sums}});
  }
  j["rows"] = rows;
  Json problems = rep.problems;
  if (!in_model) problems.push_back("alpha >= -k/2: kernel is not square-summable");
  j["problems"] = problems;
  ctx.emit_json("classify.json", j);
  return valid ? kSuccess : kConfigError;
}

// ------------------------------------------------------------- variance

int cmd_variance(const Context& ctx) {
  const std::int64_t M = resolve_horizon(ctx.cfg);
  ctx.log << "[variance] M=" << (M == numerics::kUnbounded ? std::string("infinite") : std::to_string(M)) << "\n";
  const CoefficientField field = make_field(ctx.cfg, M);
  const VarianceTable t = variance_ratio_table(field, ctx.cfg.n_grid, {ctx.threads});
  ctx.emit_csv("variance.csv", t.to_csv());
  return kSuccess;
}

// ---------------------------------------------------------- contractions

int cmd_contractions(const Context& ctx) {
  const ExperimentConfig& c = ctx.cfg;
  const MemoryRegime regime = resolve_regime(c);
  if (regime.kind != Regime::boundary) {
    fail(ErrorKind::config, "contractions: the limit variance is defined for the boundary regime only");
  }
  const std::int64_t M = c.contraction_lag_horizon;
  const CoefficientField field = make_field(c, M);
  const double target = 2.0 * factorial(c.kernel.order) * c_g_separable(c.kernel);
  std::vector<CltCriterionRow> rows;
  for (std::int64_t N : c.n_grid) {
    const double A = normalization_factor(regime, static_cast<double>(N));
    const SymmetricKernel f = partial_sum_kernel(field, N, A, {c.max_kernel_entries});
    rows.push_back(clt_criterion_row(N, f, {ctx.threads}));
    ctx.log << "[contractions] N=" << N << " entries=" << f.size() << "\n";
  }
  const CltCriterionReport rep = clt_criterion_report(rows, c.kernel.order, target, {c.variance_band, ctx.threads});
  rep.to_csv().write(ctx.file("contractions.csv"));
  Json j;
  j["order"] = rep.order;
  j["lag_horizon"] = M;
  j["target_variance"] = rep.target_variance;
  j["variance_band"] = rep.variance_band;
  j["last_inner_product"] = rep.rows.back().inner_product;
  Json decay = Json::array();
  for (std::size_t r = 0; r + 1 < static_cast<std::size_t>(rep.order); ++r) {
    decay.push_back({{"r", r + 1},
                     {"first", rep.rows.front().contraction_norms[r]},
                     {"last", rep.rows.back().contraction_norms[r]},
                     {"ratio_last_to_first",
                      rep.rows.back().contraction_norms[r] / rep.rows.front().contraction_norms[r]}});
  }
  j["contraction_decay"] = decay;
  j["variance_ok"] = rep.variance_ok;
  j["decay_ok"] = rep.decay_ok;
  j["pass"] = rep.pass;
  ctx.emit_json("contractions.json", j);
  return rep.pass ? kSuccess : kCheckFailed;
}

// --------------------------------------------------- clt / universality

Json normality_json(const NormalityReport& r) {
  return {{"ks", r.ks},
          {"ks_critical", r.ks_critical},
          {"skewness", r.skewness},
          {"excess_kurtosis", r.excess_kurtosis},
          {"variance", r.variance},
          {"stderr", r.variance_stderr},
          {"target_sigma", r.target_sigma},
          {"R", r.R},
          {"pass", r.pass}};
}

struct EndpointRun {
  std::int64_t N = 0;
  std::int64_t M = 0;
  double sigma = 0.0;  // sqrt(exact finite-N variance) / A(N)
  double rescale = 1.0;  // field normalization over the chosen regime's
  const CoefficientField* field = nullptr;
  std::vector<std::pair<std::string, PartialSumSample>> samples;
};

// Samples every innovation family at every N; `each` sees one finished N.
void sample_endpoints(const Context& ctx, const std::string& tag, const std::function<void(const EndpointRun&)>& each) {
  const ExperimentConfig& c = ctx.cfg;
  const std::int64_t M = resolve_horizon(c);
  if (M == numerics::kUnbounded) fail(ErrorKind::config, tag + ": simulation needs a finite lag_horizon or a tail_tolerance");
  const CoefficientField field = make_field(c, M);
  const MemoryRegime regime = resolve_regime(c);
  ReplicateOptions opt;
  opt.threads = ctx.threads;
  opt.budget.max_operations = c.flops_per_path;
  for (std::int64_t N : c.n_grid) {
    EndpointRun run;
    run.N = N;
    run.M = M;
    // Samples come out under the field's own normalization; rescale to the chosen regime.
    run.field = &field;
    run.rescale = normalization_factor(regime_of(field), static_cast<double>(N)) /
                  normalization_factor(regime, static_cast<double>(N));
    const double var = exact_variance(field, N, {ctx.threads});
    run.sigma = std::sqrt(var) / normalization_factor(regime, static_cast<double>(N));
    PathConfig pc;
    pc.N = N;
    pc.M = M;
    pc.grid = c.time_grid;
    pc.seed = c.seed;
    for (const InnovationSpec& spec : c.innovations) {
      PartialSumSample s = replicate_partial_sums(field, pc, stream_factory(spec), c.replicates, c.seed, opt);
      for (double& v : s.values) v *= run.rescale;
      for (double& v : s.endpoints) v *= run.rescale;
      ctx.log << "[" << tag << "] N=" << N << " M=" << M << " family=" << spec.name() << " R=" << c.replicates
              << "\n";
      run.samples.emplace_back(std::string(spec.name()), std::move(s));
    }
    each(run);
  }
}

int cmd_clt(const Context& ctx) {
  const ExperimentConfig& c = ctx.cfg;
  Json reports = Json::array();
  bool pass = true;
  std::vector<std::vector<std::pair<std::int64_t, std::vector<double>>>> per_family(c.innovations.size());
  Json fdd = Json::array();
  sample_endpoints(ctx, "clt", [&](const EndpointRun& run) {
    for (std::size_t f = 0; f < run.samples.size(); ++f) {
      const auto& [name, s] = run.samples[f];
      const NormalityReport rep = normality_report(s.endpoints, run.sigma);
      pass = pass && rep.pass;
      Json j = {{"N", run.N}, {"M", run.M}, {"family", name}};
      j.update(normality_json(rep));
      reports.push_back(j);
      endpoint_csv(s.endpoints).write(ctx.file("endpoints_N" + std::to_string(run.N) + "_" + name + ".csv"));
      per_family[f].emplace_back(run.N, s.endpoints);
      if (s.grid.size() >= 2 && run.rescale == 1.0) {
        const FddReport fr = fdd_covariance_report(*run.field, run.N, s, ctx.threads);
        Json pairs = Json::array();
        for (const FddPair& p : fr.pairs) {
          pairs.push_back({{"s", p.s}, {"t", p.t}, {"empirical", p.empirical}, {"stderr", p.stderr_},
                           {"exact", p.exact}, {"asymptotic", p.asymptotic}, {"z_exact", p.z_exact},
                           {"z_asymptotic", p.z_asymptotic}, {"increment_cov", p.increment_cov},
                           {"z_increment", p.z_increment}});
        }
        fdd.push_back({{"N", run.N}, {"family", name}, {"pairs", pairs}, {"pass", fr.pass}});
      }
      ctx.log << "[clt] N=" << run.N << " family=" << name << " ks=" << rep.ks << " pass=" << rep.pass << "\n";
    }
  });
  Json j;
  j["reports"] = reports;
  if (!fdd.empty()) j["covariance"] = fdd;
  if (c.n_grid.size() >= 2) {
    Json mr = Json::array();
    for (std::size_t f = 0; f < c.innovations.size(); ++f) {
      const MomentRatioTable t = moment_ratio_diagnostic(per_family[f], c.moment_p);
      Json rows = Json::array();
      for (const auto& r : t.rows) rows.push_back({{"N", r.N}, {"ratio", r.ratio}});
      mr.push_back({{"family", std::string(c.innovations[f].name())},
                    {"p", t.p},
                    {"normal_value", normal_moment_ratio(t.p)},
                    {"rows", rows},
                    {"spread", t.spread},
                    {"bounded", t.pass}});
    }
    j["moment_ratio"] = mr;
  }
  j["pass"] = pass;
  ctx.emit_json("clt.json", j);
  return pass ? kSuccess : kCheckFailed;
}

int cmd_universality(const Context& ctx) {
  if (ctx.cfg.innovations.size() < 2) fail(ErrorKind::config, "universality: needs at least 2 innovation families");
  Json results = Json::array();
  bool pass = true;
  sample_endpoints(ctx, "universality", [&](const EndpointRun& run) {
    std::vector<std::pair<std::string, std::vector<double>>> samples;
    for (const auto& [name, s] : run.samples) samples.emplace_back(name, s.endpoints);
    const UniversalityReport rep = universality_compare(samples, run.sigma);
    pass = pass && rep.pass;
    Json fam = Json::array();
    for (const auto& [name, r] : rep.samples) {
      Json e = {{"family", name}};
      e.update(normality_json(r));
      fam.push_back(e);
    }
    Json pairs = Json::array();
    for (const PairwiseKs& p : rep.pairs) {
      pairs.push_back({{"a", p.a}, {"b", p.b}, {"ks", p.ks}, {"critical", p.critical}, {"pass", p.pass}});
    }
    results.push_back({{"N", run.N}, {"M", run.M}, {"samples", fam}, {"pairs", pairs}, {"pass", rep.pass}});
    ctx.log << "[universality] N=" << run.N << " pass=" << rep.pass << "\n";
  });
  Json j;
  j["results"] = results;
  j["pass"] = pass;
  ctx.emit_json("universality.json", j);
  return pass ? kSuccess : kCheckFailed;
}

// --------------------------------------------------------------- linear

int cmd_linear(const Context& ctx) {
  const LinearCaseTable t = linear_case_table(ctx.cfg.linear_c, ctx.cfg.n_grid, {ctx.threads});
  ctx.emit_csv("linear.csv", t.to_csv());
  return kSuccess;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& log) {
  CLI::App app{"Discrete chaos processes at the boundary memory regime"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> budget;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  app.add_option("--config", config_path, "Experiment config (JSON)")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "Output directory (overrides output_dir)");
  app.add_option("--seed", seed, "Base seed (overrides seed)");
  app.add_option("--threads", threads, "Worker threads; outputs do not depend on it")->check(CLI::Range(1u, 4096u));
  app.add_option("--budget", budget, "Multiply-adds allowed per simulated path")->check(CLI::PositiveNumber);

  using Command = std::function<int(const Context&)>;
  const std::vector<std::tuple<std::string, std::string, Command>> commands = {
      {"classify", "Memory regime and exponent validation", cmd_classify},
      {"variance", "Exact variance against 2 C_g N ln N", cmd_variance},
      {"contractions", "Inner products and contraction norms of f_N", cmd_contractions},
      {"clt", "Endpoint normality per N and innovation family", cmd_clt},
      {"universality", "Pairwise two-sample KS across innovation families", cmd_universality},
      {"linear", "Linear case a(n) = c/n", cmd_linear},
  };
  for (const auto& [name, help, fn] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, log);
    return code == 0 ? kSuccess : kConfigError;
  }

  try {
    ExperimentConfig cfg = config_path.empty() ? parse_config(Json::object()) : load_config(config_path);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (seed) cfg.seed = *seed;
    if (budget) cfg.flops_per_path = *budget;

    std::error_code ec;
    std::filesystem::create_directories(cfg.output_dir, ec);
    if (ec) fail(ErrorKind::config, "cannot create output directory '" + cfg.output_dir.string() + "': " + ec.message());
    io::write_text(cfg.output_dir / "resolved_config.json", cfg.to_json().dump(2) + "\n");

    const Context ctx{cfg, threads, out, log};
    for (const auto& [name, help, fn] : commands) {
      if (app.got_subcommand(name)) return fn(ctx);
    }
    return kInternalError;
  } catch (const ResourceError& e) {
    log << "error (resource): " << e.what() << "\n";
    return kBudgetExceeded;
  } catch (const Error& e) {
    log << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return e.kind() == ErrorKind::resource ? kBudgetExceeded : kConfigError;
  } catch (const std::exception& e) {
    log << "internal error: " << e.what() << "\n";
    return kInternalError;
  }
}

}  // namespace chaoslab::cli
