#include "experiment_config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "chaoslab/analysis.hpp"
#include "chaoslab/errors.hpp"
#include "chaoslab/numerics.hpp"

namespace chaoslab::cli {

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& what) {
  fail(ErrorKind::config, "config field '" + path + "': " + what);
}

void require_object(const Json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) bad(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& [key, value] : j.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
    if (!known) bad(path.empty() ? key : path + "." + key, "unknown key");
  }
}

double as_double(const Json& v, const std::string& path) {
  if (!v.is_number()) bad(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) bad(path, "must be finite");
  return x;
}

std::int64_t as_int(const Json& v, const std::string& path, std::int64_t min) {
  if (!v.is_number_integer()) bad(path, "expected an integer");
  if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)) {
    bad(path, "integer out of range");
  }
  const auto x = v.get<std::int64_t>();
  if (x < min) bad(path, "must be >= " + std::to_string(min));
  return x;
}

double positive(const Json& v, const std::string& path) {
  const double x = as_double(v, path);
  if (!(x > 0.0)) bad(path, "must be > 0");
  return x;
}

std::vector<double> double_list(const Json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) bad(path, "expected a non-empty array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_double(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

PowerKernelSpec parse_kernel(const Json& j) {
  require_object(j, "kernel", {"order", "rows", "weights", "scale", "alpha"});
  if (!j.contains("rows")) bad("kernel.rows", "required");
  const Json& jr = j["rows"];
  if (!jr.is_array() || jr.empty()) bad("kernel.rows", "expected a non-empty array of exponent rows");
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < jr.size(); ++i) rows.push_back(double_list(jr[i], "kernel.rows[" + std::to_string(i) + "]"));
  const std::size_t k = rows.front().size();
  if (k > static_cast<std::size_t>(kMaxOrder)) bad("kernel.rows", "order above " + std::to_string(kMaxOrder));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != k) bad("kernel.rows[" + std::to_string(i) + "]", "rows must share one length");
  }
  if (j.contains("order") && as_int(j["order"], "kernel.order", 1) != static_cast<std::int64_t>(k)) {
    bad("kernel.order", "differs from the row length " + std::to_string(k));
  }
  std::vector<double> weights(rows.size(), 1.0);
  if (j.contains("weights")) {
    weights = double_list(j["weights"], "kernel.weights");
    if (weights.size() != rows.size()) bad("kernel.weights", "one weight per row required");
  }
  PowerKernelSpec spec;
  try {
    spec = PowerKernelSpec::combination(rows, weights);
  } catch (const Error& e) {
    bad("kernel", e.what());
  }
  if (j.contains("scale")) spec.scale = positive(j["scale"], "kernel.scale");
  if (j.contains("alpha")) spec.alpha = as_double(j["alpha"], "kernel.alpha");
  return spec;
}

}  // namespace

Json ExperimentConfig::to_json() const {
  Json j;
  j["kernel"] = {{"order", kernel.order},
                 {"rows", kernel.rows},
                 {"weights", kernel.weights},
                 {"scale", kernel.scale},
                 {"alpha", kernel.alpha}};
  j["perturbation"] = {{"type", perturbation}, {"strength", perturbation_strength}};
  j["regime"] = regime;
  j["n_grid"] = n_grid;
  if (tail_tolerance) {
    j["tail_tolerance"] = *tail_tolerance;
  } else if (lag_horizon && *lag_horizon == numerics::kUnbounded) {
    j["lag_horizon"] = "infinite";
  } else if (lag_horizon) {
    j["lag_horizon"] = *lag_horizon;
  }
  Json names = Json::array();
  for (const auto& s : innovations) names.push_back(std::string(s.name()));
  j["innovations"] = names;
  j["replicates"] = replicates;
  j["seed"] = seed;
  j["output_dir"] = output_dir.string();
  j["budget"] = {{"flops_per_path", flops_per_path}, {"max_kernel_entries", max_kernel_entries}};
  j["time_grid"] = time_grid;
  j["contractions"] = {{"variance_band", variance_band}, {"lag_horizon", contraction_lag_horizon}};
  j["linear"] = {{"c", linear_c}};
  j["moment_p"] = moment_p;
  return j;
}

ExperimentConfig parse_config(const Json& j) {
  require_object(j, "", {"kernel", "perturbation", "regime", "n_grid", "lag_horizon", "tail_tolerance",
                         "innovations", "replicates", "seed", "output_dir", "budget", "time_grid",
                         "contractions", "linear", "moment_p"});
  ExperimentConfig c;
  if (j.contains("kernel")) c.kernel = parse_kernel(j["kernel"]);

  if (j.contains("perturbation")) {
    const Json& p = j["perturbation"];
    require_object(p, "perturbation", {"type", "strength"});
    if (p.contains("type")) {
      if (!p["type"].is_string()) bad("perturbation.type", "expected a string");
      c.perturbation = p["type"].get<std::string>();
      if (c.perturbation != "unit" && c.perturbation != "rational") bad("perturbation.type", "must be unit or rational");
    }
    if (p.contains("strength")) c.perturbation_strength = as_double(p["strength"], "perturbation.strength");
    if (c.perturbation == "unit" && c.perturbation_strength != 0.0) {
      bad("perturbation.strength", "must be 0 for the unit perturbation");
    }
  }

  if (j.contains("regime")) {
    if (!j["regime"].is_string()) bad("regime", "expected a string");
    c.regime = j["regime"].get<std::string>();
    if (c.regime != "auto") {
      try {
        regime_from_name(c.regime, c.kernel.order, c.kernel.alpha);
      } catch (const Error&) {
        bad("regime", "must be auto, short, boundary, long_k1_boundary or long");
      }
    }
  }

  if (j.contains("n_grid")) {
    const Json& g = j["n_grid"];
    if (!g.is_array() || g.empty()) bad("n_grid", "expected a non-empty array of integers");
    c.n_grid.clear();
    for (std::size_t i = 0; i < g.size(); ++i) c.n_grid.push_back(as_int(g[i], "n_grid[" + std::to_string(i) + "]", 2));
    if (!std::is_sorted(c.n_grid.begin(), c.n_grid.end()) ||
        std::adjacent_find(c.n_grid.begin(), c.n_grid.end()) != c.n_grid.end()) {
      bad("n_grid", "must be strictly increasing");
    }
  }

  if (j.contains("lag_horizon") && j.contains("tail_tolerance")) {
    bad("lag_horizon", "give lag_horizon or tail_tolerance, not both");
  }
  if (j.contains("lag_horizon")) {
    const Json& h = j["lag_horizon"];
    if (h.is_string()) {
      if (h.get<std::string>() != "infinite") bad("lag_horizon", "expected an integer or \"infinite\"");
      c.lag_horizon = numerics::kUnbounded;
    } else {
      c.lag_horizon = as_int(h, "lag_horizon", 1);
    }
  } else {
    c.tail_tolerance = j.contains("tail_tolerance") ? positive(j["tail_tolerance"], "tail_tolerance") : 1e-3;
    if (*c.tail_tolerance >= 1.0) bad("tail_tolerance", "must be < 1");
  }

  if (j.contains("innovations")) {
    const Json& v = j["innovations"];
    if (!v.is_array() || v.empty()) bad("innovations", "expected a non-empty array of family names");
    c.innovations.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::string path = "innovations[" + std::to_string(i) + "]";
      if (!v[i].is_string()) bad(path, "expected a string");
      try {
        c.innovations.push_back(InnovationSpec::from_name(v[i].get<std::string>()));
      } catch (const Error& e) {
        bad(path, e.what());
      }
    }
  }

  if (j.contains("replicates")) c.replicates = static_cast<std::size_t>(as_int(j["replicates"], "replicates", 1));
  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer() || (!j["seed"].is_number_unsigned() && j["seed"].get<std::int64_t>() < 0)) {
      bad("seed", "expected a non-negative integer");
    }
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string() || j["output_dir"].get<std::string>().empty()) {
      bad("output_dir", "expected a non-empty string");
    }
    c.output_dir = j["output_dir"].get<std::string>();
  }

  if (j.contains("budget")) {
    const Json& b = j["budget"];
    require_object(b, "budget", {"flops_per_path", "max_kernel_entries"});
    if (b.contains("flops_per_path")) c.flops_per_path = positive(b["flops_per_path"], "budget.flops_per_path");
    if (b.contains("max_kernel_entries")) {
      c.max_kernel_entries = positive(b["max_kernel_entries"], "budget.max_kernel_entries");
    }
  }

  if (j.contains("time_grid")) {
    c.time_grid = double_list(j["time_grid"], "time_grid");
    for (double t : c.time_grid)
      if (!(t > 0.0 && t <= 1.0)) bad("time_grid", "points must lie in (0, 1]");
    if (!std::is_sorted(c.time_grid.begin(), c.time_grid.end()) ||
        std::adjacent_find(c.time_grid.begin(), c.time_grid.end()) != c.time_grid.end()) {
      bad("time_grid", "must be strictly increasing");
    }
  }

  if (j.contains("contractions")) {
    const Json& cc = j["contractions"];
    require_object(cc, "contractions", {"variance_band", "lag_horizon"});
    if (cc.contains("variance_band")) c.variance_band = positive(cc["variance_band"], "contractions.variance_band");
    if (cc.contains("lag_horizon")) {
      c.contraction_lag_horizon = as_int(cc["lag_horizon"], "contractions.lag_horizon", 1);
    }
  }

  if (j.contains("linear")) {
    const Json& l = j["linear"];
    require_object(l, "linear", {"c"});
    if (l.contains("c")) {
      c.linear_c = as_double(l["c"], "linear.c");
      if (c.linear_c == 0.0) bad("linear.c", "must be nonzero");
    }
  }

  if (j.contains("moment_p")) {
    c.moment_p = as_double(j["moment_p"], "moment_p");
    if (!(c.moment_p > 2.0 && c.moment_p < 3.0)) bad("moment_p", "must lie in (2, 3)");
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::config, "cannot open config file '" + path.string() + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    fail(ErrorKind::config, path.string() + ": " + e.what());
  }
  return parse_config(j);
}

CoefficientField make_field(const ExperimentConfig& cfg, std::int64_t horizon) {
  const Perturbation p =
      cfg.perturbation == "rational" ? Perturbation::rational(cfg.perturbation_strength) : Perturbation::unit();
  return CoefficientField(cfg.kernel, horizon, p);
}

std::int64_t resolve_horizon(const ExperimentConfig& cfg) {
  if (cfg.lag_horizon) return *cfg.lag_horizon;
  return choose_lag_horizon(cfg.kernel, *cfg.tail_tolerance);
}

MemoryRegime resolve_regime(const ExperimentConfig& cfg) {
  if (cfg.regime == "auto") return classify_regime(cfg.kernel.order, cfg.kernel.alpha);
  return regime_from_name(cfg.regime, cfg.kernel.order, cfg.kernel.alpha);
}

}  // namespace chaoslab::cli
