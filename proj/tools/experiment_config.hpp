#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "chaoslab/innovations.hpp"
#include "chaoslab/kernels.hpp"

namespace chaoslab::cli {

using Json = nlohmann::ordered_json;

struct ExperimentConfig {
  PowerKernelSpec kernel = PowerKernelSpec::product({-0.75, -0.75});
  std::string perturbation = "unit";  // unit | rational
  double perturbation_strength = 0.0;
  std::string regime = "auto";
  std::vector<std::int64_t> n_grid{256, 512, 1024, 2048, 4096};
  // Exactly one of the two is set after resolution; lag_horizon may be kUnbounded.
  std::optional<std::int64_t> lag_horizon;
  std::optional<double> tail_tolerance;
  std::vector<InnovationSpec> innovations = InnovationSpec::all();
  std::size_t replicates = 2000;
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = "out";
  double flops_per_path = 1e10;
  double max_kernel_entries = 5e7;
  std::vector<double> time_grid{1.0};
  double variance_band = 0.15;
  std::int64_t contraction_lag_horizon = 256;
  double linear_c = 1.0;
  double moment_p = 2.5;

  // Every field, defaults included; parsing this reproduces the config.
  Json to_json() const;
};

// Throws Error(config) naming the offending field; unknown keys are errors.
ExperimentConfig parse_config(const Json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

CoefficientField make_field(const ExperimentConfig& cfg, std::int64_t horizon);
// M from lag_horizon or tail_tolerance.
std::int64_t resolve_horizon(const ExperimentConfig& cfg);
MemoryRegime resolve_regime(const ExperimentConfig& cfg);

}  // namespace chaoslab::cli
