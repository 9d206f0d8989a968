#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "hdp/cost_volume.hpp"
#include "hdp/pipeline.hpp"
#include "hdp/spanning_forest.hpp"

namespace hdp::cli {

/// Everything that shapes a run. Resolution order: built-in defaults, then a
/// `--config` INI file, then command-line flags.
struct RunConfig {
  int factor = 2;
  int levels = 3;
  SizeClass size_class = SizeClass::Half;
  std::optional<double> delta0;  // unset: size-class preset
  std::optional<double> beta;    // unset: size-class preset
  double gamma = 0.1;
  CostParams cost;
  TreeKind tree = TreeKind::Mst;
  std::uint64_t seed = 0;
  bool hdp = true;
  bool median_prefilter = false;
  std::string model_path;  // empty: built-in model
  std::string out_dir;

  double effective_delta0() const { return delta0.value_or(size_preset(size_class).delta0); }
  double effective_beta() const { return beta.value_or(size_preset(size_class).beta); }

  /// Throws ConfigError for S < 2, L < 0, delta_0 outside (0,1), beta outside
  /// (0,1], gamma <= 0 or invalid cost constants.
  void validate() const;
  MatchParams match_params() const;
  nlohmann::json to_json() const;
};

/// Applies an INI file on top of `config`. Sections and keys:
///   [pyramid] S, L          [hdp] enabled, size_class, delta0, beta, model
///   [aggregation] gamma     [cost] alpha, tau_color, tau_grad
///   [forest] method, seed, median_prefilter
/// Unknown sections or keys are rejected.
void apply_config_file(RunConfig& config, const std::filesystem::path& path);

}  // namespace hdp::cli
