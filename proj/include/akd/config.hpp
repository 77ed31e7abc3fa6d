#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "akd/mask.hpp"
#include "akd/sampler.hpp"
#include "akd/schedule.hpp"
#include "akd/slr.hpp"

namespace akd {

struct ScheduleConfig {
  int n_steps = 50;
  double sigma0 = 0.01;
  double sigma_n = 1.0;
  /// Unset means default_tau_n(mask.acs_lines, ky) once the grid is known.
  std::optional<double> tau_n;
  double gamma = 2.0;
};

struct SlrConfig {
  HankelConfig window;
  double rank_threshold = 0.05;
  int cg_iters = 10;
  double cg_tol = 1e-6;
};

struct RunConfig {
  ScheduleConfig schedule;
  ReconConfig sampler;
  SlrConfig slr;
  MaskParams mask;
  std::map<std::string, std::string> paths;

  DiffusionSchedule build(Index ky, Index kx) const;
};

/// Parses and validates a run configuration. Every section and key is
/// optional; unknown keys, wrong types and out-of-range values raise
/// ConfigValidation naming the offending field.
RunConfig parse_run_config(nlohmann::json const &doc);
RunConfig load_run_config(std::filesystem::path const &path);

nlohmann::ordered_json to_json(RunConfig const &cfg);

} // namespace akd
