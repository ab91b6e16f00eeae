#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "lagmcf/flow.hpp"
#include "lagmcf/grid.hpp"
#include "lagmcf/initdata.hpp"

namespace lagmcf::cli {

struct GridConfig {
  int ndim = 2;
  // a single entry is broadcast to every axis
  std::vector<std::size_t> npts{64};
  std::vector<double> extent;  // empty: 2 pi
  std::vector<double> origin{0.0};
};

struct OutputConfig {
  std::string field;
  std::string diagnostics;
  /// If set, the full field is also written as <prefix>_<index>.lgf at
  /// every control.sample_times entry and at t_end.
  std::string snapshot_prefix;
};

struct RunConfig {
  GridConfig grid;
  Preset preset;
  std::optional<double> mollify_tau;
  StepControl control;
  /// nullopt means "auto": the pinching threshold of the initial data.
  std::optional<double> eps_pinch = 0.0;
  double delta = 0.1;
  OutputConfig output;
};

/// Parses a JSON document; unknown keys and wrong types raise
/// ValidationError naming the field.
RunConfig parse_run_config(const std::string& json_text);

/// Reads and parses a config file. IoError if unreadable.
RunConfig load_run_config(const std::string& path);

/// Field-level checks that do not need the grid built.
void validate(const RunConfig& cfg);

GridSpec build_grid(const GridConfig& g);

}  // namespace lagmcf::cli
