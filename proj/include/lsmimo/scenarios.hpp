// Bundled study presets: each named scenario materializes a complete
// configuration (baseline parameter set plus the study-specific operating
// points), runs the analytic and/or Monte Carlo engines, and writes the
// documented CSV outputs plus a commented preset config recording every
// choice the preset makes beyond the baseline.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "lsmimo/analytic.hpp"

namespace lsmimo {

struct ScenarioOptions {
  std::uint64_t seed = 1;
  int workers = 1;
  std::string output_dir = ".";
  // 0 keeps each preset's own default (recorded in its preset file);
  // anything else overrides the realization count of every run.
  int realizations = 0;
  // table2 only: antenna budget M; 0 keeps the preset default of 15.
  int antennas = 0;
};

// Names of the bundled presets, in documentation order.
const std::vector<std::string>& scenario_names();

// Run one preset end to end. CSVs and preset configs land in
// options.output_dir (created if missing); progress and summary lines go to
// `log`. Returns the files written, relative to the output directory.
// Unknown names throw std::invalid_argument listing the available set.
std::vector<std::string> run_scenario(const std::string& name,
                                      const ScenarioOptions& options,
                                      std::ostream& log);

// Shared CSV emission, 9 significant digits.
// Analytic CCDF curve: rate_bps_hz,ccdf_upper.
void write_bound_csv(std::ostream& out, const RateCcdfCurve& curve);
// Analytic sum-rate grid: K,zeta,O,sum_rate_bps_hz.
void write_analytic_grid_csv(std::ostream& out,
                             const std::vector<ArgmaxResult>& rows);

} // namespace lsmimo
