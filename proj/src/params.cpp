#include "lsmimo/params.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace lsmimo {

namespace {

constexpr double kPi = 3.14159265358979323846;

[[noreturn]] void fail(const std::string& what) {
  throw std::invalid_argument(what);
}

} // namespace

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

void validate(const SystemParams& sys) {
  if (!(sys.bs_density > 0.0)) fail("bs_density must be positive");
  if (!(sys.bandwidth_hz > 0.0)) fail("bandwidth_hz must be positive");
  if (!(sys.pathloss_exponent > 2.0)) {
    fail("pathloss_exponent must exceed 2 (finite aggregate interference)");
  }
  if (!(sys.reference_distance_m > 0.0)) fail("reference_distance_m must be positive");
  if (!(db_to_linear(sys.snr_gap_db) >= 1.0)) fail("snr_gap_db must be >= 0 dB");
  if (sys.users_per_cell < 1) fail("users_per_cell must be >= 1");
  if (!std::isfinite(sys.max_power_dbm) || !std::isfinite(sys.noise_psd_dbm_hz) ||
      !std::isfinite(sys.noise_figure_db)) {
    fail("power and noise figures must be finite");
  }
}

void validate(const OperatingPoint& op, const SystemParams& sys) {
  if (op.antennas < 1) fail("antennas must be >= 1");
  if (op.multiplexing < 1) fail("multiplexing must be >= 1");
  if (op.diversity < 1) fail("diversity must be >= 1");
  if (op.nulling < 0) fail("nulling must be >= 0");
  if (op.multiplexing + op.diversity + op.nulling != op.antennas + 1) {
    std::ostringstream msg;
    msg << "antenna budget violated: K + zeta + O must equal M + 1, got "
        << op.multiplexing << " + " << op.diversity << " + " << op.nulling
        << " != " << op.antennas << " + 1";
    fail(msg.str());
  }
  // K <= users_per_cell is deliberately not enforced here: it is a
  // scheduling precondition (checked where users are drawn), while the
  // analytic sum-rate engine never touches the schedule fraction and must
  // be free to scan K beyond K_b.
  (void)sys;
}

DerivedParams derive(const SystemParams& sys, const OperatingPoint& op) {
  validate(sys);
  validate(op, sys);
  DerivedParams d;
  d.noise_power_w = dbm_to_watts(sys.noise_psd_dbm_hz) * sys.bandwidth_hz *
                    db_to_linear(sys.noise_figure_db);
  d.per_user_snr = dbm_to_watts(sys.max_power_dbm) /
                   (op.multiplexing * d.noise_power_w);
  d.mean_cluster_size =
      static_cast<double>(op.nulling + op.multiplexing) / op.multiplexing;
  // lambda * pi * R_c^2 = B-bar exactly, so the mean BS count inside the
  // nulling range equals the cluster-size target.
  d.cluster_radius_m = std::sqrt(d.mean_cluster_size / (sys.bs_density * kPi));
  d.schedule_fraction =
      static_cast<double>(op.multiplexing) / sys.users_per_cell;
  return d;
}

std::vector<OperatingPoint> enumerate_operating_points(int antennas) {
  if (antennas < 1) fail("antennas must be >= 1");
  std::vector<OperatingPoint> out;
  out.reserve(static_cast<std::size_t>(antennas) * (antennas + 1) / 2);
  for (int k = 1; k <= antennas; ++k) {
    for (int o = 0; o + k <= antennas; ++o) {
      out.push_back(OperatingPoint{antennas, k, antennas - k - o + 1, o});
    }
  }
  return out;
}

} // namespace lsmimo
