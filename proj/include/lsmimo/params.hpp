// System-level parameters, antenna-resource operating points, and the
// quantities derived from them (noise power, per-user SNR, cluster geometry,
// scheduling fraction).
#pragma once

#include <vector>

namespace lsmimo {

// Deployment-wide inputs. Defaults are the evaluation baseline used by the
// bundled scenarios. Units are spelled out in the field names; dB(m)
// quantities are converted only inside derive().
struct SystemParams {
  double bs_density = 1.0 / (3.14159265358979323846 * 500.0 * 500.0); // BS / m^2
  double bandwidth_hz = 20.0e6;
  double max_power_dbm = 43.0;       // total transmit power per BS
  double noise_psd_dbm_hz = -174.0;  // thermal noise density
  double noise_figure_db = 9.0;
  double snr_gap_db = 3.0;           // modulation/coding gap inside the rate log
  double pathloss_exponent = 3.76;   // must exceed 2 for finite interference
  double reference_distance_m = 0.3920;
  int users_per_cell = 15;           // candidate pool K_b per BS
};

// Per-BS antenna budget split: with M antennas serving K users at diversity
// order zeta, O = M - K - zeta + 1 dimensions are left for nulling requests.
struct OperatingPoint {
  int antennas = 0;     // M
  int multiplexing = 0; // K
  int diversity = 0;    // zeta
  int nulling = 0;      // O
};

struct DerivedParams {
  double noise_power_w;     // sigma^2 = N0 * W * noise figure (linear watts)
  double per_user_snr;      // rho = P_T / (K sigma^2)
  double mean_cluster_size; // B-bar = (O + K) / K
  double cluster_radius_m;  // R_c with lambda * pi * R_c^2 = B-bar
  double schedule_fraction; // w = K / K_b
};

double dbm_to_watts(double dbm);
double db_to_linear(double db);

// Throw std::invalid_argument on violated invariants (positivity, pathloss
// exponent > 2, snr gap >= 0 dB, K_b >= 1).
void validate(const SystemParams& sys);

// Operating-point invariants: all components >= their floor (K >= 1,
// zeta >= 1, O >= 0, M >= 1) and the budget identity K + zeta + O = M + 1.
// K <= K_b is a scheduling precondition, checked where users are drawn.
void validate(const OperatingPoint& op, const SystemParams& sys);

DerivedParams derive(const SystemParams& sys, const OperatingPoint& op);

// All valid (K, zeta, O) splits of M antennas, K ascending then O ascending;
// exactly M (M + 1) / 2 entries.
std::vector<OperatingPoint> enumerate_operating_points(int antennas);

} // namespace lsmimo
