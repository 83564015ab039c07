// Physical layer: Rayleigh fading channels keyed by (realization, user, BS),
// zero-forcing beams with interference-nulling directions, and per-user
// SINR / rate samples.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lsmimo/network.hpp"
#include "lsmimo/params.hpp"
#include "lsmimo/types.hpp"

namespace lsmimo {

// Distance-based attenuation (1 + r/d0)^(-alpha).
double pathloss(double distance_m, const SystemParams& sys);

// Deterministic channel source. Every (user, BS) pair owns an independent
// fading vector derived from channel_seed(realization_seed, user, bs), so
// lookups are idempotent and the set or order of queries cannot change any
// value; pairs are materialized on demand and never stored.
struct ChannelTable {
  const Topology* topo = nullptr;
  int antennas = 0;
  double reference_distance_m = 0.0;
  double pathloss_exponent = 0.0;
  std::uint64_t realization_seed = 0;

  double distance_m(int user, int bs) const;
  double pathloss(int user, int bs) const;
  VecXc small_scale(int user, int bs) const; // h: antennas i.i.d. CN(0,1)
  VecXc full(int user, int bs) const;        // g = sqrt(beta) h
  double magnitude(int user, int bs) const;  // ||g||
};

ChannelTable make_channel_table(const Topology& topo, const SystemParams& sys,
                                int antennas, std::uint64_t realization_seed);

enum class GrantMetric {
  full_channel, // rank nulling requests by ||g|| (includes path loss)
  small_scale,  // rank by ||h|| only
};

// Ranking callback for cluster formation, backed by `table` (which must
// outlive the returned function).
MagnitudeFn make_grant_magnitude(const ChannelTable& table, GrantMetric metric);

struct BeamformerSet {
  std::vector<MatXc> beams;            // per BS: antennas x n_scheduled, unit columns
  std::vector<int> realized_diversity; // per BS: M - (n_scheduled - 1) - grants
};

// Beams for one BS, one unit-norm column per scheduled user in schedule
// order. Each beam is the user's channel direction projected onto the null
// space of the other scheduled users' and all granted users' directions
// (rank decisions at 1e-10 relative). A rank-deficient nulling set - a
// probability-zero event under continuous fading - raises numerical_error
// so the caller can skip the realization.
MatXc zf_beams_for_bs(int bs, const Schedule& sched,
                      const ClusterAssignment& clusters,
                      const ChannelTable& table);

BeamformerSet build_beamformers(const Schedule& sched,
                                const ClusterAssignment& clusters,
                                const ChannelTable& table);

struct SinrSample {
  double signal_power = 0.0;                  // rho-scaled, noise = 1
  double intra_cluster_interference = 0.0;    // in-range BSs (denied + leakage)
  double inter_cluster_interference = 0.0;    // out-of-range BSs
  double noise_normalized = 1.0;
  double sinr = 0.0;
  double rate_bps_hz = 0.0;                   // fraction * log2(1 + sinr / gap)
};

// SINR and rate of one scheduled user against frozen beams. Powers are
// normalized by sigma^2 so noise is 1 and a beam carries rho * K / K_c with
// K_c the serving cell's realized beam count (equal split of P_T).
SinrSample sinr_and_rate(int user, const Topology& topo, const Schedule& sched,
                         const ClusterAssignment& clusters,
                         const BeamformerSet& bf, const ChannelTable& table,
                         const SystemParams& sys, const DerivedParams& derived);

} // namespace lsmimo
