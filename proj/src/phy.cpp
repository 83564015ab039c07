// Fading channels, zero-forcing beams, and SINR assembly.
#include "lsmimo/phy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "lsmimo/errors.hpp"
#include "lsmimo/rng.hpp"

namespace lsmimo {

double pathloss(double distance_m, const SystemParams& sys) {
  if (!(distance_m >= 0.0)) {
    throw std::invalid_argument("pathloss distance must be non-negative");
  }
  return std::pow(1.0 + distance_m / sys.reference_distance_m,
                  -sys.pathloss_exponent);
}

double ChannelTable::distance_m(int user, int bs) const {
  return (topo->user_positions.col(user) - topo->bs_positions.col(bs)).norm();
}

double ChannelTable::pathloss(int user, int bs) const {
  return std::pow(1.0 + distance_m(user, bs) / reference_distance_m,
                  -pathloss_exponent);
}

VecXc ChannelTable::small_scale(int user, int bs) const {
  Rng rng(channel_seed(realization_seed, static_cast<std::uint64_t>(user),
                       static_cast<std::uint64_t>(bs)));
  VecXc h(antennas);
  for (int m = 0; m < antennas; ++m) h(m) = rng.complex_gaussian();
  return h;
}

VecXc ChannelTable::full(int user, int bs) const {
  return std::sqrt(pathloss(user, bs)) * small_scale(user, bs);
}

double ChannelTable::magnitude(int user, int bs) const {
  return std::sqrt(pathloss(user, bs)) * small_scale(user, bs).norm();
}

ChannelTable make_channel_table(const Topology& topo, const SystemParams& sys,
                                int antennas, std::uint64_t realization_seed) {
  if (antennas < 1) throw std::invalid_argument("antennas must be at least 1");
  ChannelTable table;
  table.topo = &topo;
  table.antennas = antennas;
  table.reference_distance_m = sys.reference_distance_m;
  table.pathloss_exponent = sys.pathloss_exponent;
  table.realization_seed = realization_seed;
  return table;
}

MagnitudeFn make_grant_magnitude(const ChannelTable& table, GrantMetric metric) {
  const ChannelTable* t = &table;
  if (metric == GrantMetric::small_scale) {
    return [t](int user, int bs) { return t->small_scale(user, bs).norm(); };
  }
  return [t](int user, int bs) { return t->magnitude(user, bs); };
}

MatXc zf_beams_for_bs(int bs, const Schedule& sched,
                      const ClusterAssignment& clusters,
                      const ChannelTable& table) {
  const std::vector<int>& sel = sched.scheduled[bs];
  const std::vector<int>& granted = clusters.bs_granted_users[bs];
  const int n = static_cast<int>(sel.size());
  const int g = static_cast<int>(granted.size());
  const int M = table.antennas;

  // Directions to serve and to null; path loss scales norms only, so the
  // unit small-scale vectors carry all the geometry the projection needs.
  MatXc dirs(M, n + g);
  for (int j = 0; j < n; ++j) dirs.col(j) = table.small_scale(sel[j], bs).normalized();
  for (int j = 0; j < g; ++j) dirs.col(n + j) = table.small_scale(granted[j], bs).normalized();

  MatXc beams(M, n);
  MatXc stacked(M, n - 1 + g);
  for (int i = 0; i < n; ++i) {
    if (stacked.cols() == 0) {
      beams.col(i) = dirs.col(i); // matched filter: nothing to null
      continue;
    }
    int col = 0;
    for (int j = 0; j < n; ++j) {
      if (j != i) stacked.col(col++) = dirs.col(j);
    }
    for (int j = 0; j < g; ++j) stacked.col(col++) = dirs.col(n + j);

    Eigen::ColPivHouseholderQR<MatXc> qr(stacked);
    qr.setThreshold(1e-10);
    if (qr.rank() < stacked.cols()) {
      throw numerical_error("rank-deficient nulling set at BS " +
                            std::to_string(bs) + " (" +
                            std::to_string(stacked.cols()) +
                            " directions, rank " + std::to_string(qr.rank()) +
                            ")");
    }
    const MatXc q = qr.householderQ() * MatXc::Identity(M, stacked.cols());
    VecXc w = dirs.col(i) - q * (q.adjoint() * dirs.col(i));
    const double norm = w.norm();
    if (!(norm > 1e-10)) {
      throw numerical_error("beam collapsed during nulling at BS " +
                            std::to_string(bs));
    }
    beams.col(i) = w / norm;
  }
  return beams;
}

BeamformerSet build_beamformers(const Schedule& sched,
                                const ClusterAssignment& clusters,
                                const ChannelTable& table) {
  const int n_bs = static_cast<int>(sched.scheduled.size());
  BeamformerSet bf;
  bf.beams.reserve(n_bs);
  bf.realized_diversity.reserve(n_bs);
  for (int b = 0; b < n_bs; ++b) {
    bf.beams.push_back(zf_beams_for_bs(b, sched, clusters, table));
    const int used = static_cast<int>(sched.scheduled[b].size()) - 1 +
                     static_cast<int>(clusters.bs_granted_users[b].size());
    bf.realized_diversity.push_back(table.antennas - used);
  }
  return bf;
}

SinrSample sinr_and_rate(int user, const Topology& topo, const Schedule& sched,
                         const ClusterAssignment& clusters,
                         const BeamformerSet& bf, const ChannelTable& table,
                         const SystemParams& sys, const DerivedParams& derived) {
  const int serving = topo.association[user];
  const std::vector<int>& sel = sched.scheduled[serving];
  int own_col = -1;
  for (int j = 0; j < static_cast<int>(sel.size()); ++j) {
    if (sel[j] == user) {
      own_col = j;
      break;
    }
  }
  if (own_col < 0) {
    throw std::invalid_argument("SINR requested for an unscheduled user");
  }

  const double rho = derived.per_user_snr;
  const double design_k = static_cast<double>(sched.multiplexing);

  SinrSample out;
  // Per-beam coefficient at BS c: (P_T / K_c) / sigma^2 = rho * K / K_c with
  // equal power split over the realized beam count.
  const auto beam_coef = [&](int c) {
    return rho * design_k / static_cast<double>(sched.scheduled[c].size());
  };

  // One pass in BS-index order. The SINR denominator accumulates in that
  // fixed order so the result does not depend on how BSs are split between
  // the in-cluster and out-of-cluster buckets (the split differs between
  // clustering modes even when the physical layout is identical, e.g. O=0).
  const std::vector<int>& cluster = clusters.user_cluster[user];
  double total_interference = 0.0;
  for (int c = 0; c < topo.bs_count(); ++c) {
    if (sched.scheduled[c].empty()) continue;
    if (c == serving) {
      const VecXc h = table.small_scale(user, c);
      const double beta = table.pathloss(user, c);
      out.signal_power =
          beam_coef(c) * beta * std::norm(h.dot(bf.beams[c].col(own_col)));
      // Co-scheduled beams are nulled toward this user; keep their residual
      // leakage in the in-cluster bucket so power is fully accounted for.
      double leak = 0.0;
      for (int j = 0; j < bf.beams[c].cols(); ++j) {
        if (j == own_col) continue;
        leak += std::norm(h.dot(bf.beams[c].col(j)));
      }
      const double p = beam_coef(c) * beta * leak;
      out.intra_cluster_interference += p;
      total_interference += p;
      continue;
    }
    const VecXc h = table.small_scale(user, c);
    const double beta = table.pathloss(user, c);
    double gain = 0.0;
    for (int j = 0; j < bf.beams[c].cols(); ++j) {
      gain += std::norm(h.dot(bf.beams[c].col(j)));
    }
    const double p = beam_coef(c) * beta * gain;
    // In-range BSs: denied ones interfere at full strength, granted ones
    // only through finite-precision leakage.
    if (std::binary_search(cluster.begin(), cluster.end(), c)) {
      out.intra_cluster_interference += p;
    } else {
      out.inter_cluster_interference += p;
    }
    total_interference += p;
  }

  out.sinr = out.signal_power / (total_interference + out.noise_normalized);
  const double gap = db_to_linear(sys.snr_gap_db);
  out.rate_bps_hz =
      sched.fraction[serving] * std::log2(1.0 + out.sinr / gap);
  return out;
}

} // namespace lsmimo
