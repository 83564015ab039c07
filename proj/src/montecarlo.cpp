// Monte Carlo engine: realization pipelines, statistics, sweeps, CSV output.
#include "lsmimo/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "lsmimo/errors.hpp"
#include "lsmimo/phy.hpp"
#include "lsmimo/rng.hpp"
#include "lsmimo/specfun.hpp"

namespace lsmimo {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDefaultMeasurementHalfWidthM = 2500.0;
// Sub-seed tag for the probe-point stream of analytic-model realizations,
// alongside the topology and schedule tags in network.cpp.
constexpr std::uint64_t kProbeTag = 0x50524Full;

bool log_enabled() {
  const char* env = std::getenv("LSMIMO_LOG");
  return env != nullptr && env[0] != '\0';
}

// Everything one realization contributes; slots are merged in realization
// order after the workers finish, so the result is independent of scheduling.
struct RealizationOutcome {
  std::vector<double> weighted;   // w-scaled rate per measured user
  double unweighted_sum = 0.0;    // plain log2(1 + sinr/gap) accumulator
  long long unweighted_count = 0;
  bool skipped = false;
  std::string skip_reason;
};

RealizationOutcome simulate_physical(const SimulationPlan& plan,
                                     const SystemParams& params,
                                     const OperatingPoint& op,
                                     const ResolvedGeometry& geom,
                                     const DerivedParams& derived,
                                     std::uint64_t r_seed) {
  RealizationOutcome out;

  Rng topo_rng(topology_seed(r_seed));
  const Topology topo =
      sample_topology(params, geom.window_half_width_m,
                      geom.measurement_half_width_m, plan.user_model, topo_rng);

  Rng sched_rng(schedule_seed(r_seed));
  const Schedule sched = schedule_users(topo, op.multiplexing,
                                        params.users_per_cell, plan.user_model,
                                        sched_rng);

  const ChannelTable table =
      make_channel_table(topo, params, op.antennas, r_seed);
  const MagnitudeFn magnitude =
      make_grant_magnitude(table, GrantMetric::full_channel);
  const ClusterAssignment clusters =
      plan.clustering_mode == ClusteringMode::fixed_range
          ? assign_clusters_fixed(topo, sched, op, derived, magnitude)
          : assign_clusters_adaptive(topo, sched, op, derived, magnitude);

  BeamformerSet beams;
  try {
    beams = build_beamformers(sched, clusters, table);
  } catch (const numerical_error& err) {
    out.skipped = true;
    out.skip_reason = err.what();
    return out;
  }

  for (int b = 0; b < topo.bs_count(); ++b) {
    for (int user : sched.scheduled[b]) {
      if (!topo.in_measurement_region(user)) continue;
      const SinrSample s = sinr_and_rate(user, topo, sched, clusters, beams,
                                         table, params, derived);
      out.weighted.push_back(s.rate_bps_hz);
      // fraction > 0 whenever the cell scheduled anyone.
      out.unweighted_sum += s.rate_bps_hz / sched.fraction[b];
      ++out.unweighted_count;
    }
  }
  if (out.unweighted_count == 0) {
    out.skipped = true;
    out.skip_reason = "no scheduled users inside the measurement region";
  }
  return out;
}

RealizationOutcome simulate_analytic_model(const SimulationPlan& plan,
                                           const SystemParams& params,
                                           const OperatingPoint& op,
                                           const ResolvedGeometry& geom,
                                           const DerivedParams& derived,
                                           std::uint64_t r_seed) {
  RealizationOutcome out;

  Rng topo_rng(topology_seed(r_seed));
  const Points bs =
      sample_bs_positions(params, geom.window_half_width_m, topo_rng);

  Rng probe_rng(mix_seed(r_seed, kProbeTag));
  const double rho = derived.per_user_snr;
  const double gap = db_to_linear(params.snr_gap_db);
  const double w = derived.schedule_fraction;
  const double nu = adaptive_range_factor(op);
  const double half = geom.measurement_half_width_m;

  for (int p = 0; p < plan.probes_per_realization; ++p) {
    const double x = probe_rng.uniform(-half, half);
    const double y = probe_rng.uniform(-half, half);
    double serving_dist = 0.0;
    const int serving = nearest_bs(bs, x, y, serving_dist);
    const double radius = plan.clustering_mode == ClusteringMode::fixed_range
                              ? derived.cluster_radius_m
                              : nu * serving_dist;

    // Every in-range interferer is nulled perfectly; each out-of-range BS
    // radiates K unit-power beams, an aggregate Gamma(K, 1) fading power.
    const double signal = rho * pathloss(serving_dist, params) *
                          sample_gamma(op.diversity, probe_rng);
    double interference = 0.0;
    for (int j = 0; j < static_cast<int>(bs.cols()); ++j) {
      if (j == serving) continue;
      const double dx = bs(0, j) - x;
      const double dy = bs(1, j) - y;
      const double dist = std::sqrt(dx * dx + dy * dy);
      if (dist <= radius) continue;
      interference += rho * pathloss(dist, params) *
                      sample_gamma(op.multiplexing, probe_rng);
    }

    const double sinr = signal / (interference + 1.0);
    const double unweighted = std::log2(1.0 + sinr / gap);
    out.weighted.push_back(w * unweighted);
    out.unweighted_sum += unweighted;
    ++out.unweighted_count;
  }
  return out;
}

void validate_plan(const SimulationPlan& plan, const SystemParams& params) {
  validate(params);
  if (plan.realizations < 1) {
    throw std::invalid_argument("simulation needs at least one realization");
  }
  if (plan.workers < 1) {
    throw std::invalid_argument("worker count must be positive");
  }
  if (plan.operating_points.empty()) {
    throw std::invalid_argument("simulation plan has no operating points");
  }
  if (plan.analytic_model_mode && plan.probes_per_realization < 1) {
    throw std::invalid_argument("analytic-model mode needs at least one probe");
  }
  for (const OperatingPoint& op : plan.operating_points) {
    validate(op, params);
  }
}

RateStats collect_stats(const SimulationPlan& plan, const OperatingPoint& op,
                        std::vector<RealizationOutcome>& slots) {
  const bool logging = log_enabled();
  RateStats stats;
  std::vector<double> per_realization_sum_rate;
  for (int r = 0; r < static_cast<int>(slots.size()); ++r) {
    RealizationOutcome& slot = slots[r];
    if (slot.skipped) {
      ++stats.realizations_skipped;
      if (logging) {
        std::fprintf(stderr, "[lsmimo] seed %llu realization %d skipped: %s\n",
                     static_cast<unsigned long long>(plan.master_seed), r,
                     slot.skip_reason.c_str());
      }
      continue;
    }
    ++stats.realizations_used;
    per_realization_sum_rate.push_back(
        op.multiplexing * slot.unweighted_sum /
        static_cast<double>(slot.unweighted_count));
    stats.rate_samples.insert(stats.rate_samples.end(), slot.weighted.begin(),
                              slot.weighted.end());
    stats.per_realization.push_back(std::move(slot.weighted));
  }

  // Degenerate realizations must stay rare or the statistics are biased.
  if (stats.realizations_skipped * 100 > plan.realizations) {
    throw numerical_error(
        "more than 1% of realizations were skipped (" +
        std::to_string(stats.realizations_skipped) + " of " +
        std::to_string(plan.realizations) + ")");
  }

  std::sort(stats.rate_samples.begin(), stats.rate_samples.end());
  stats.sample_count = static_cast<long long>(stats.rate_samples.size());

  const int used = stats.realizations_used;
  double mean = 0.0;
  for (double v : per_realization_sum_rate) mean += v;
  mean /= used;
  double var = 0.0;
  for (double v : per_realization_sum_rate) var += (v - mean) * (v - mean);
  stats.per_bs_sum_rate_mean = mean;
  stats.per_bs_sum_rate_ci =
      used > 1 ? 1.96 * std::sqrt(var / (used - 1) / used) : 0.0;
  return stats;
}

} // namespace

double RateStats::percentile(double p) const {
  if (!(p > 0.0 && p <= 100.0)) {
    throw std::invalid_argument("percentile must lie in (0, 100]");
  }
  if (rate_samples.empty()) {
    throw numerical_error("no rate samples to take a percentile of");
  }
  const long long n = static_cast<long long>(rate_samples.size());
  long long rank = static_cast<long long>(std::ceil(p / 100.0 * n));
  rank = std::max<long long>(1, std::min(rank, n));
  return rate_samples[static_cast<std::size_t>(rank - 1)];
}

double RateStats::percentile_ci(double p) const {
  if (!(p > 0.0 && p <= 100.0)) {
    throw std::invalid_argument("percentile must lie in (0, 100]");
  }
  if (rate_samples.empty()) {
    throw numerical_error("no rate samples to take a percentile of");
  }
  // Distribution-free order-statistic interval: ranks n q +- 1.96 sqrt(n q
  // (1 - q)) bracket the true quantile with ~95% coverage.
  const long long n = static_cast<long long>(rate_samples.size());
  const double q = p / 100.0;
  const double spread = 1.96 * std::sqrt(n * q * (1.0 - q));
  long long lo = static_cast<long long>(std::floor(n * q - spread));
  long long hi = static_cast<long long>(std::ceil(n * q + spread));
  lo = std::max<long long>(1, std::min(lo, n));
  hi = std::max<long long>(1, std::min(hi, n));
  return 0.5 * (rate_samples[static_cast<std::size_t>(hi - 1)] -
                rate_samples[static_cast<std::size_t>(lo - 1)]);
}

double RateStats::cdf(double x) const {
  if (rate_samples.empty()) return 0.0;
  const auto it =
      std::upper_bound(rate_samples.begin(), rate_samples.end(), x);
  return static_cast<double>(it - rate_samples.begin()) /
         static_cast<double>(rate_samples.size());
}

double RateStats::ccdf(double x) const {
  if (rate_samples.empty()) return 0.0;
  const auto it =
      std::lower_bound(rate_samples.begin(), rate_samples.end(), x);
  return static_cast<double>(rate_samples.end() - it) /
         static_cast<double>(rate_samples.size());
}

ResolvedGeometry resolve_geometry(const SimulationPlan& plan,
                                  const SystemParams& params,
                                  const OperatingPoint& op) {
  validate(params);
  validate(op, params);
  const DerivedParams derived = derive(params, op);
  const double meas = plan.measurement_half_width_m > 0.0
                          ? plan.measurement_half_width_m
                          : kDefaultMeasurementHalfWidthM;
  double window = plan.window_half_width_m;
  if (window <= 0.0) {
    double guard;
    if (plan.analytic_model_mode) {
      // The perfectly-nulled disk removes all nearby interference, so the
      // SINR is sensitive to the far field; take a much wider guard, wider
      // still at zeta = 1 where the bound is expected to be tight.
      guard = (op.diversity == 1 ? 20.0 : 15.0) * derived.cluster_radius_m;
    } else {
      // 99th-percentile serving distance of the nearest-BS law.
      const double r99 =
          std::sqrt(std::log(100.0) / (params.bs_density * kPi));
      // Deliberately the same rule for both clustering modes (the adaptive
      // reach bounds the fixed one for almost every user), so identical
      // seeds produce identical geometry across modes.
      guard = 3.0 * std::max(derived.cluster_radius_m,
                             adaptive_range_factor(op) * r99);
    }
    window = meas + guard;
  }
  if (window <= meas) {
    throw std::invalid_argument(
        "window half-width must exceed the measurement half-width");
  }
  return ResolvedGeometry{window, meas};
}

std::vector<std::pair<OperatingPoint, RateStats>> run(
    const SimulationPlan& plan, const SystemParams& params) {
  validate_plan(plan, params);

  std::vector<std::pair<OperatingPoint, RateStats>> results;
  results.reserve(plan.operating_points.size());

  for (const OperatingPoint& op : plan.operating_points) {
    const ResolvedGeometry geom = resolve_geometry(plan, params, op);
    const DerivedParams derived = derive(params, op);

    std::vector<RealizationOutcome> slots(plan.realizations);
    std::atomic<int> next{0};
    std::mutex failure_mutex;
    std::exception_ptr failure;

    const int workers =
        std::min(plan.workers, plan.realizations);
    auto work = [&]() {
      for (;;) {
        const int r = next.fetch_add(1);
        if (r >= plan.realizations) return;
        try {
          const std::uint64_t r_seed =
              realization_seed(plan.master_seed, static_cast<std::uint64_t>(r));
          slots[r] = plan.analytic_model_mode
                         ? simulate_analytic_model(plan, params, op, geom,
                                                   derived, r_seed)
                         : simulate_physical(plan, params, op, geom, derived,
                                             r_seed);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          return;
        }
      }
    };

    if (workers <= 1) {
      work();
    } else {
      std::vector<std::thread> pool;
      pool.reserve(workers);
      for (int t = 0; t < workers; ++t) pool.emplace_back(work);
      for (std::thread& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    results.emplace_back(op, collect_stats(plan, op, slots));
  }
  return results;
}

std::vector<SweepRow> sweep(const SystemParams& params, int antennas,
                            const SweepOptions& options) {
  validate(params);
  if (options.realizations < 1) {
    throw std::invalid_argument("sweep needs at least one realization");
  }

  std::vector<OperatingPoint> selected;
  for (const OperatingPoint& op : enumerate_operating_points(antennas)) {
    if (!options.k_list.empty() &&
        std::find(options.k_list.begin(), options.k_list.end(),
                  op.multiplexing) == options.k_list.end()) {
      continue;
    }
    if (options.max_nulling >= 0 && op.nulling > options.max_nulling) continue;
    // A fixed pool cannot feed more streams than it holds.
    if (options.user_model == UserModel::fixed_pool &&
        op.multiplexing > params.users_per_cell) {
      continue;
    }
    selected.push_back(op);
  }
  if (selected.empty()) {
    throw std::invalid_argument("sweep selects no operating points");
  }

  SimulationPlan plan;
  plan.realizations = options.realizations;
  plan.master_seed = options.master_seed;
  plan.clustering_mode = options.mode;
  plan.user_model = options.user_model;
  plan.workers = options.workers;
  plan.operating_points = selected;

  std::vector<SweepRow> rows;
  rows.reserve(selected.size());
  for (auto& [op, stats] : run(plan, params)) {
    SweepRow row;
    row.op = op;
    row.mode = options.mode;
    row.sum_rate_bps_hz = stats.per_bs_sum_rate_mean;
    row.sum_rate_ci = stats.per_bs_sum_rate_ci;
    row.p10_bps_hz = stats.percentile(10.0);
    row.p10_ci = stats.percentile_ci(10.0);
    row.samples = stats.sample_count;
    rows.push_back(row);
  }
  return rows;
}

BoundCheckReport compare_to_analytic(const RateStats& stats,
                                     const AnalyticContext& ctx,
                                     const std::vector<double>& kappa_grid) {
  if (stats.per_realization.empty()) {
    throw std::invalid_argument("bound check needs simulated rate samples");
  }
  BoundCheckReport report;
  report.points.reserve(kappa_grid.size());
  const int groups = static_cast<int>(stats.per_realization.size());

  for (double kappa : kappa_grid) {
    BoundCheckPoint pt;
    pt.kappa = kappa;
    pt.bound = rate_ccdf_upper(kappa, ctx);
    pt.empirical = stats.ccdf(kappa);

    // Realizations are the independent units (probes share one BS draw), so
    // the uncertainty comes from the spread of per-realization CCDFs.
    double mean = 0.0;
    std::vector<double> per_group(groups);
    for (int g = 0; g < groups; ++g) {
      const std::vector<double>& samples = stats.per_realization[g];
      long long hits = 0;
      for (double v : samples) {
        if (v >= kappa) ++hits;
      }
      per_group[g] = static_cast<double>(hits) /
                     static_cast<double>(samples.size());
      mean += per_group[g];
    }
    mean /= groups;
    double var = 0.0;
    for (double v : per_group) var += (v - mean) * (v - mean);
    pt.ci = groups > 1
                ? 1.96 * std::sqrt(var / (groups - 1) / groups)
                : 0.0;

    pt.holds = pt.bound >= pt.empirical - 2.0 * pt.ci;
    if (!pt.holds) ++report.violations;
    report.max_gap = std::max(report.max_gap, pt.bound - pt.empirical);
    report.points.push_back(pt);
  }
  return report;
}

namespace {

void append_number(std::string& line, double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  line += buf;
}

} // namespace

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "K,zeta,O,mode,sum_rate_bps_hz,sum_rate_ci,p10_bps_hz,p10_ci,samples\n";
  for (const SweepRow& row : rows) {
    std::string line;
    line += std::to_string(row.op.multiplexing);
    line += ',';
    line += std::to_string(row.op.diversity);
    line += ',';
    line += std::to_string(row.op.nulling);
    line += ',';
    line += row.mode == ClusteringMode::fixed_range ? "fixed" : "adaptive";
    line += ',';
    append_number(line, row.sum_rate_bps_hz);
    line += ',';
    append_number(line, row.sum_rate_ci);
    line += ',';
    append_number(line, row.p10_bps_hz);
    line += ',';
    append_number(line, row.p10_ci);
    line += ',';
    line += std::to_string(row.samples);
    line += '\n';
    out << line;
  }
}

void write_cdf_csv(std::ostream& out, const RateStats& stats) {
  out << "rate_bps_hz,cdf\n";
  // Nearest-rank quantiles on a 0.5% grid keep the file small while
  // reproducing every percentile a reader is likely to look up.
  for (int step = 1; step <= 200; ++step) {
    const double q = step * 0.005;
    std::string line;
    append_number(line, stats.percentile(q * 100.0));
    line += ',';
    append_number(line, q);
    line += '\n';
    out << line;
  }
}

} // namespace lsmimo
