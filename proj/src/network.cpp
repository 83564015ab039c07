// Topology sampling, scheduling, and nulling-cluster formation.
#include "lsmimo/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "lsmimo/errors.hpp"

namespace lsmimo {

namespace {

constexpr int kZeroBsRetryCap = 1000;

// Uniform bucket grid for nearest-neighbor queries over a square window.
// Rings of buckets are scanned outward until no unscanned bucket can beat
// the best distance found so far. Ties resolve to the lowest point index.
class NearestGrid {
 public:
  NearestGrid(const Points& pts, double half_width)
      : pts_(pts), half_(half_width) {
    const int n = static_cast<int>(pts.cols());
    side_ = std::clamp(static_cast<int>(std::sqrt(static_cast<double>(n))), 1, 1024);
    cell_ = 2.0 * half_ / side_;
    buckets_.assign(static_cast<std::size_t>(side_) * side_, {});
    for (int i = 0; i < n; ++i) {
      buckets_[bucket_of(pts(0, i), pts(1, i))].push_back(i);
    }
  }

  // Index of the nearest point to (x, y); dist receives the distance.
  int nearest(double x, double y, double& dist) const {
    int best = -1;
    double best_sq = std::numeric_limits<double>::infinity();
    const int cx = coord(x);
    const int cy = coord(y);
    for (int ring = 0; ring < side_; ++ring) {
      // Any bucket in ring r lies at least (r - 1) * cell_ away from the
      // query point's bucket, so once sqrt(best_sq) <= (ring - 1) * cell_
      // no farther ring can improve on the best match.
      if (ring >= 2 && best_sq <= square((ring - 1) * cell_)) break;
      scan_ring(cx, cy, ring, x, y, best, best_sq);
    }
    dist = std::sqrt(best_sq);
    return best;
  }

 private:
  static double square(double v) { return v * v; }

  int coord(double v) const {
    const int c = static_cast<int>(std::floor((v + half_) / cell_));
    return std::clamp(c, 0, side_ - 1);
  }

  std::size_t bucket_of(double x, double y) const {
    return static_cast<std::size_t>(coord(y)) * side_ + coord(x);
  }

  void scan_bucket(int bx, int by, double x, double y, int& best,
                   double& best_sq) const {
    if (bx < 0 || bx >= side_ || by < 0 || by >= side_) return;
    for (int i : buckets_[static_cast<std::size_t>(by) * side_ + bx]) {
      const double d = square(pts_(0, i) - x) + square(pts_(1, i) - y);
      if (d < best_sq || (d == best_sq && i < best)) {
        best_sq = d;
        best = i;
      }
    }
  }

  void scan_ring(int cx, int cy, int ring, double x, double y, int& best,
                 double& best_sq) const {
    if (ring == 0) {
      scan_bucket(cx, cy, x, y, best, best_sq);
      return;
    }
    for (int dx = -ring; dx <= ring; ++dx) {
      scan_bucket(cx + dx, cy - ring, x, y, best, best_sq);
      scan_bucket(cx + dx, cy + ring, x, y, best, best_sq);
    }
    for (int dy = -ring + 1; dy <= ring - 1; ++dy) {
      scan_bucket(cx - ring, cy + dy, x, y, best, best_sq);
      scan_bucket(cx + ring, cy + dy, x, y, best, best_sq);
    }
  }

  const Points& pts_;
  double half_;
  int side_ = 1;
  double cell_ = 1.0;
  std::vector<std::vector<int>> buckets_;
};

void associate_users(Topology& topo, const NearestGrid& grid) {
  const int n_users = topo.user_count();
  topo.association.resize(n_users);
  topo.serving_distance_m.resize(n_users);
  topo.cell_users.assign(topo.bs_count(), {});
  for (int i = 0; i < n_users; ++i) {
    double dist = 0.0;
    const int bs = grid.nearest(topo.user_positions(0, i), topo.user_positions(1, i), dist);
    topo.association[i] = bs;
    topo.serving_distance_m[i] = dist;
    topo.cell_users[bs].push_back(i); // ascending because i is
  }
}

} // namespace

bool Topology::in_measurement_region(int user) const {
  return std::abs(user_positions(0, user)) <= measurement_region_half_width_m &&
         std::abs(user_positions(1, user)) <= measurement_region_half_width_m;
}

Points sample_bs_positions(const SystemParams& params,
                           double window_half_width_m, Rng& rng) {
  validate(params);
  if (!(window_half_width_m > 0.0)) {
    throw std::invalid_argument("window half-width must be positive");
  }
  const double width = 2.0 * window_half_width_m;
  const double mean_bs = params.bs_density * width * width;
  int n_bs = 0;
  for (int attempt = 0;; ++attempt) {
    n_bs = static_cast<int>(rng.poisson(mean_bs));
    if (n_bs > 0) break;
    if (attempt + 1 >= kZeroBsRetryCap) {
      throw numerical_error("no base stations drawn in " +
                            std::to_string(kZeroBsRetryCap) +
                            " attempts; enlarge the window or the density");
    }
  }
  Points bs(2, n_bs);
  for (int b = 0; b < n_bs; ++b) {
    bs(0, b) = rng.uniform(-window_half_width_m, window_half_width_m);
    bs(1, b) = rng.uniform(-window_half_width_m, window_half_width_m);
  }
  return bs;
}

int nearest_bs(const Points& bs, double x, double y, double& dist) {
  int best = -1;
  double best_sq = std::numeric_limits<double>::infinity();
  for (int b = 0; b < bs.cols(); ++b) {
    const double dx = bs(0, b) - x;
    const double dy = bs(1, b) - y;
    const double d = dx * dx + dy * dy;
    if (d < best_sq) {
      best_sq = d;
      best = b;
    }
  }
  dist = std::sqrt(best_sq);
  return best;
}

Topology sample_topology(const SystemParams& params, double window_half_width_m,
                         double measurement_half_width_m, UserModel model,
                         Rng& rng) {
  validate(params);
  if (!(window_half_width_m > 0.0)) {
    throw std::invalid_argument("window half-width must be positive");
  }
  if (!(measurement_half_width_m > 0.0) ||
      measurement_half_width_m >= window_half_width_m) {
    throw std::invalid_argument(
        "measurement region must be strictly inside the window");
  }

  Topology topo;
  topo.window_half_width_m = window_half_width_m;
  topo.measurement_region_half_width_m = measurement_half_width_m;
  topo.bs_positions = sample_bs_positions(params, window_half_width_m, rng);
  const int n_bs = topo.bs_count();
  const double mean_bs =
      params.bs_density * 4.0 * window_half_width_m * window_half_width_m;
  const NearestGrid grid(topo.bs_positions, window_half_width_m);

  if (model == UserModel::fixed_pool) {
    // Exactly users_per_cell uniform draws inside each Voronoi cell, realized
    // by rejection: window-uniform candidates land in a cell with the right
    // conditional law, and the first users_per_cell arrivals per cell are
    // kept. The cap only guards against pathologically small cells.
    const int per_cell = params.users_per_cell;
    const long long needed = static_cast<long long>(n_bs) * per_cell;
    const long long candidate_cap = std::max<long long>(10'000'000, 4000 * needed);
    std::vector<std::vector<Vec2>> cell_points(n_bs);
    long long placed = 0;
    for (long long draws = 0; placed < needed; ++draws) {
      if (draws >= candidate_cap) {
        throw numerical_error(
            "user placement exceeded the rejection-sampling cap");
      }
      const double x = rng.uniform(-window_half_width_m, window_half_width_m);
      const double y = rng.uniform(-window_half_width_m, window_half_width_m);
      double dist = 0.0;
      const int bs = grid.nearest(x, y, dist);
      if (static_cast<int>(cell_points[bs].size()) < per_cell) {
        cell_points[bs].push_back({x, y});
        ++placed;
      }
    }
    topo.user_positions.resize(2, needed);
    int col = 0;
    for (int b = 0; b < n_bs; ++b) {
      for (const Vec2& p : cell_points[b]) topo.user_positions.col(col++) = p;
    }
  } else {
    const double mean_users = params.users_per_cell * mean_bs;
    const int n_users = static_cast<int>(rng.poisson(mean_users));
    topo.user_positions.resize(2, n_users);
    for (int i = 0; i < n_users; ++i) {
      topo.user_positions(0, i) = rng.uniform(-window_half_width_m, window_half_width_m);
      topo.user_positions(1, i) = rng.uniform(-window_half_width_m, window_half_width_m);
    }
  }

  associate_users(topo, grid);
  return topo;
}

Schedule schedule_users(const Topology& topo, int multiplexing,
                        int users_per_cell, UserModel model, Rng& rng) {
  if (multiplexing < 1) {
    throw std::invalid_argument("multiplexing order must be at least 1");
  }
  const int n_bs = topo.bs_count();
  Schedule sched;
  sched.multiplexing = multiplexing;
  sched.scheduled.assign(n_bs, {});
  sched.fraction.assign(n_bs, 0.0);
  sched.short_cell.assign(n_bs, false);

  for (int b = 0; b < n_bs; ++b) {
    const std::vector<int>& pool = topo.cell_users[b];
    const int pool_size = static_cast<int>(pool.size());
    if (model == UserModel::fixed_pool) {
      if (pool_size != users_per_cell) {
        throw std::invalid_argument(
            "fixed-pool schedule expects exactly users_per_cell candidates per "
            "cell");
      }
      if (multiplexing > users_per_cell) {
        throw std::invalid_argument(
            "multiplexing order exceeds the per-cell candidate pool");
      }
      sched.fraction[b] =
          static_cast<double>(multiplexing) / static_cast<double>(users_per_cell);
    } else {
      if (pool_size == 0) {
        sched.short_cell[b] = true;
        continue;
      }
      sched.short_cell[b] = pool_size <= multiplexing;
      sched.fraction[b] = std::min(
          1.0, static_cast<double>(multiplexing) / static_cast<double>(pool_size));
    }

    if (pool_size <= multiplexing) {
      sched.scheduled[b] = pool; // schedule everyone; already ascending
      continue;
    }
    // Partial Fisher-Yates: the first `multiplexing` slots are a uniform
    // draw without replacement.
    std::vector<int> shuffled = pool;
    for (int i = 0; i < multiplexing; ++i) {
      const std::uint64_t j =
          i + rng.uniform_index(static_cast<std::uint64_t>(pool_size - i));
      std::swap(shuffled[i], shuffled[j]);
    }
    shuffled.resize(multiplexing);
    std::sort(shuffled.begin(), shuffled.end());
    sched.scheduled[b] = std::move(shuffled);
  }
  return sched;
}

namespace {

ClusterAssignment assign_clusters(const Topology& topo, const Schedule& sched,
                                  const OperatingPoint& op,
                                  const DerivedParams& derived,
                                  const MagnitudeFn& magnitude, bool adaptive) {
  if (sched.multiplexing != op.multiplexing) {
    throw std::invalid_argument(
        "schedule and operating point disagree on the multiplexing order");
  }
  if (!(derived.cluster_radius_m > 0.0)) {
    throw std::invalid_argument("cluster radius must be positive");
  }
  const int n_bs = topo.bs_count();
  const int n_users = topo.user_count();
  const double nu = adaptive_range_factor(op);

  ClusterAssignment cl;
  cl.request_radius_m.assign(n_users, 0.0);
  cl.user_cluster.assign(n_users, {});
  cl.user_residual.assign(n_users, {});
  cl.bs_granted_users.assign(n_bs, {});
  cl.spare_dimensions.assign(n_bs, op.nulling);

  // Requests: every scheduled user asks each non-serving BS within its range
  // to spend a nulling dimension on it.
  std::vector<std::vector<int>> requests(n_bs);
  for (int b = 0; b < n_bs; ++b) {
    for (int user : sched.scheduled[b]) {
      const double radius = adaptive ? nu * topo.serving_distance_m[user]
                                     : derived.cluster_radius_m;
      cl.request_radius_m[user] = radius;
      const double radius_sq = radius * radius;
      for (int c = 0; c < n_bs; ++c) {
        if (c == b) continue;
        const double dx = topo.bs_positions(0, c) - topo.user_positions(0, user);
        const double dy = topo.bs_positions(1, c) - topo.user_positions(1, user);
        if (dx * dx + dy * dy <= radius_sq) {
          cl.user_cluster[user].push_back(c); // ascending in c
          requests[c].push_back(user);
        }
      }
    }
  }

  // Grants: each BS serves the op.nulling strongest requests by full channel
  // magnitude; equal magnitudes fall back to the lower user index.
  for (int c = 0; c < n_bs; ++c) {
    std::vector<std::pair<double, int>> ranked;
    ranked.reserve(requests[c].size());
    for (int user : requests[c]) ranked.emplace_back(magnitude(user, c), user);
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    const int grants = std::min<int>(op.nulling, static_cast<int>(ranked.size()));
    for (int k = 0; k < grants; ++k) cl.bs_granted_users[c].push_back(ranked[k].second);
    std::sort(cl.bs_granted_users[c].begin(), cl.bs_granted_users[c].end());
    for (std::size_t k = grants; k < ranked.size(); ++k) {
      cl.user_residual[ranked[k].second].push_back(c);
    }
    cl.spare_dimensions[c] = op.nulling - grants;
  }
  for (auto& residual : cl.user_residual) std::sort(residual.begin(), residual.end());
  return cl;
}

} // namespace

ClusterAssignment assign_clusters_fixed(const Topology& topo,
                                        const Schedule& sched,
                                        const OperatingPoint& op,
                                        const DerivedParams& derived,
                                        const MagnitudeFn& magnitude) {
  return assign_clusters(topo, sched, op, derived, magnitude, /*adaptive=*/false);
}

ClusterAssignment assign_clusters_adaptive(const Topology& topo,
                                           const Schedule& sched,
                                           const OperatingPoint& op,
                                           const DerivedParams& derived,
                                           const MagnitudeFn& magnitude) {
  return assign_clusters(topo, sched, op, derived, magnitude, /*adaptive=*/true);
}

double adaptive_range_factor(const OperatingPoint& op) {
  // Matches the mean in-range BS count of the fixed rule: E[lambda pi (nu r)^2]
  // over the serving-distance law equals (K + O) / K.
  return std::sqrt(static_cast<double>(op.multiplexing + op.nulling) /
                   static_cast<double>(op.multiplexing));
}

std::uint64_t topology_seed(std::uint64_t realization_seed) {
  return mix_seed(realization_seed, 0x544F50ull); // distinct stream per role
}

std::uint64_t schedule_seed(std::uint64_t realization_seed) {
  return mix_seed(realization_seed, 0x534348ull);
}

} // namespace lsmimo
