#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <iosfwd>
#include <vector>

#include "explore/world.hpp"

namespace explore {

/// Log-odds update constants. Landmarks are passable points, so free space
/// is carved as a full sensing disk; cells holding observed landmarks are
/// marked occupied to keep the map non-trivial.
struct OccupancyParams {
  double log_odds_free = -0.85;
  double log_odds_occupied = 2.0;
  double log_odds_clamp = 10.0;
  int min_cluster_cells = 2;
};

/// Row-major log-odds occupancy grid. Unobserved cells hold log-odds 0,
/// i.e. probability exactly 0.5.
class OccupancyGrid {
 public:
  OccupancyGrid(const Eigen::Vector2d& origin, double cell_size, int nx, int ny);

  static OccupancyGrid for_world(const WorldConfig& cfg);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double cell_size() const { return cell_size_; }
  const Eigen::Vector2d& origin() const { return origin_; }

  bool contains(int ix, int iy) const {
    return ix >= 0 && iy >= 0 && ix < nx_ && iy < ny_;
  }
  Eigen::Vector2i cell_at(const Eigen::Vector2d& p) const;
  Eigen::Vector2d center(int ix, int iy) const;

  double log_odds(int ix, int iy) const { return cells_[iy * nx_ + ix]; }
  double probability(int ix, int iy) const {
    return 1.0 / (1.0 + std::exp(-log_odds(ix, iy)));
  }
  bool unknown(int ix, int iy) const { return log_odds(ix, iy) == 0.0; }
  bool free(int ix, int iy) const { return log_odds(ix, iy) < 0.0; }
  bool occupied(int ix, int iy) const { return log_odds(ix, iy) > 0.0; }

  void add_log_odds(int ix, int iy, double delta, double clamp);

  /// Guarded fallback: grow the grid so that `p` falls inside. Pre-allocated
  /// world bounds make this a no-op in normal runs.
  void ensure_contains(const Eigen::Vector2d& p);

 private:
  Eigen::Vector2d origin_;
  double cell_size_;
  int nx_, ny_;
  std::vector<double> cells_;
};

struct Frontier {
  Eigen::Vector2d position{0.0, 0.0};
  int cluster_size = 0;
};

using FrontierSet = std::vector<Frontier>;

/// Carve the sensing disk around the estimated pose as free and mark cells
/// holding scan returns as occupied.
void update_occupancy(OccupancyGrid& grid, const Pose2& estimated_pose,
                      const SensorScan& scan, const WorldConfig& cfg,
                      const OccupancyParams& params = {});

/// Free cells 4-adjacent to unknown cells, clustered into connected
/// components; one waypoint per cluster at the cell nearest the centroid.
FrontierSet detect_frontiers(const OccupancyGrid& grid,
                             const OccupancyParams& params = {});

/// Fraction of cells inside `bounds` whose probability differs from 0.5.
double coverage_fraction(const OccupancyGrid& grid,
                         const Eigen::AlignedBox2d& bounds);

/// Sum of per-cell binary entropies (bits) over cells inside `bounds`.
double map_entropy_bits(const OccupancyGrid& grid,
                        const Eigen::AlignedBox2d& bounds);

/// Plain-text export: origin/cell_size header then a row-major probability
/// matrix, one grid row per line.
void save_occupancy(const OccupancyGrid& grid, std::ostream& os);

}  // namespace explore
