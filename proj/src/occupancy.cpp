#include "explore/occupancy.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <deque>
#include <limits>
#include <ostream>

namespace explore {

OccupancyGrid::OccupancyGrid(const Eigen::Vector2d& origin, double cell_size,
                             int nx, int ny)
    : origin_(origin), cell_size_(cell_size), nx_(nx), ny_(ny),
      cells_(static_cast<std::size_t>(nx) * ny, 0.0) {
  if (nx <= 0 || ny <= 0 || !(cell_size > 0.0)) {
    throw std::invalid_argument("OccupancyGrid: bad dimensions");
  }
}

OccupancyGrid OccupancyGrid::for_world(const WorldConfig& cfg) {
  const int nx = std::max(1, static_cast<int>(std::ceil(cfg.width / cfg.cell_size)));
  const int ny = std::max(1, static_cast<int>(std::ceil(cfg.height / cfg.cell_size)));
  return OccupancyGrid({0.0, 0.0}, cfg.cell_size, nx, ny);
}

Eigen::Vector2i OccupancyGrid::cell_at(const Eigen::Vector2d& p) const {
  return {static_cast<int>(std::floor((p.x() - origin_.x()) / cell_size_)),
          static_cast<int>(std::floor((p.y() - origin_.y()) / cell_size_))};
}

Eigen::Vector2d OccupancyGrid::center(int ix, int iy) const {
  return {origin_.x() + (ix + 0.5) * cell_size_,
          origin_.y() + (iy + 0.5) * cell_size_};
}

void OccupancyGrid::add_log_odds(int ix, int iy, double delta, double clamp) {
  assert(contains(ix, iy));
  double& v = cells_[iy * nx_ + ix];
  v = std::clamp(v + delta, -clamp, clamp);
}

void OccupancyGrid::ensure_contains(const Eigen::Vector2d& p) {
  Eigen::Vector2i c = cell_at(p);
  if (contains(c.x(), c.y())) return;

  const int grow_lo_x = std::max(0, -c.x());
  const int grow_lo_y = std::max(0, -c.y());
  const int grow_hi_x = std::max(0, c.x() - (nx_ - 1));
  const int grow_hi_y = std::max(0, c.y() - (ny_ - 1));
  const int new_nx = nx_ + grow_lo_x + grow_hi_x;
  const int new_ny = ny_ + grow_lo_y + grow_hi_y;

  std::vector<double> next(static_cast<std::size_t>(new_nx) * new_ny, 0.0);
  for (int iy = 0; iy < ny_; ++iy) {
    for (int ix = 0; ix < nx_; ++ix) {
      next[(iy + grow_lo_y) * new_nx + (ix + grow_lo_x)] = cells_[iy * nx_ + ix];
    }
  }
  origin_ -= Eigen::Vector2d(grow_lo_x * cell_size_, grow_lo_y * cell_size_);
  nx_ = new_nx;
  ny_ = new_ny;
  cells_ = std::move(next);
}

void update_occupancy(OccupancyGrid& grid, const Pose2& estimated_pose,
                      const SensorScan& scan, const WorldConfig& cfg,
                      const OccupancyParams& params) {
  if (!std::isfinite(estimated_pose.x) || !std::isfinite(estimated_pose.y) ||
      !std::isfinite(estimated_pose.theta)) {
    throw std::invalid_argument("update_occupancy: non-finite pose");
  }
  const Eigen::Vector2d p = estimated_pose.position();
  grid.ensure_contains(p);

  // free disk around the pose (no occluders in this world)
  const double r = cfg.sensor_range;
  const Eigen::Vector2i lo = grid.cell_at(p - Eigen::Vector2d(r, r));
  const Eigen::Vector2i hi = grid.cell_at(p + Eigen::Vector2d(r, r));
  for (int iy = std::max(0, lo.y()); iy <= std::min(grid.ny() - 1, hi.y()); ++iy) {
    for (int ix = std::max(0, lo.x()); ix <= std::min(grid.nx() - 1, hi.x()); ++ix) {
      if ((grid.center(ix, iy) - p).norm() <= r) {
        grid.add_log_odds(ix, iy, params.log_odds_free, params.log_odds_clamp);
      }
    }
  }

  // cells holding observed landmarks become occupied; the occupied increment
  // dominates the free-disk decrement applied above
  for (const auto& rb : scan) {
    const double a = estimated_pose.theta + rb.bearing;
    const Eigen::Vector2d hit =
        p + rb.range * Eigen::Vector2d(std::cos(a), std::sin(a));
    grid.ensure_contains(hit);
    const Eigen::Vector2i c = grid.cell_at(hit);
    grid.add_log_odds(c.x(), c.y(), params.log_odds_occupied,
                      params.log_odds_clamp);
  }
}

FrontierSet detect_frontiers(const OccupancyGrid& grid,
                             const OccupancyParams& params) {
  const int nx = grid.nx();
  const int ny = grid.ny();

  auto is_frontier = [&](int ix, int iy) {
    if (!grid.free(ix, iy)) return false;
    static constexpr int dx[4] = {1, -1, 0, 0};
    static constexpr int dy[4] = {0, 0, 1, -1};
    for (int k = 0; k < 4; ++k) {
      const int jx = ix + dx[k];
      const int jy = iy + dy[k];
      if (grid.contains(jx, jy) && grid.unknown(jx, jy)) return true;
    }
    return false;
  };

  std::vector<char> mark(static_cast<std::size_t>(nx) * ny, 0);
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      if (is_frontier(ix, iy)) mark[iy * nx + ix] = 1;
    }
  }

  // 8-connected components over frontier cells
  FrontierSet out;
  std::vector<char> seen(mark.size(), 0);
  for (int sy = 0; sy < ny; ++sy) {
    for (int sx = 0; sx < nx; ++sx) {
      if (!mark[sy * nx + sx] || seen[sy * nx + sx]) continue;
      std::vector<Eigen::Vector2i> cluster;
      std::deque<Eigen::Vector2i> queue{{sx, sy}};
      seen[sy * nx + sx] = 1;
      while (!queue.empty()) {
        const Eigen::Vector2i c = queue.front();
        queue.pop_front();
        cluster.push_back(c);
        for (int oy = -1; oy <= 1; ++oy) {
          for (int ox = -1; ox <= 1; ++ox) {
            if (ox == 0 && oy == 0) continue;
            const int jx = c.x() + ox;
            const int jy = c.y() + oy;
            if (jx < 0 || jy < 0 || jx >= nx || jy >= ny) continue;
            if (!mark[jy * nx + jx] || seen[jy * nx + jx]) continue;
            seen[jy * nx + jx] = 1;
            queue.push_back({jx, jy});
          }
        }
      }
      if (static_cast<int>(cluster.size()) < params.min_cluster_cells) continue;

      Eigen::Vector2d centroid(0.0, 0.0);
      for (const auto& c : cluster) centroid += grid.center(c.x(), c.y());
      centroid /= static_cast<double>(cluster.size());

      double best = std::numeric_limits<double>::infinity();
      Eigen::Vector2i best_cell = cluster.front();
      for (const auto& c : cluster) {
        const double d = (grid.center(c.x(), c.y()) - centroid).squaredNorm();
        if (d < best) {
          best = d;
          best_cell = c;
        }
      }
      out.push_back({grid.center(best_cell.x(), best_cell.y()),
                     static_cast<int>(cluster.size())});
    }
  }
  return out;
}

double coverage_fraction(const OccupancyGrid& grid,
                         const Eigen::AlignedBox2d& bounds) {
  long total = 0;
  long observed = 0;
  for (int iy = 0; iy < grid.ny(); ++iy) {
    for (int ix = 0; ix < grid.nx(); ++ix) {
      if (!bounds.contains(grid.center(ix, iy))) continue;
      ++total;
      if (!grid.unknown(ix, iy)) ++observed;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(observed) / total;
}

double map_entropy_bits(const OccupancyGrid& grid,
                        const Eigen::AlignedBox2d& bounds) {
  double h = 0.0;
  for (int iy = 0; iy < grid.ny(); ++iy) {
    for (int ix = 0; ix < grid.nx(); ++ix) {
      if (!bounds.contains(grid.center(ix, iy))) continue;
      const double p = grid.probability(ix, iy);
      const double q = 1.0 - p;
      double cell = 0.0;
      if (p > 0.0) cell -= p * std::log2(p);
      if (q > 0.0) cell -= q * std::log2(q);
      h += cell;
    }
  }
  return h;
}

void save_occupancy(const OccupancyGrid& grid, std::ostream& os) {
  os.precision(17);
  os << "origin " << grid.origin().x() << ' ' << grid.origin().y() << '\n';
  os << "cell_size " << grid.cell_size() << '\n';
  os << "rows " << grid.ny() << '\n';
  os << "cols " << grid.nx() << '\n';
  for (int iy = 0; iy < grid.ny(); ++iy) {
    for (int ix = 0; ix < grid.nx(); ++ix) {
      os << grid.probability(ix, iy) << (ix + 1 == grid.nx() ? '\n' : ' ');
    }
  }
}

}  // namespace explore
