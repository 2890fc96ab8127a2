#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <vector>

#include "explore/occupancy.hpp"
#include "explore/slam.hpp"
#include "explore/virtual_map.hpp"

namespace explore {

enum class NodeKind { Pose, Landmark, Frontier };

/// Node feature layout:
///   s1 trace of the virtual-map cell covariance at the node,
///   s2 Euclidean distance to the current pose,
///   s3 world-frame bearing arctan2(y - y_t, x - x_t),
///   s4 occupancy probability of the node's cell,
///   s5 indicator: 0 current pose, 1 frontier, -1 otherwise.
struct GraphNode {
  NodeKind kind = NodeKind::Pose;
  Eigen::Vector2d position{0.0, 0.0};
  Eigen::Matrix<double, 5, 1> feature = Eigen::Matrix<double, 5, 1>::Zero();
};

struct GraphEdge {
  int a = 0;
  int b = 0;
  double weight = 0.0;  // Euclidean distance between endpoints
};

/// The RL state: past poses, mapped landmarks, and frontier candidates,
/// connected by the pose chain, measurement pairs, and nearest-frontier
/// links from landmarks and the current pose.
struct ExplorationGraph {
  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;
  int current_pose_node = -1;
  std::vector<int> frontier_nodes;  // node index per frontier, FrontierSet order

  int size() const { return static_cast<int>(nodes.size()); }
};

/// Index of the frontier nearest to `query`; ties break to the lowest index.
int nearest_frontier(const Eigen::Vector2d& query, const FrontierSet& frontiers);

/// Node ordering: poses 0..t, then landmarks in slot order, then frontiers
/// in FrontierSet order. Throws std::invalid_argument when `frontiers` is
/// empty (an empty frontier set ends the episode instead of forming a graph).
ExplorationGraph build_graph(const Estimate& estimate, const FactorGraph& graph,
                             const FrontierSet& frontiers, const VirtualMap& vm,
                             const OccupancyGrid& grid);

/// Plain-text serialization: `node <kind> <x> <y> <s1..s5>` lines in node
/// order followed by `edge <i> <j> <weight>` lines.
void save_graph(const ExplorationGraph& g, std::ostream& os);
ExplorationGraph load_graph(std::istream& is);

}  // namespace explore
