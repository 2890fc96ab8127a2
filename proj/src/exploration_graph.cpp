#include "explore/exploration_graph.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

namespace explore {

int nearest_frontier(const Eigen::Vector2d& query, const FrontierSet& frontiers) {
  if (frontiers.empty()) {
    throw std::invalid_argument("nearest_frontier: empty frontier set");
  }
  int best = 0;
  double best_d = (frontiers[0].position - query).squaredNorm();
  for (int i = 1; i < static_cast<int>(frontiers.size()); ++i) {
    const double d = (frontiers[i].position - query).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

ExplorationGraph build_graph(const Estimate& estimate, const FactorGraph& graph,
                             const FrontierSet& frontiers, const VirtualMap& vm,
                             const OccupancyGrid& grid) {
  if (frontiers.empty()) {
    throw std::invalid_argument("build_graph: no frontiers (episode over)");
  }
  if (estimate.poses.empty()) {
    throw std::invalid_argument("build_graph: estimate has no poses");
  }

  ExplorationGraph g;
  const int num_poses = static_cast<int>(estimate.poses.size());
  const int num_landmarks = graph.num_landmarks();
  g.nodes.reserve(num_poses + num_landmarks + frontiers.size());

  for (int i = 0; i < num_poses; ++i) {
    g.nodes.push_back({NodeKind::Pose, estimate.poses[i].position(), {}});
  }
  g.current_pose_node = num_poses - 1;
  for (int s = 0; s < num_landmarks; ++s) {
    const int id = graph.landmark_ids()[s];
    g.nodes.push_back({NodeKind::Landmark, estimate.landmarks.at(id), {}});
  }
  for (const auto& f : frontiers) {
    g.frontier_nodes.push_back(g.size());
    g.nodes.push_back({NodeKind::Frontier, f.position, {}});
  }

  const Eigen::Vector2d current = estimate.poses.back().position();
  for (auto& node : g.nodes) {
    const Eigen::Vector2i vc = vm.clamped_cell_at(node.position);
    const Eigen::Vector2i oc = grid.cell_at(node.position);
    double occ = 0.5;
    if (grid.contains(oc.x(), oc.y())) occ = grid.probability(oc.x(), oc.y());
    const Eigen::Vector2d d = node.position - current;
    const double dist = d.norm();
    node.feature(0) = vm.cell_trace(vc.x(), vc.y());
    node.feature(1) = dist;
    node.feature(2) = (dist > 0.0) ? std::atan2(d.y(), d.x()) : 0.0;
    node.feature(3) = occ;
    node.feature(4) = -1.0;
  }
  g.nodes[g.current_pose_node].feature(4) = 0.0;
  for (int idx : g.frontier_nodes) g.nodes[idx].feature(4) = 1.0;

  auto add_edge = [&](int a, int b) {
    g.edges.push_back({a, b, (g.nodes[a].position - g.nodes[b].position).norm()});
  };

  // pose chain
  for (int i = 0; i + 1 < num_poses; ++i) add_edge(i, i + 1);

  // unique measurement pairs
  std::set<std::pair<int, int>> seen;
  for (const auto& m : graph.measurements()) {
    const int lm_node = num_poses + graph.landmark_slot(m.landmark_id);
    if (seen.insert({m.pose, lm_node}).second) add_edge(m.pose, lm_node);
  }

  // each landmark and the current pose connect to their nearest frontier only
  for (int s = 0; s < num_landmarks; ++s) {
    const int lm_node = num_poses + s;
    const int f = nearest_frontier(g.nodes[lm_node].position, frontiers);
    add_edge(lm_node, g.frontier_nodes[f]);
  }
  const int f = nearest_frontier(current, frontiers);
  add_edge(g.current_pose_node, g.frontier_nodes[f]);

  return g;
}

namespace {

const char* kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::Pose: return "pose";
    case NodeKind::Landmark: return "landmark";
    case NodeKind::Frontier: return "frontier";
  }
  return "?";
}

NodeKind kind_from(const std::string& s) {
  if (s == "pose") return NodeKind::Pose;
  if (s == "landmark") return NodeKind::Landmark;
  if (s == "frontier") return NodeKind::Frontier;
  throw std::runtime_error("load_graph: unknown node kind '" + s + "'");
}

}  // namespace

void save_graph(const ExplorationGraph& g, std::ostream& os) {
  os.precision(17);
  for (const auto& n : g.nodes) {
    os << "node " << kind_name(n.kind) << ' ' << n.position.x() << ' '
       << n.position.y();
    for (int k = 0; k < 5; ++k) os << ' ' << n.feature(k);
    os << '\n';
  }
  for (const auto& e : g.edges) {
    os << "edge " << e.a << ' ' << e.b << ' ' << e.weight << '\n';
  }
}

ExplorationGraph load_graph(std::istream& is) {
  ExplorationGraph g;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "node") {
      GraphNode n;
      std::string kind;
      ls >> kind >> n.position.x() >> n.position.y();
      for (int k = 0; k < 5; ++k) ls >> n.feature(k);
      if (!ls) throw std::runtime_error("load_graph: malformed node line");
      n.kind = kind_from(kind);
      if (n.feature(4) == 0.0) g.current_pose_node = g.size();
      if (n.kind == NodeKind::Frontier) g.frontier_nodes.push_back(g.size());
      g.nodes.push_back(n);
    } else if (tag == "edge") {
      GraphEdge e;
      ls >> e.a >> e.b >> e.weight;
      if (!ls) throw std::runtime_error("load_graph: malformed edge line");
      g.edges.push_back(e);
    } else {
      throw std::runtime_error("load_graph: unknown line tag '" + tag + "'");
    }
  }
  return g;
}

}  // namespace explore
