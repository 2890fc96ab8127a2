#include "explore/harness/runner.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "explore/gnn/checkpoint.hpp"
#include "explore/rl/dqn.hpp"

namespace explore::harness {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

PolicyRuntime PolicyRuntime::make(const PolicyKind& kind) {
  PolicyRuntime rt;
  rt.kind = kind;
  if (kind.tag == PolicyKind::Tag::Learned) {
    rt.params = gnn::load_checkpoint_file(kind.checkpoint);
  }
  return rt;
}

int PolicyRuntime::decide(const Episode& ep, double alpha, std::mt19937_64& rng,
                          double* seconds) const {
  const auto t0 = Clock::now();
  int action = 0;
  switch (kind.tag) {
    case PolicyKind::Tag::Nearest:
      action = nearest_policy(ep.graph());
      break;
    case PolicyKind::Tag::Random:
      action = random_policy(ep.graph(), rng);
      break;
    case PolicyKind::Tag::Em:
      action = em_policy(ep, alpha);
      break;
    case PolicyKind::Tag::Learned: {
      action = rl::action_sampling(ep.graph(), *params, 0.0, rng);
      break;
    }
  }
  if (seconds) {
    double elapsed = seconds_since(t0);
    if (kind.tag == PolicyKind::Tag::Learned) {
      elapsed += ep.last_graph_build_seconds();
    }
    *seconds += elapsed;
  }
  return action;
}

TrialMetrics run_trial(const ExperimentConfig& cfg, const PolicyKind& policy,
                       std::uint64_t seed, const DecisionHook& on_decision) {
  return run_trial(cfg, PolicyRuntime::make(policy), seed, on_decision);
}

TrialMetrics run_trial(const ExperimentConfig& cfg, const PolicyRuntime& policy,
                       std::uint64_t seed, const DecisionHook& on_decision) {
  TrialMetrics m;
  m.seed = seed;
  m.policy = policy.kind.name();

  // row 0: before the first observation every cell holds one bit
  const OccupancyGrid fresh = OccupancyGrid::for_world(cfg.episode.world);
  m.motion_step.push_back(0);
  m.decision_step.push_back(0);
  m.avg_landmark_uncertainty.push_back(0.0);
  m.max_trajectory_uncertainty.push_back(0.0);
  m.map_entropy_bits.push_back(
      map_entropy_bits(fresh, cfg.episode.world.bounds()));

  Episode ep(cfg.episode, seed);
  auto policy_rng = substream(seed, "policy");

  ep.set_step_callback([&m](const Episode& e) {
    m.motion_step.push_back(e.motion_steps());
    m.decision_step.push_back(e.decisions());
    m.avg_landmark_uncertainty.push_back(e.mean_landmark_trace());
    m.max_trajectory_uncertainty.push_back(e.max_pose_trace());
    m.map_entropy_bits.push_back(e.map_entropy());
  });

  double decision_seconds = 0.0;
  int decisions = 0;
  while (!ep.done()) {
    if (on_decision) on_decision(ep, decisions);
    const int action = policy.decide(ep, cfg.train.alpha, policy_rng,
                                     &decision_seconds);
    ++decisions;
    ep.execute_frontier_node(ep.graph().frontier_nodes[action]);
  }

  m.total_motion_steps = ep.motion_steps();
  m.total_decisions = ep.decisions();
  m.distance = ep.distance_traveled();
  m.coverage = ep.coverage();
  m.slam_failed = ep.end_reason() == Episode::EndReason::SlamFailure;
  m.mean_decision_seconds = decisions > 0 ? decision_seconds / decisions : 0.0;
  return m;
}

CompareReport compare_policies(const ExperimentConfig& cfg,
                               const std::vector<PolicyKind>& policies) {
  if (policies.size() < 2) {
    throw std::invalid_argument("compare_policies: need at least two policies");
  }
  EvalConfig eval = cfg.eval;
  eval.finalize();

  CompareReport report;
  for (const auto& policy : policies) {
    const PolicyRuntime rt = PolicyRuntime::make(policy);
    const std::string name = policy.name();
    report.policy_names.push_back(name);
    report.excluded[name] = 0;
    for (int k = 0; k < eval.trials; ++k) {
      TrialMetrics m = run_trial(cfg, rt, eval.seeds[k]);
      if (m.slam_failed) {
        ++report.excluded[name];
      } else {
        report.trials[name].push_back(std::move(m));
      }
    }
  }
  return report;
}

ExperimentConfig with_map_size(const ExperimentConfig& cfg, double size) {
  ExperimentConfig out = cfg;
  out.episode.world.width = size;
  out.episode.world.height = size;
  return out;
}

std::vector<TimingRow> benchmark_decision_time(
    const ExperimentConfig& cfg, const std::vector<PolicyKind>& policies,
    const std::vector<double>& map_sizes, int episodes_per_size) {
  for (std::size_t i = 1; i < map_sizes.size(); ++i) {
    if (map_sizes[i] <= map_sizes[i - 1]) {
      throw std::invalid_argument("benchmark: map sizes must be ascending");
    }
  }
  EvalConfig eval = cfg.eval;
  eval.trials = std::max(eval.trials, episodes_per_size);
  eval.finalize();

  std::vector<TimingRow> rows;
  for (const auto& policy : policies) {
    const PolicyRuntime rt = PolicyRuntime::make(policy);
    for (const double size : map_sizes) {
      const ExperimentConfig sized = with_map_size(cfg, size);
      double total_seconds = 0.0;
      long total_decisions = 0;
      for (int k = 0; k < episodes_per_size; ++k) {
        const TrialMetrics m = run_trial(sized, rt, eval.seeds[k]);
        total_seconds += m.mean_decision_seconds * m.total_decisions;
        total_decisions += m.total_decisions;
      }
      rows.push_back({size, policy.name(),
                      total_decisions > 0 ? total_seconds / total_decisions : 0.0,
                      static_cast<int>(total_decisions)});
    }
  }
  return rows;
}

void write_timing_csv(const std::vector<TimingRow>& rows, std::ostream& os) {
  os.precision(17);
  os << "map_size,policy,mean_decision_time_s,decisions\n";
  for (const auto& r : rows) {
    os << r.map_size << ',' << r.policy << ',' << r.mean_decision_seconds << ','
       << r.decisions << '\n';
  }
}

namespace {

void emit_figure(const CompareReport& report,
                 const std::vector<double> TrialMetrics::* series,
                 const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("emit_plot_data: cannot write " + path);
  os.precision(17);

  std::map<std::string, AlignedSeries> aligned;
  std::size_t horizon = 0;
  for (const auto& name : report.policy_names) {
    const auto it = report.trials.find(name);
    if (it != report.trials.end()) {
      aligned[name] = align_series(it->second, series);
      horizon = std::max(horizon, aligned[name].mean.size());
    }
  }

  os << "step";
  for (const auto& name : report.policy_names) {
    os << ',' << name << "_mean," << name << "_sd";
  }
  os << '\n';
  for (std::size_t s = 0; s < horizon; ++s) {
    os << (s + 1);
    for (const auto& name : report.policy_names) {
      const auto& a = aligned[name];
      if (s < a.mean.size()) {
        os << ',' << a.mean[s] << ',' << a.sd[s];
      } else if (!a.mean.empty()) {
        os << ',' << a.mean.back() << ',' << a.sd.back();
      } else {
        os << ",,";
      }
    }
    os << '\n';
  }
}

}  // namespace

std::vector<std::string> emit_plot_data(const CompareReport& report,
                                        const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> written;

  const std::pair<const std::vector<double> TrialMetrics::*, const char*> figs[] = {
      {&TrialMetrics::avg_landmark_uncertainty, "fig5a_landmark_uncertainty.csv"},
      {&TrialMetrics::max_trajectory_uncertainty, "fig5b_trajectory_uncertainty.csv"},
      {&TrialMetrics::map_entropy_bits, "fig5c_map_entropy.csv"},
  };
  for (const auto& [series, name] : figs) {
    const std::string path = dir + "/" + name;
    emit_figure(report, series, path);
    written.push_back(path);
  }

  const std::string summary_path = dir + "/compare_summary.csv";
  std::ofstream os(summary_path);
  if (!os) throw std::runtime_error("emit_plot_data: cannot write " + summary_path);
  std::vector<TrialMetrics> all;
  for (const auto& name : report.policy_names) {
    const auto it = report.trials.find(name);
    if (it == report.trials.end()) continue;
    all.insert(all.end(), it->second.begin(), it->second.end());
  }
  write_summary_csv(all, os);
  written.push_back(summary_path);
  return written;
}

std::string emit_timing_data(const std::vector<TimingRow>& rows,
                             const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::string path = dir + "/fig4_decision_time.csv";
  std::ofstream os(path);
  if (!os) throw std::runtime_error("emit_timing_data: cannot write " + path);
  write_timing_csv(rows, os);
  return path;
}

}  // namespace explore::harness
