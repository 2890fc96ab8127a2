#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "explore/baselines.hpp"
#include "explore/harness/config.hpp"
#include "explore/harness/metrics.hpp"

namespace explore::harness {

/// A policy plus anything it needs at decision time.
struct PolicyRuntime {
  PolicyKind kind;
  std::optional<gnn::PolicyParameters> params;  // Learned only

  static PolicyRuntime make(const PolicyKind& kind);
  /// Frontier-list index for the current episode state; wall seconds of the
  /// decision (including graph build for learned policies, all candidate
  /// simulations for EM) are added to *seconds when non-null.
  int decide(const Episode& ep, double alpha, std::mt19937_64& rng,
             double* seconds) const;
};

/// One full episode under `policy`, recording the metric series after every
/// motion step (row 0 is the pre-observation state: maximal map entropy, no
/// landmarks, no trajectory). Same (config, policy, seed) reproduces
/// identical metrics. `on_decision` fires before each decision.
using DecisionHook = std::function<void(const Episode&, int decision)>;
TrialMetrics run_trial(const ExperimentConfig& cfg, const PolicyKind& policy,
                       std::uint64_t seed, const DecisionHook& on_decision = {});
TrialMetrics run_trial(const ExperimentConfig& cfg, const PolicyRuntime& policy,
                       std::uint64_t seed, const DecisionHook& on_decision = {});

struct CompareReport {
  std::vector<std::string> policy_names;  // CLI order
  std::map<std::string, std::vector<TrialMetrics>> trials;  // valid trials
  std::map<std::string, int> excluded;  // SLAM non-convergence counts
};

/// eval.trials episodes per policy, all policies sharing the same seed list.
CompareReport compare_policies(const ExperimentConfig& cfg,
                               const std::vector<PolicyKind>& policies);

struct TimingRow {
  double map_size = 0.0;
  std::string policy;
  double mean_decision_seconds = 0.0;
  int decisions = 0;
};

/// Mean per-decision wall time per (policy, map size) at the configured
/// feature density; one episode per cell, eval seeds.
std::vector<TimingRow> benchmark_decision_time(
    const ExperimentConfig& cfg, const std::vector<PolicyKind>& policies,
    const std::vector<double>& map_sizes, int episodes_per_size = 1);

void write_timing_csv(const std::vector<TimingRow>& rows, std::ostream& os);

/// fig5a/fig5b/fig5c (per-step mean/sd per policy) and compare_summary.csv
/// under `dir`. Returns the written paths.
std::vector<std::string> emit_plot_data(const CompareReport& report,
                                        const std::string& dir);

/// fig4.csv timing layout.
std::string emit_timing_data(const std::vector<TimingRow>& rows,
                             const std::string& dir);

/// World scaled to size x size with everything else unchanged.
ExperimentConfig with_map_size(const ExperimentConfig& cfg, double size);

}  // namespace explore::harness
