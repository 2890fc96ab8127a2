#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace explore::harness {

/// Per-motion-step series plus trial totals. Wall-clock timing stays out of
/// the metric CSV so that trial re-runs are byte-identical; it goes to the
/// separate timing output instead.
struct TrialMetrics {
  // series, one entry per motion step (both step indexings emitted)
  std::vector<int> motion_step;
  std::vector<int> decision_step;
  std::vector<double> avg_landmark_uncertainty;  // m^2, real landmarks only
  std::vector<double> max_trajectory_uncertainty;  // m^2, running max
  std::vector<double> map_entropy_bits;

  int total_motion_steps = 0;
  int total_decisions = 0;
  double distance = 0.0;
  double coverage = 0.0;
  bool slam_failed = false;
  std::uint64_t seed = 0;
  std::string policy;

  double mean_decision_seconds = 0.0;  // timing output only

  std::size_t rows() const { return motion_step.size(); }
};

void write_metrics_csv(const TrialMetrics& m, std::ostream& os);
TrialMetrics read_metrics_csv(std::istream& is);

/// Deterministic totals (no wall time).
void write_summary_csv(const std::vector<TrialMetrics>& trials, std::ostream& os);

/// Across-trial mean and sd of one metric at aligned motion steps; trials
/// that already finished contribute their final value.
struct AlignedSeries {
  std::vector<double> mean;
  std::vector<double> sd;
};

AlignedSeries align_series(const std::vector<TrialMetrics>& trials,
                           const std::vector<double> TrialMetrics::* series);

}  // namespace explore::harness
