#include "explore/harness/metrics.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace explore::harness {

void write_metrics_csv(const TrialMetrics& m, std::ostream& os) {
  os.precision(17);
  os << "motion_step,decision_step,avg_landmark_uncertainty,"
        "max_trajectory_uncertainty,map_entropy_bits\n";
  for (std::size_t i = 0; i < m.rows(); ++i) {
    os << m.motion_step[i] << ',' << m.decision_step[i] << ','
       << m.avg_landmark_uncertainty[i] << ',' << m.max_trajectory_uncertainty[i]
       << ',' << m.map_entropy_bits[i] << '\n';
  }
}

TrialMetrics read_metrics_csv(std::istream& is) {
  TrialMetrics m;
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("metrics: empty stream");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    auto next = [&]() {
      if (!std::getline(ss, field, ',')) {
        throw std::runtime_error("metrics: short row");
      }
      return field;
    };
    m.motion_step.push_back(std::stoi(next()));
    m.decision_step.push_back(std::stoi(next()));
    m.avg_landmark_uncertainty.push_back(std::stod(next()));
    m.max_trajectory_uncertainty.push_back(std::stod(next()));
    m.map_entropy_bits.push_back(std::stod(next()));
  }
  m.total_motion_steps = static_cast<int>(m.rows());
  if (!m.decision_step.empty()) m.total_decisions = m.decision_step.back();
  return m;
}

void write_summary_csv(const std::vector<TrialMetrics>& trials, std::ostream& os) {
  os.precision(17);
  os << "policy,seed,motion_steps,decisions,distance,coverage,slam_failed\n";
  for (const auto& t : trials) {
    os << t.policy << ',' << t.seed << ',' << t.total_motion_steps << ','
       << t.total_decisions << ',' << t.distance << ',' << t.coverage << ','
       << (t.slam_failed ? 1 : 0) << '\n';
  }
}

AlignedSeries align_series(const std::vector<TrialMetrics>& trials,
                           const std::vector<double> TrialMetrics::* series) {
  AlignedSeries out;
  std::size_t horizon = 0;
  for (const auto& t : trials) horizon = std::max(horizon, (t.*series).size());
  if (horizon == 0 || trials.empty()) return out;

  out.mean.resize(horizon, 0.0);
  out.sd.resize(horizon, 0.0);
  for (std::size_t s = 0; s < horizon; ++s) {
    double sum = 0.0;
    double sum2 = 0.0;
    for (const auto& t : trials) {
      const auto& v = t.*series;
      const double x = v.empty() ? 0.0 : (s < v.size() ? v[s] : v.back());
      sum += x;
      sum2 += x * x;
    }
    const double n = static_cast<double>(trials.size());
    const double mean = sum / n;
    out.mean[s] = mean;
    out.sd[s] = std::sqrt(std::max(0.0, sum2 / n - mean * mean));
  }
  return out;
}

}  // namespace explore::harness
