#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "explore/episode.hpp"
#include "explore/rl/config.hpp"

namespace explore::harness {

struct EvalConfig {
  int trials = 50;
  std::vector<double> map_sizes = {40.0, 60.0, 80.0, 100.0};
  std::vector<std::uint64_t> seeds;  // filled from seed_base when empty
  std::uint64_t seed_base = 1000;
  std::string out_dir = "out";

  void finalize();  // ensures seeds.size() >= trials
};

/// Flat key-value experiment configuration with world./train./eval.
/// section prefixes. Unknown keys are errors.
struct ExperimentConfig {
  EpisodeParams episode;
  rl::TrainConfig train;
  EvalConfig eval;
  std::string gnn = "auto";  // auto | gcn | ggnn

  void validate() const;
};

ExperimentConfig parse_config(std::istream& is);
ExperimentConfig parse_config_file(const std::string& path);

/// Write every key with its current value; parse_config round-trips it.
void write_config(const ExperimentConfig& cfg, std::ostream& os);

}  // namespace explore::harness
