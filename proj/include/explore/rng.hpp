#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace explore {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Seed for a named sub-stream of a master seed. Every stochastic component
/// draws from its own stream so that changing one component never perturbs
/// the draws of another.
inline std::uint64_t substream_seed(std::uint64_t master, std::string_view label,
                                    std::uint64_t index = 0) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a over the label
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return splitmix64(master ^ splitmix64(h + 0x517cc1b727220a95ull * index));
}

inline std::mt19937_64 substream(std::uint64_t master, std::string_view label,
                                 std::uint64_t index = 0) {
  return std::mt19937_64(substream_seed(master, label, index));
}

/// Zero-mean Gaussian truncated at +/- 4 sd. sd <= 0 returns 0.
inline double truncated_gaussian(std::mt19937_64& rng, double sd) {
  if (sd <= 0.0) return 0.0;
  std::normal_distribution<double> dist(0.0, sd);
  double v = dist(rng);
  while (std::abs(v) > 4.0 * sd) v = dist(rng);
  return v;
}

}  // namespace explore
