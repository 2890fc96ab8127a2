#include "explore/harness/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace explore::harness {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& v, const std::string& key) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("");
    return d;
  } catch (...) {
    throw ConfigError("config: bad numeric value for " + key + ": '" + v + "'");
  }
}

long parse_long(const std::string& v, const std::string& key) {
  try {
    std::size_t used = 0;
    const long n = std::stol(v, &used);
    if (used != v.size()) throw std::invalid_argument("");
    return n;
  } catch (...) {
    throw ConfigError("config: bad integer value for " + key + ": '" + v + "'");
  }
}

std::uint64_t parse_u64(const std::string& v, const std::string& key) {
  try {
    std::size_t used = 0;
    const unsigned long long n = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument("");
    return n;
  } catch (...) {
    throw ConfigError("config: bad unsigned value for " + key + ": '" + v + "'");
  }
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& v, const std::string& key, Parse p) {
  std::vector<T> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(p(item, key));
  }
  return out;
}

}  // namespace

void EvalConfig::finalize() {
  if (trials < 1) throw ConfigError("config: eval.trials must be >= 1");
  while (static_cast<int>(seeds.size()) < trials) {
    seeds.push_back(seed_base + seeds.size());
  }
}

void ExperimentConfig::validate() const {
  episode.world.validate();
  train.validate();
  if (static_cast<int>(eval.seeds.size()) < eval.trials && !eval.seeds.empty()) {
    throw ConfigError("config: eval.seeds shorter than eval.trials");
  }
  if (gnn != "auto" && gnn != "gcn" && gnn != "ggnn") {
    throw ConfigError("config: train.gnn must be auto | gcn | ggnn");
  }
}

ExperimentConfig parse_config(std::istream& is) {
  ExperimentConfig cfg;
  using Setter = std::function<void(const std::string&, const std::string&)>;
  auto& w = cfg.episode.world;
  auto& t = cfg.train;
  auto& e = cfg.eval;

  const std::map<std::string, Setter> setters = {
      {"world.width", [&](auto& k, auto& v) { w.width = parse_double(v, k); }},
      {"world.height", [&](auto& k, auto& v) { w.height = parse_double(v, k); }},
      {"world.landmark_density",
       [&](auto& k, auto& v) { w.landmark_density = parse_double(v, k); }},
      {"world.sensor_range",
       [&](auto& k, auto& v) { w.sensor_range = parse_double(v, k); }},
      {"world.range_noise_sd",
       [&](auto& k, auto& v) { w.range_noise_sd = parse_double(v, k); }},
      {"world.bearing_noise_sd",
       [&](auto& k, auto& v) { w.bearing_noise_sd = parse_double(v, k); }},
      {"world.fov", [&](auto& k, auto& v) { w.fov = parse_double(v, k); }},
      {"world.translation_max",
       [&](auto& k, auto& v) { w.translation_max = parse_double(v, k); }},
      {"world.translation_noise_sd",
       [&](auto& k, auto& v) { w.translation_noise_sd = parse_double(v, k); }},
      {"world.rotation_noise_sd",
       [&](auto& k, auto& v) { w.rotation_noise_sd = parse_double(v, k); }},
      {"world.cell_size",
       [&](auto& k, auto& v) { w.cell_size = parse_double(v, k); }},
      {"world.coverage_target",
       [&](auto& k, auto& v) { w.coverage_target = parse_double(v, k); }},
      {"world.seed", [&](auto& k, auto& v) { w.seed = parse_u64(v, k); }},
      {"world.vm_cell_size",
       [&](auto& k, auto& v) { cfg.episode.vm_cell_size = parse_double(v, k); }},
      {"world.min_cluster_cells",
       [&](auto& k, auto& v) {
         cfg.episode.occupancy.min_cluster_cells =
             static_cast<int>(parse_long(v, k));
       }},
      {"world.decision_cap",
       [&](auto& k, auto& v) {
         cfg.episode.decision_cap = static_cast<int>(parse_long(v, k));
       }},
      {"world.prior_sigma_xy",
       [&](auto& k, auto& v) {
         const double s = parse_double(v, k);
         cfg.episode.prior_sigmas(0) = s;
         cfg.episode.prior_sigmas(1) = s;
       }},
      {"world.prior_sigma_theta",
       [&](auto& k, auto& v) { cfg.episode.prior_sigmas(2) = parse_double(v, k); }},

      {"train.gamma", [&](auto& k, auto& v) { t.gamma = parse_double(v, k); }},
      {"train.alpha", [&](auto& k, auto& v) { t.alpha = parse_double(v, k); }},
      {"train.beta", [&](auto& k, auto& v) { t.beta = parse_double(v, k); }},
      {"train.eta", [&](auto& k, auto& v) { t.eta = parse_double(v, k); }},
      {"train.learning_rate",
       [&](auto& k, auto& v) { t.learning_rate = parse_double(v, k); }},
      {"train.batch_size",
       [&](auto& k, auto& v) { t.batch_size = static_cast<int>(parse_long(v, k)); }},
      {"train.target_sync_interval",
       [&](auto& k, auto& v) {
         t.target_sync_interval = static_cast<int>(parse_long(v, k));
       }},
      {"train.policy_update_steps",
       [&](auto& k, auto& v) {
         t.policy_update_steps = static_cast<int>(parse_long(v, k));
       }},
      {"train.dropout_start",
       [&](auto& k, auto& v) { t.dropout_start = parse_double(v, k); }},
      {"train.dropout_end",
       [&](auto& k, auto& v) { t.dropout_end = parse_double(v, k); }},
      {"train.layer_dropout",
       [&](auto& k, auto& v) { t.layer_dropout = parse_double(v, k); }},
      {"train.max_steps",
       [&](auto& k, auto& v) { t.max_training_steps = parse_long(v, k); }},
      {"train.buffer_capacity",
       [&](auto& k, auto& v) {
         t.buffer_capacity = static_cast<std::size_t>(parse_long(v, k));
       }},
      {"train.hidden_width",
       [&](auto& k, auto& v) { t.hidden_width = static_cast<int>(parse_long(v, k)); }},
      {"train.checkpoint_every",
       [&](auto& k, auto& v) {
         t.checkpoint_every_episodes = static_cast<int>(parse_long(v, k));
       }},
      {"train.gnn", [&](auto&, auto& v) { cfg.gnn = v; }},

      {"eval.trials",
       [&](auto& k, auto& v) { e.trials = static_cast<int>(parse_long(v, k)); }},
      {"eval.map_sizes",
       [&](auto& k, auto& v) {
         e.map_sizes = parse_list<double>(v, k, parse_double);
       }},
      {"eval.seeds",
       [&](auto& k, auto& v) {
         e.seeds = parse_list<std::uint64_t>(v, k, parse_u64);
       }},
      {"eval.seed_base", [&](auto& k, auto& v) { e.seed_base = parse_u64(v, k); }},
      {"eval.out_dir", [&](auto&, auto& v) { e.out_dir = v; }},
  };

  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) {
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": unknown key '" + key + "'");
    }
    it->second(key, value);
  }

  cfg.validate();
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open " + path);
  return parse_config(is);
}

void write_config(const ExperimentConfig& cfg, std::ostream& os) {
  os.precision(17);
  const auto& w = cfg.episode.world;
  const auto& t = cfg.train;
  const auto& e = cfg.eval;
  os << "world.width = " << w.width << '\n';
  os << "world.height = " << w.height << '\n';
  os << "world.landmark_density = " << w.landmark_density << '\n';
  os << "world.sensor_range = " << w.sensor_range << '\n';
  os << "world.range_noise_sd = " << w.range_noise_sd << '\n';
  os << "world.bearing_noise_sd = " << w.bearing_noise_sd << '\n';
  os << "world.fov = " << w.fov << '\n';
  os << "world.translation_max = " << w.translation_max << '\n';
  os << "world.translation_noise_sd = " << w.translation_noise_sd << '\n';
  os << "world.rotation_noise_sd = " << w.rotation_noise_sd << '\n';
  os << "world.cell_size = " << w.cell_size << '\n';
  os << "world.coverage_target = " << w.coverage_target << '\n';
  os << "world.seed = " << w.seed << '\n';
  os << "world.vm_cell_size = " << cfg.episode.vm_cell_size << '\n';
  os << "world.min_cluster_cells = " << cfg.episode.occupancy.min_cluster_cells
     << '\n';
  os << "world.decision_cap = " << cfg.episode.decision_cap << '\n';
  os << "world.prior_sigma_xy = " << cfg.episode.prior_sigmas(0) << '\n';
  os << "world.prior_sigma_theta = " << cfg.episode.prior_sigmas(2) << '\n';
  os << "train.gamma = " << t.gamma << '\n';
  os << "train.alpha = " << t.alpha << '\n';
  os << "train.beta = " << t.beta << '\n';
  os << "train.eta = " << t.eta << '\n';
  os << "train.learning_rate = " << t.learning_rate << '\n';
  os << "train.batch_size = " << t.batch_size << '\n';
  os << "train.target_sync_interval = " << t.target_sync_interval << '\n';
  os << "train.policy_update_steps = " << t.policy_update_steps << '\n';
  os << "train.dropout_start = " << t.dropout_start << '\n';
  os << "train.dropout_end = " << t.dropout_end << '\n';
  os << "train.layer_dropout = " << t.layer_dropout << '\n';
  os << "train.max_steps = " << t.max_training_steps << '\n';
  os << "train.buffer_capacity = " << t.buffer_capacity << '\n';
  os << "train.hidden_width = " << t.hidden_width << '\n';
  os << "train.checkpoint_every = " << t.checkpoint_every_episodes << '\n';
  os << "train.gnn = " << cfg.gnn << '\n';
  os << "eval.trials = " << e.trials << '\n';
  os << "eval.map_sizes = ";
  for (std::size_t i = 0; i < e.map_sizes.size(); ++i) {
    os << e.map_sizes[i] << (i + 1 < e.map_sizes.size() ? "," : "");
  }
  os << '\n';
  if (!e.seeds.empty()) {
    os << "eval.seeds = ";
    for (std::size_t i = 0; i < e.seeds.size(); ++i) {
      os << e.seeds[i] << (i + 1 < e.seeds.size() ? "," : "");
    }
    os << '\n';
  }
  os << "eval.seed_base = " << e.seed_base << '\n';
  os << "eval.out_dir = " << e.out_dir << '\n';
}

}  // namespace explore::harness
