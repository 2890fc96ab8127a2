// Command-line front end: train policies, evaluate and compare them against
// the non-learned baselines, benchmark decision time across map sizes, and
// replay recorded trials. Exit codes: 0 ok, 1 configuration error, 2 runtime
// failure.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "explore/gnn/checkpoint.hpp"
#include "explore/harness/runner.hpp"
#include "explore/rl/train.hpp"

namespace {

using namespace explore;

harness::ExperimentConfig load_config(const std::string& path) {
  if (path.empty()) return {};
  return harness::parse_config_file(path);
}

std::vector<PolicyKind> parse_policies(const std::vector<std::string>& specs) {
  std::vector<PolicyKind> out;
  out.reserve(specs.size());
  for (const auto& s : specs) out.push_back(PolicyKind::parse(s));
  return out;
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  std::ofstream os(dir + "/" + name);
  if (!os) throw std::runtime_error("cannot write " + dir + "/" + name);
  return os;
}

int cmd_train(const std::string& config_path, const std::string& algo,
              std::uint64_t seed, const std::string& out_dir) {
  harness::ExperimentConfig cfg = load_config(config_path);
  if (!out_dir.empty()) cfg.eval.out_dir = out_dir;

  const rl::Algorithm algorithm =
      algo == "dqn" ? rl::Algorithm::DQN : rl::Algorithm::A2C;
  gnn::LayerKind kind = algorithm == rl::Algorithm::DQN ? gnn::LayerKind::GCN
                                                        : gnn::LayerKind::GGNN;
  if (cfg.gnn == "gcn") kind = gnn::LayerKind::GCN;
  if (cfg.gnn == "ggnn") kind = gnn::LayerKind::GGNN;

  std::ofstream log = open_out(cfg.eval.out_dir, "training_log.csv");
  const rl::TrainResult result =
      rl::train(cfg.episode, cfg.train, algorithm, kind, seed, cfg.eval.out_dir,
                &log, &std::cout);

  gnn::save_checkpoint_file(result.params, cfg.eval.out_dir + "/policy_final.ckpt");
  if (result.value_params) {
    gnn::save_checkpoint_file(*result.value_params,
                              cfg.eval.out_dir + "/value_final.ckpt");
  }
  std::cout << "trained " << result.total_decisions << " decisions over "
            << result.episodes.size() << " episodes; checkpoint at "
            << cfg.eval.out_dir << "/policy_final.ckpt\n";
  return 0;
}

int cmd_evaluate(const std::string& config_path, const std::string& policy_spec,
                 const std::string& out_dir) {
  harness::ExperimentConfig cfg = load_config(config_path);
  if (!out_dir.empty()) cfg.eval.out_dir = out_dir;
  cfg.eval.finalize();

  const PolicyKind policy = PolicyKind::parse(policy_spec);
  const harness::PolicyRuntime rt = harness::PolicyRuntime::make(policy);

  std::vector<harness::TrialMetrics> trials;
  std::ofstream timing = open_out(cfg.eval.out_dir, "timing.csv");
  timing << "policy,seed,mean_decision_time_s\n";
  timing.precision(17);
  for (int k = 0; k < cfg.eval.trials; ++k) {
    const std::uint64_t seed = cfg.eval.seeds[k];
    harness::TrialMetrics m = harness::run_trial(cfg, rt, seed);
    auto os = open_out(cfg.eval.out_dir,
                       "trial_" + policy.name() + "_" + std::to_string(seed) +
                           ".csv");
    harness::write_metrics_csv(m, os);
    timing << m.policy << ',' << m.seed << ',' << m.mean_decision_seconds << '\n';
    trials.push_back(std::move(m));
  }
  auto summary = open_out(cfg.eval.out_dir, "summary.csv");
  harness::write_summary_csv(trials, summary);
  std::cout << "evaluated " << trials.size() << " trials of " << policy.name()
            << " into " << cfg.eval.out_dir << '\n';
  return 0;
}

int cmd_compare(const std::string& config_path,
                const std::vector<std::string>& policy_specs,
                const std::string& out_dir) {
  harness::ExperimentConfig cfg = load_config(config_path);
  if (!out_dir.empty()) cfg.eval.out_dir = out_dir;

  const auto policies = parse_policies(policy_specs);
  const harness::CompareReport report = harness::compare_policies(cfg, policies);
  const auto files = harness::emit_plot_data(report, cfg.eval.out_dir);
  for (const auto& f : files) std::cout << "wrote " << f << '\n';
  for (const auto& [name, count] : report.excluded) {
    if (count > 0) {
      std::cout << "excluded " << count << ' ' << name
                << " trial(s) after SLAM non-convergence\n";
    }
  }
  return 0;
}

int cmd_bench(const std::string& config_path,
              const std::vector<std::string>& policy_specs,
              const std::string& out_dir) {
  harness::ExperimentConfig cfg = load_config(config_path);
  if (!out_dir.empty()) cfg.eval.out_dir = out_dir;

  const auto policies = parse_policies(policy_specs);
  const auto rows =
      harness::benchmark_decision_time(cfg, policies, cfg.eval.map_sizes);
  const std::string path = harness::emit_timing_data(rows, cfg.eval.out_dir);
  harness::write_timing_csv(rows, std::cout);
  std::cout << "wrote " << path << '\n';
  return 0;
}

int cmd_replay(const std::string& config_path, const std::string& policy_spec,
               std::uint64_t seed, const std::string& out_dir) {
  harness::ExperimentConfig cfg = load_config(config_path);
  if (!out_dir.empty()) cfg.eval.out_dir = out_dir;

  const PolicyKind policy = PolicyKind::parse(policy_spec);
  std::filesystem::create_directories(cfg.eval.out_dir);

  // re-run the trial, dumping the exploration graph and map state at every
  // decision so external tooling can render the run
  const harness::TrialMetrics m = harness::run_trial(
      cfg, policy, seed, [&](const Episode& ep, int decision) {
        auto gos = open_out(cfg.eval.out_dir,
                            "graph_" + std::to_string(decision) + ".txt");
        save_graph(ep.graph(), gos);
        auto occ = open_out(cfg.eval.out_dir, "occupancy.txt");
        save_occupancy(ep.grid(), occ);
        auto vmo = open_out(cfg.eval.out_dir, "virtual_map.txt");
        save_virtual_map(ep.virtual_map(), vmo);
      });

  auto os = open_out(cfg.eval.out_dir, "replay_metrics.csv");
  harness::write_metrics_csv(m, os);
  std::cout << "replayed " << m.total_decisions << " decisions (coverage "
            << m.coverage << ") into " << cfg.eval.out_dir << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph-based exploration benchmark"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string algo = "dqn";
  std::string policy_spec = "nearest";
  std::vector<std::string> policy_specs;
  std::uint64_t seed = 0;

  auto* train = app.add_subcommand("train", "Train a policy with DQN or A2C");
  train->add_option("--config", config_path, "config file");
  train->add_option("--algo", algo, "dqn | a2c")
      ->check(CLI::IsMember({"dqn", "a2c"}));
  train->add_option("--seed", seed, "training master seed");
  train->add_option("--out", out_dir, "output directory");

  auto* evaluate = app.add_subcommand("evaluate", "Run trials of one policy");
  evaluate->add_option("--config", config_path, "config file");
  evaluate->add_option("--policy", policy_spec,
                       "nearest | random | em | learned:<ckpt>");
  evaluate->add_option("--out", out_dir, "output directory");

  auto* compare = app.add_subcommand("compare", "Compare several policies");
  compare->add_option("--config", config_path, "config file");
  compare
      ->add_option("--policy", policy_specs,
                   "repeatable: nearest | random | em | learned:<ckpt>")
      ->expected(-1);
  compare->add_option("--out", out_dir, "output directory");

  auto* bench = app.add_subcommand("bench-time",
                                   "Decision-time benchmark across map sizes");
  bench->add_option("--config", config_path, "config file");
  bench
      ->add_option("--policy", policy_specs,
                   "repeatable: nearest | random | em | learned:<ckpt>")
      ->expected(-1);
  bench->add_option("--out", out_dir, "output directory");

  auto* replay = app.add_subcommand("replay", "Re-run one trial from its seed");
  replay->add_option("--config", config_path, "config file");
  replay->add_option("--policy", policy_spec,
                     "nearest | random | em | learned:<ckpt>");
  replay->add_option("--seed", seed, "trial seed");
  replay->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return cmd_train(config_path, algo, seed, out_dir);
    if (evaluate->parsed()) return cmd_evaluate(config_path, policy_spec, out_dir);
    if (compare->parsed()) return cmd_compare(config_path, policy_specs, out_dir);
    if (bench->parsed()) return cmd_bench(config_path, policy_specs, out_dir);
    if (replay->parsed()) return cmd_replay(config_path, policy_spec, seed, out_dir);
  } catch (const explore::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
