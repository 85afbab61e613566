#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "dgdmf/geometry.hpp"
#include "dgdmf/harness.hpp"
#include "dgdmf/solvers.hpp"
#include "dgdmf/svd.hpp"

namespace {

using namespace dgdmf;

int cmd_gen(const std::string& config_path, const std::string& out_override) {
  const ExperimentConfig cfg = ExperimentConfig::from_file(config_path);
  const ResolvedExperiment rx = resolve(cfg);
  const std::filesystem::path out_dir(out_override.empty() ? cfg.output_dir : out_override);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  save_matrix(out_dir / "Y.txt", rx.instance.y);
  save_graph(out_dir / "graph.txt", rx.graph);
  save_matrix(out_dir / "mixing.txt", rx.mixing.weights());
  std::ofstream part(out_dir / "partition.txt");
  if (!part) throw ConfigError("gen: cannot write to " + out_dir.string());
  part << rx.instance.partition.node_count() << '\n';
  for (std::size_t j = 0; j < rx.instance.partition.widths.size(); ++j) {
    part << rx.instance.partition.widths[j]
         << (j + 1 == rx.instance.partition.widths.size() ? '\n' : ' ');
  }
  std::cout << "wrote Y.txt, graph.txt, mixing.txt, partition.txt to " << out_dir.string()
            << "\n";
  return 0;
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> init_seed) {
  const ExperimentConfig cfg = ExperimentConfig::from_file(config_path);
  const int status = run_experiment(cfg, init_seed);
  std::ifstream summary(std::filesystem::path(cfg.output_dir) / "summary.json");
  std::cout << summary.rdbuf();
  return status;
}

int cmd_equiv(const std::string& config_path, int iterations, double row_sum_scale) {
  const ExperimentConfig cfg = ExperimentConfig::from_file(config_path);
  const ResolvedExperiment rx = resolve(cfg);
  MixingMatrix mixing = rx.mixing;
  if (row_sum_scale != 1.0) {
    mixing = MixingMatrix::unchecked(row_sum_scale * rx.mixing.weights());
  }
  const NetworkPoint z0 =
      init_in_ball(rx.dims, rx.run_cfg.rho, cfg.instance.seed + kInitSeedOffset);
  const double deviation =
      equivalence_check(z0, mixing, rx.run_cfg.mu, rx.instance.partition, iterations);
  nlohmann::ordered_json j;
  j["max_rel_deviation"] = deviation;
  j["iterations"] = iterations;
  j["row_sum_scale"] = row_sum_scale;
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_classify(const std::string& u_path, const std::string& v_path, const std::string& y_path,
                 double tol_grad, double tol_saddle) {
  const FactorPair p{load_matrix(u_path), load_matrix(v_path)};
  const DenseMatrix y = load_matrix(y_path);
  const CriticalVerdict verdict = classify_critical(p, y, tol_grad, tol_saddle);
  nlohmann::ordered_json j;
  j["kind"] = critical_kind_name(verdict.kind);
  j["grad_norm"] = verdict.grad_norm;
  j["min_quadform"] = verdict.min_quadform;
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_bounds(const std::string& config_path) {
  const ExperimentConfig raw = ExperimentConfig::from_file(config_path);
  // Bounds are reportable even when mu = auto is infeasible (omega >= 1/2):
  // fall back to a placeholder stepsize for the resolution step.
  ExperimentConfig cfg = raw;
  try {
    std::cout << bounds_json(resolve(cfg));
  } catch (const ConfigError&) {
    cfg.mu_auto = false;
    cfg.mu = 1.0;
    std::cout << bounds_json(resolve(cfg));
  }
  return 0;
}

int cmd_mc(const std::string& config_path, int trials_override) {
  const ExperimentConfig cfg = ExperimentConfig::from_file(config_path);
  const ResolvedExperiment rx = resolve(cfg);
  const int trials = trials_override > 0 ? trials_override : cfg.trials;
  const MonteCarloSummary mc = monte_carlo(rx, trials);
  const std::string text = monte_carlo_json(mc);
  const std::filesystem::path out_dir(cfg.output_dir);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  std::ofstream out(out_dir / "mc_summary.json");
  if (!out) throw ConfigError("mc: cannot write to " + out_dir.string());
  out << text;
  std::cout << text;
  const bool all_in_ball_succeeded =
      mc.success_fraction_in_ball.has_value() && *mc.success_fraction_in_ball == 1.0;
  return all_in_ball_succeeded ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed low-rank matrix factorization simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  auto* gen = app.add_subcommand("gen", "Generate an instance and write its files");
  gen->add_option("-c,--config", config_path, "Experiment config file")->required();
  gen->add_option("-o,--output", out_override, "Output directory (defaults to output_dir)");

  std::string run_config;
  std::uint64_t init_seed_value = 0;
  bool has_init_seed = false;
  auto* run_cmd = app.add_subcommand("run", "Execute one experiment");
  run_cmd->add_option("-c,--config", run_config, "Experiment config file")->required();
  run_cmd->add_option("--init-seed", init_seed_value,
                      "Override the initialization seed (for replaying Monte-Carlo trials)")
      ->each([&](const std::string&) { has_init_seed = true; });

  std::string equiv_config;
  int equiv_iters = 200;
  double row_sum_scale = 1.0;
  auto* equiv = app.add_subcommand("equiv", "Compare the two update engines step by step");
  equiv->add_option("-c,--config", equiv_config, "Experiment config file")->required();
  equiv->add_option("-k,--iters", equiv_iters, "Number of iterations")->check(CLI::PositiveNumber);
  equiv->add_option("--scale-rowsums", row_sum_scale,
                    "Scale the mixing weights to break the unit row-sum assumption");

  std::string u_path, v_path, y_path;
  double tol_grad = -1.0, tol_saddle = -1.0;
  auto* classify = app.add_subcommand("classify", "Classify a factor pair against a data matrix");
  classify->add_option("-u,--u", u_path, "Left factor file")->required();
  classify->add_option("-v,--v", v_path, "Right factor file")->required();
  classify->add_option("-y,--y", y_path, "Data matrix file")->required();
  classify->add_option("--tol-grad", tol_grad, "Gradient tolerance (default 1e-9 (1 + |Y|))");
  classify->add_option("--tol-saddle", tol_saddle, "Saddle tolerance (default 1e-8)");

  std::string bounds_config;
  auto* bounds = app.add_subcommand("bounds", "Print smoothness bounds and stepsize limits");
  bounds->add_option("-c,--config", bounds_config, "Experiment config file")->required();

  std::string mc_config;
  int mc_trials = 0;
  auto* mc = app.add_subcommand("mc", "Monte-Carlo study over random initializations");
  mc->add_option("-c,--config", mc_config, "Experiment config file")->required();
  mc->add_option("-t,--trials", mc_trials, "Override the trial count")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen(config_path, out_override);
    if (run_cmd->parsed()) {
      return cmd_run(run_config, has_init_seed ? std::optional<std::uint64_t>(init_seed_value)
                                               : std::nullopt);
    }
    if (equiv->parsed()) return cmd_equiv(equiv_config, equiv_iters, row_sum_scale);
    if (classify->parsed()) return cmd_classify(u_path, v_path, y_path, tol_grad, tol_saddle);
    if (bounds->parsed()) return cmd_bounds(bounds_config);
    if (mc->parsed()) return cmd_mc(mc_config, mc_trials);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
