#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dgdmf/rng.hpp"
#include "dgdmf/solvers.hpp"

namespace dgdmf {

/// Seed-stream separation: each purpose derives its generator from the
/// master seed by a fixed offset so changing one stage cannot perturb
/// another. Monte-Carlo trial t shifts the init stream by t * kTrialStride.
inline constexpr std::uint64_t kDataSeedOffset = 101;
inline constexpr std::uint64_t kInitSeedOffset = 202;
inline constexpr std::uint64_t kEigSeedOffset = 303;
inline constexpr std::uint64_t kTrialStride = 7919;

/// Relative optimality-gap threshold defining Monte-Carlo success:
/// opt_gap <= kRelOptGapTol * |Y|_F^2.
inline constexpr double kRelOptGapTol = 1e-4;

struct InstanceSpec {
  int rows = 0;        // n
  int cols = 0;        // m
  int rank = 0;        // r
  int nodes = 0;       // J
  GraphKind topology = GraphKind::Ring;
  double edge_prob = 0.0;  // erdos only
  bool lazy = false;       // apply lazy_fix to the mixing matrix
  std::uint64_t seed = 0;

  void validate() const;
};

struct Instance {
  DenseMatrix y;
  DataPartition partition;
};

/// Y = A B^T with A, B filled from a seeded standard-normal stream (A first,
/// row-major, then B), columns split evenly with the remainder on the
/// leading blocks. Deterministic per seed.
Instance gen_instance(const InstanceSpec& spec);

/// Uniform sample from the open radius-rho ball: Gaussian direction,
/// normalized, scaled by rho * u^(1/dim).
std::vector<double> sample_in_ball(int dim, double rho, Rng& rng);

/// Uniform sample from the open ball-norm ball of NetworkPoints.
NetworkPoint init_in_ball(const NetDims& dims, double rho, std::uint64_t seed);

/// Flat key = value experiment configuration. Recognized keys: n, m, r, J,
/// topology, p, seed, mu, rho, max_iters, tol_grad, tol_consensus, trials,
/// output_dir. Unknown keys are errors. mu, rho and tol_grad accept "auto".
/// The topology value takes an optional "+lazy" suffix (e.g. "ring+lazy")
/// requesting the lazy-fixed mixing matrix.
struct ExperimentConfig {
  InstanceSpec instance;
  bool mu_auto = true;
  double mu = 0.0;
  bool rho_auto = true;
  double rho = 0.0;
  bool tol_grad_auto = true;
  double tol_grad = 0.0;
  double tol_consensus = 1e-6;
  long max_iters = 200000;
  int trials = 20;
  std::string output_dir = ".";

  static ExperimentConfig from_stream(std::istream& in);
  static ExperimentConfig from_file(const std::filesystem::path& path);
};

/// Everything needed to execute runs: the instance, mixing matrix, and the
/// fully resolved run parameters (auto values substituted).
struct ResolvedExperiment {
  Instance instance;
  Graph graph;
  MixingMatrix mixing;
  double omega_value = 0.0;
  NetDims dims;
  RunConfig run_cfg;
  double mu_bound = 0.0;  // open stepsize bound used for mu = auto (0 when unused)
  ExperimentConfig config;

  /// Resolved configuration echo in the flat key = value format.
  std::string echo() const;
};

ResolvedExperiment resolve(const ExperimentConfig& cfg);

/// Per-block bound report for the CLI: JSON text with keys l0, l1, l2,
/// omega, lg, mu_generic, mu_mf. The stepsize entries are null when
/// omega >= 1/2. The Lipschitz constant feeding lg and mu_generic is the
/// largest per-block Hessian bound at the resolved radius.
std::string bounds_json(const ResolvedExperiment& rx);

/// Executes one experiment: writes trace.csv, summary.json and resolved.cfg
/// into the output directory. Returns 0 iff the run met the gradient
/// tolerance.
int run_experiment(const ExperimentConfig& cfg,
                   std::optional<std::uint64_t> init_seed_override = std::nullopt);

struct TrialSummary {
  int trial = 0;
  std::uint64_t init_seed = 0;
  TerminalStatus status = TerminalStatus::MaxIters;
  long iters = 0;
  double final_f = 0.0;
  double final_consensus_err = 0.0;
  double final_opt_gap = 0.0;
  bool left_ball_ever = false;
  bool success = false;
};

struct MonteCarloSummary {
  int trials = 0;
  int in_ball_count = 0;
  int success_count = 0;
  std::optional<double> success_fraction_in_ball;  // empty when no trial stayed in the ball
  double left_ball_fraction = 0.0;
  double success_fraction_all = 0.0;
  std::vector<TrialSummary> per_trial;
};

/// Independent initializations of the same instance. A trial succeeds when
/// its final consensus error is within tol_consensus and its optimality gap
/// is within kRelOptGapTol * |Y|_F^2.
MonteCarloSummary monte_carlo(const ResolvedExperiment& rx, int trials);

std::string monte_carlo_json(const MonteCarloSummary& mc);

}  // namespace dgdmf
