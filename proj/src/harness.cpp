#include "dgdmf/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "dgdmf/geometry.hpp"
#include "dgdmf/svd.hpp"

#include "json.hpp"

namespace dgdmf {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

long parse_long(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long v = std::stol(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: bad integer for key '" + key + "': " + value);
  }
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: bad number for key '" + key + "': " + value);
  }
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void InstanceSpec::validate() const {
  if (rows < 1 || cols < 1) {
    throw ConfigError("instance: matrix dimensions must be positive");
  }
  if (rank < 1 || rank > std::min(rows, cols)) {
    throw ConfigError("instance: rank must be in [1, min(n, m)]");
  }
  if (nodes < 2) {
    throw ConfigError("instance: need at least 2 nodes");
  }
  if (nodes > cols) {
    throw ConfigError("instance: every node must own at least one column (J <= m)");
  }
  if (topology == GraphKind::Erdos && !(edge_prob > 0.0 && edge_prob <= 1.0)) {
    throw ConfigError("instance: erdos topology needs p in (0, 1]");
  }
}

Instance gen_instance(const InstanceSpec& spec) {
  spec.validate();
  Rng rng(spec.seed + kDataSeedOffset);
  DenseMatrix a(spec.rows, spec.rank);
  for (double& v : a.values()) v = rng.gaussian();
  DenseMatrix b(spec.cols, spec.rank);
  for (double& v : b.values()) v = rng.gaussian();
  DenseMatrix y = matmul_nt(a, b);
  DataPartition partition = DataPartition::even_split(y, spec.nodes);
  return Instance{std::move(y), std::move(partition)};
}

std::vector<double> sample_in_ball(int dim, double rho, Rng& rng) {
  if (dim < 1) {
    throw DomainError("sample_in_ball: dimension must be positive");
  }
  if (!(rho > 0.0)) {
    throw DomainError("sample_in_ball: radius must be positive");
  }
  std::vector<double> v(static_cast<std::size_t>(dim));
  double norm = 0.0;
  while (norm == 0.0) {
    norm = 0.0;
    for (double& x : v) {
      x = rng.gaussian();
      norm += x * x;
    }
    norm = std::sqrt(norm);
  }
  const double radius = rho * std::pow(rng.uniform_open(), 1.0 / static_cast<double>(dim));
  const double scale = radius / norm;
  for (double& x : v) x *= scale;
  return v;
}

NetworkPoint init_in_ball(const NetDims& dims, double rho, std::uint64_t seed) {
  Rng rng(seed);
  NetworkPoint z = NetworkPoint::zeros(dims);
  // Gaussian direction over all blocks, normalized in the ball norm, then
  // scaled to a uniformly distributed radius.
  for (auto& c : z.copies) {
    for (double& x : c.values()) x = rng.gaussian();
  }
  for (auto& l : z.locals) {
    for (double& x : l.values()) x = rng.gaussian();
  }
  const double norm = ball_norm(z);
  if (norm == 0.0) {
    return init_in_ball(dims, rho, seed + 1);
  }
  const double radius = rho * std::pow(rng.uniform_open(), 1.0 / static_cast<double>(dims.total_dim()));
  const double scale = radius / norm;
  for (auto& c : z.copies) {
    for (double& x : c.values()) x *= scale;
  }
  for (auto& l : z.locals) {
    for (double& x : l.values()) x *= scale;
  }
  return z;
}

ExperimentConfig ExperimentConfig::from_stream(std::istream& in) {
  ExperimentConfig cfg;
  std::map<std::string, std::string> kv;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key or value");
    }
    if (!kv.emplace(key, value).second) {
      throw ConfigError("config: duplicate key '" + key + "'");
    }
  }

  bool have_n = false, have_m = false, have_r = false, have_j = false, have_topology = false,
       have_seed = false;
  for (const auto& [key, value] : kv) {
    if (key == "n") {
      cfg.instance.rows = static_cast<int>(parse_long(key, value));
      have_n = true;
    } else if (key == "m") {
      cfg.instance.cols = static_cast<int>(parse_long(key, value));
      have_m = true;
    } else if (key == "r") {
      cfg.instance.rank = static_cast<int>(parse_long(key, value));
      have_r = true;
    } else if (key == "J") {
      cfg.instance.nodes = static_cast<int>(parse_long(key, value));
      have_j = true;
    } else if (key == "topology") {
      std::string name = value;
      const std::string suffix = "+lazy";
      if (name.size() > suffix.size() && name.ends_with(suffix)) {
        cfg.instance.lazy = true;
        name = name.substr(0, name.size() - suffix.size());
      }
      try {
        cfg.instance.topology = parse_graph_kind(name);
      } catch (const DomainError& e) {
        throw ConfigError(std::string("config: ") + e.what());
      }
      have_topology = true;
    } else if (key == "p") {
      cfg.instance.edge_prob = parse_double(key, value);
    } else if (key == "seed") {
      cfg.instance.seed = static_cast<std::uint64_t>(parse_long(key, value));
      have_seed = true;
    } else if (key == "mu") {
      if (value == "auto") {
        cfg.mu_auto = true;
      } else {
        cfg.mu_auto = false;
        cfg.mu = parse_double(key, value);
      }
    } else if (key == "rho") {
      if (value == "auto") {
        cfg.rho_auto = true;
      } else {
        cfg.rho_auto = false;
        cfg.rho = parse_double(key, value);
      }
    } else if (key == "max_iters") {
      cfg.max_iters = parse_long(key, value);
    } else if (key == "tol_grad") {
      if (value == "auto") {
        cfg.tol_grad_auto = true;
      } else {
        cfg.tol_grad_auto = false;
        cfg.tol_grad = parse_double(key, value);
      }
    } else if (key == "tol_consensus") {
      cfg.tol_consensus = parse_double(key, value);
    } else if (key == "trials") {
      cfg.trials = static_cast<int>(parse_long(key, value));
    } else if (key == "output_dir") {
      cfg.output_dir = value;
    } else {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  }
  if (!have_n || !have_m || !have_r || !have_j || !have_topology || !have_seed) {
    throw ConfigError("config: required keys are n, m, r, J, topology, seed");
  }
  cfg.instance.validate();
  if (cfg.max_iters < 0) throw ConfigError("config: max_iters must be nonnegative");
  if (cfg.trials < 1) throw ConfigError("config: trials must be positive");
  if (!cfg.mu_auto && !(cfg.mu > 0.0)) throw ConfigError("config: mu must be positive");
  if (!cfg.rho_auto && !(cfg.rho > 0.0)) throw ConfigError("config: rho must be positive");
  if (!cfg.tol_grad_auto && !(cfg.tol_grad > 0.0)) {
    throw ConfigError("config: tol_grad must be positive");
  }
  if (!(cfg.tol_consensus > 0.0)) throw ConfigError("config: tol_consensus must be positive");
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("config: cannot open " + path.string());
  }
  return from_stream(in);
}

ResolvedExperiment resolve(const ExperimentConfig& cfg) {
  ResolvedExperiment rx;
  rx.config = cfg;
  rx.instance = gen_instance(cfg.instance);
  rx.graph = build_graph(cfg.instance.topology, cfg.instance.nodes, cfg.instance.seed,
                         cfg.instance.edge_prob);
  MixingMatrix mixing = metropolis_weights(rx.graph);
  if (cfg.instance.lazy) {
    mixing = lazy_fix(mixing);
  }
  rx.omega_value = omega(mixing);
  rx.mixing = std::move(mixing);

  rx.dims = NetDims{cfg.instance.nodes, cfg.instance.rows, cfg.instance.rank,
                    rx.instance.partition.widths};

  RunConfig run_cfg;
  run_cfg.rho = cfg.rho_auto ? std::sqrt(4.0 * nuclear_norm(rx.instance.y)) : cfg.rho;
  if (cfg.mu_auto) {
    if (rx.omega_value >= 0.5) {
      throw ConfigError(
          "config: mu = auto requires omega < 1/2, but this mixing matrix has omega = " +
          std::to_string(rx.omega_value) + "; apply the lazy fix (topology = " +
          graph_kind_name(cfg.instance.topology) + "+lazy) or set mu explicitly");
    }
    const auto norms = rx.instance.partition.block_norms();
    rx.mu_bound = stepsize_mf(run_cfg.rho, rx.omega_value, norms);
    run_cfg.mu = run_cfg.safety * rx.mu_bound;
  } else {
    run_cfg.mu = cfg.mu;
  }
  run_cfg.tol_grad =
      cfg.tol_grad_auto ? 1e-9 * (1.0 + frob_norm(rx.instance.y)) : cfg.tol_grad;
  run_cfg.tol_consensus = cfg.tol_consensus;
  run_cfg.max_iters = cfg.max_iters;
  run_cfg.seed = cfg.instance.seed;
  run_cfg.validate();
  rx.run_cfg = run_cfg;
  return rx;
}

std::string ResolvedExperiment::echo() const {
  std::ostringstream out;
  out << "n = " << config.instance.rows << '\n';
  out << "m = " << config.instance.cols << '\n';
  out << "r = " << config.instance.rank << '\n';
  out << "J = " << config.instance.nodes << '\n';
  out << "topology = " << graph_kind_name(config.instance.topology)
      << (config.instance.lazy ? "+lazy" : "") << '\n';
  if (config.instance.topology == GraphKind::Erdos) {
    out << "p = " << format_double(config.instance.edge_prob) << '\n';
  }
  out << "seed = " << config.instance.seed << '\n';
  out << "mu = " << format_double(run_cfg.mu) << '\n';
  out << "rho = " << format_double(run_cfg.rho) << '\n';
  out << "max_iters = " << run_cfg.max_iters << '\n';
  out << "tol_grad = " << format_double(run_cfg.tol_grad) << '\n';
  out << "tol_consensus = " << format_double(run_cfg.tol_consensus) << '\n';
  out << "trials = " << config.trials << '\n';
  out << "output_dir = " << config.output_dir << '\n';
  out << "# omega = " << format_double(omega_value) << '\n';
  if (mu_bound > 0.0) {
    out << "# mu_bound = " << format_double(mu_bound) << '\n';
  }
  return out.str();
}

std::string bounds_json(const ResolvedExperiment& rx) {
  nlohmann::ordered_json j;
  const auto norms = rx.instance.partition.block_norms();
  std::vector<double> l0, l1, l2;
  double worst_l2 = 0.0;
  for (double bn : norms) {
    const BoundsTriple b = local_bounds(rx.run_cfg.rho, bn);
    l0.push_back(b.l0);
    l1.push_back(b.l1);
    l2.push_back(b.l2);
    worst_l2 = std::max(worst_l2, b.l2);
  }
  j["l0"] = l0;
  j["l1"] = l1;
  j["l2"] = l2;
  j["omega"] = rx.omega_value;
  if (rx.omega_value < 0.5) {
    j["lg"] = lipschitz_Lg(worst_l2, rx.omega_value, rx.run_cfg.mu);
    j["mu_generic"] = stepsize_generic(worst_l2, rx.omega_value);
    j["mu_mf"] = stepsize_mf(rx.run_cfg.rho, rx.omega_value, norms);
  } else {
    j["lg"] = nullptr;
    j["mu_generic"] = nullptr;
    j["mu_mf"] = nullptr;
  }
  return j.dump(2) + "\n";
}

int run_experiment(const ExperimentConfig& cfg, std::optional<std::uint64_t> init_seed_override) {
  const ResolvedExperiment rx = resolve(cfg);
  const std::uint64_t init_seed =
      init_seed_override.value_or(cfg.instance.seed + kInitSeedOffset);
  const NetworkPoint z0 = init_in_ball(rx.dims, rx.run_cfg.rho, init_seed);
  const IterateTrace trace =
      run(Engine::DgdLocal, z0, rx.run_cfg, rx.mixing, rx.instance.partition);

  const std::filesystem::path out_dir(cfg.output_dir);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  {
    std::ofstream csv(out_dir / "trace.csv");
    if (!csv) throw ConfigError("run_experiment: cannot write to " + out_dir.string());
    write_trace_csv(csv, trace);
  }
  {
    std::ofstream json_out(out_dir / "summary.json");
    if (!json_out) throw ConfigError("run_experiment: cannot write to " + out_dir.string());
    json_out << summary_json(trace);
  }
  {
    std::ofstream echo_out(out_dir / "resolved.cfg");
    if (!echo_out) throw ConfigError("run_experiment: cannot write to " + out_dir.string());
    echo_out << rx.echo();
  }
  return trace.status == TerminalStatus::GradToleranceMet ? 0 : 1;
}

MonteCarloSummary monte_carlo(const ResolvedExperiment& rx, int trials) {
  if (trials < 1) {
    throw DomainError("monte_carlo: need at least one trial");
  }
  const double y_norm_sq = frob_norm_sq(rx.instance.y);
  MonteCarloSummary mc;
  mc.trials = trials;
  mc.per_trial.reserve(static_cast<std::size_t>(trials));
  for (int t = 0; t < trials; ++t) {
    TrialSummary ts;
    ts.trial = t;
    ts.init_seed = rx.config.instance.seed + kInitSeedOffset +
                   kTrialStride * static_cast<std::uint64_t>(t);
    const NetworkPoint z0 = init_in_ball(rx.dims, rx.run_cfg.rho, ts.init_seed);
    const IterateTrace trace =
        run(Engine::DgdLocal, z0, rx.run_cfg, rx.mixing, rx.instance.partition);
    const TraceRecord& last = trace.final_record();
    ts.status = trace.status;
    ts.iters = trace.iters;
    ts.final_f = last.f_central;
    ts.final_consensus_err = last.consensus_err;
    ts.final_opt_gap = last.opt_gap;
    ts.left_ball_ever = trace.left_ball_ever;
    ts.success = ts.final_consensus_err <= rx.run_cfg.tol_consensus &&
                 ts.final_opt_gap <= kRelOptGapTol * y_norm_sq;
    if (!ts.left_ball_ever) {
      ++mc.in_ball_count;
    }
    if (ts.success) {
      ++mc.success_count;
    }
    mc.per_trial.push_back(ts);
  }
  if (mc.in_ball_count > 0) {
    int in_ball_successes = 0;
    for (const auto& ts : mc.per_trial) {
      if (!ts.left_ball_ever && ts.success) ++in_ball_successes;
    }
    mc.success_fraction_in_ball =
        static_cast<double>(in_ball_successes) / static_cast<double>(mc.in_ball_count);
  }
  mc.left_ball_fraction =
      static_cast<double>(trials - mc.in_ball_count) / static_cast<double>(trials);
  mc.success_fraction_all = static_cast<double>(mc.success_count) / static_cast<double>(trials);
  return mc;
}

std::string monte_carlo_json(const MonteCarloSummary& mc) {
  nlohmann::ordered_json j;
  j["trials"] = mc.trials;
  if (mc.success_fraction_in_ball.has_value()) {
    j["success_fraction_in_ball"] = *mc.success_fraction_in_ball;
  } else {
    j["success_fraction_in_ball"] = nullptr;
  }
  j["left_ball_fraction"] = mc.left_ball_fraction;
  j["success_fraction_all"] = mc.success_fraction_all;
  j["rel_opt_gap_tol"] = kRelOptGapTol;
  nlohmann::ordered_json per_trial = nlohmann::ordered_json::array();
  for (const auto& ts : mc.per_trial) {
    nlohmann::ordered_json t;
    t["trial"] = ts.trial;
    t["init_seed"] = ts.init_seed;
    t["status"] = status_name(ts.status);
    t["iters"] = ts.iters;
    t["final_f"] = ts.final_f;
    t["final_consensus_err"] = ts.final_consensus_err;
    t["final_opt_gap"] = ts.final_opt_gap;
    t["left_ball_ever"] = ts.left_ball_ever;
    t["success"] = ts.success;
    per_trial.push_back(std::move(t));
  }
  j["per_trial"] = std::move(per_trial);
  return j.dump(2) + "\n";
}

}  // namespace dgdmf
