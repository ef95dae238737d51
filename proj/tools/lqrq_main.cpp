// lqrq: run the cart-pole Q-learning experiments from the command line.
//
//   lqrq exp1     [--config F] [--seed N] [--out DIR] [--set key=value]...
//   lqrq exp2     ...
//   lqrq riccati  ...
//   lqrq simulate ...
//   lqrq sweep    ... [--runs N] [--jobs N]

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "lqrq/config.hpp"
#include "lqrq/harness.hpp"
#include "lqrq/lqr_oracle.hpp"

#ifndef LQRQ_DEFAULT_CONFIG_DIR
#define LQRQ_DEFAULT_CONFIG_DIR "configs"
#endif

namespace {

enum ExitCode : int {
  kOk = 0,
  kRuntimeError = 1,
  kUsageError = 2,
  kConfigError = 3,
  kIoError = 4,
};

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::vector<std::string> sets;
  std::size_t runs = 10;
  std::size_t jobs = 1;
};

namespace fs = std::filesystem;
using namespace lqrq;

ExperimentConfig resolve_config(const CommonOptions& opt, const char* default_file) {
  const fs::path path =
      opt.config_path.empty() ? fs::path(LQRQ_DEFAULT_CONFIG_DIR) / default_file : fs::path(opt.config_path);
  std::vector<std::string> overrides = opt.sets;
  if (opt.seed) overrides.push_back("run.seed=" + std::to_string(*opt.seed));
  return load_config(path, overrides);
}

fs::path out_dir_for(const CommonOptions& opt, const char* subcommand) {
  return opt.out_dir.empty() ? fs::path("lqrq_out") / subcommand : fs::path(opt.out_dir);
}

std::size_t count_events(const RunRecord& rec, EventKind kind) {
  std::size_t n = 0;
  for (const EventRow& e : rec.events) n += e.kind == kind;
  return n;
}

void print_run(const RunRecord& rec, const fs::path& dir) {
  const RunSummary& s = rec.summary;
  std::cout << "seed            " << s.seed << '\n'
            << "final gain      " << format_list(s.final_gain.k) << '\n'
            << "oracle gain     " << format_list(s.oracle_gain.k) << '\n'
            << "final distance  " << format_double(gain_distance(s.final_gain, s.oracle_gain)) << '\n'
            << "converged at    " << (s.converged_at ? format_double(*s.converged_at) + " s" : "never")
            << '\n'
            << "windows solved  " << s.windows_solved << '\n'
            << "episode resets  " << count_events(rec, EventKind::EpisodeReset) << '\n'
            << "divergences     " << count_events(rec, EventKind::DivergenceReset) << '\n'
            << "log             " << dir.string() << '\n';
}

void print_matrix(const char* name, const Matrix& m) {
  std::cout << name << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    std::cout << "  ";
    for (std::size_t j = 0; j < m.cols(); ++j) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%14.6f", m(i, j));
      std::cout << buf;
    }
    std::cout << '\n';
  }
}

void print_riccati(const char* title, const PlantParams& p, const ExperimentConfig& cfg) {
  const LinearModel model = linearize(p, cfg.dt);
  const RiccatiSolution sol = solve_dare(model, cfg.weights);
  std::cout << title << ": m=" << format_double(p.m) << " M_cart=" << format_double(p.M_cart)
            << " l=" << format_double(p.l) << " g=" << format_double(p.g)
            << " dt=" << format_double(cfg.dt) << '\n';
  print_matrix("P", sol.p.matrix());
  print_matrix("M*", sol.m_star.matrix());
  std::cout << "K                " << format_list(sol.k.k) << '\n'
            << "spectral radius  " << format_double(closed_loop_spectral_radius(model, sol.k))
            << '\n'
            << "iterations       " << sol.iterations << '\n'
            << "residual         " << format_double(sol.residual) << "\n\n";
}

int cmd_exp1(const CommonOptions& opt) {
  const ExperimentConfig cfg = resolve_config(opt, "exp1.cfg");
  const fs::path dir = out_dir_for(opt, "exp1");
  const RunRecord rec = run_experiment(cfg);
  write_log(rec, dir);
  print_run(rec, dir);
  return kOk;
}

int cmd_exp2(const CommonOptions& opt) {
  ExperimentConfig cfg = resolve_config(opt, "exp2.cfg");
  const fs::path dir = out_dir_for(opt, "exp2");
  if (!cfg.warm_start_m) {
    // Learn from scratch first, persist, and reload the learned Q-function.
    ExperimentConfig warmup = cfg;
    warmup.fault.reset();
    warmup.warm_start_gain.reset();
    warmup.duration = 60.0;
    const fs::path warm_dir = dir / "warmup";
    const RunRecord warm = run_experiment(warmup);
    write_log(warm, warm_dir);
    std::cout << "warm-up run\n";
    print_run(warm, warm_dir);
    std::cout << '\n';
    cfg.warm_start_m = read_summary(warm_dir).final_m;
  }
  const RunRecord rec = run_experiment(cfg);
  write_log(rec, dir);
  print_run(rec, dir);
  if (cfg.fault && rec.summary.converged_at) {
    std::cout << "re-converged    " << format_double(*rec.summary.converged_at - cfg.fault->time)
              << " s after the fault\n";
  }
  return kOk;
}

int cmd_riccati(const CommonOptions& opt) {
  const ExperimentConfig cfg = resolve_config(opt, "exp1.cfg");
  print_riccati("nominal plant", cfg.plant, cfg);
  if (cfg.fault) {
    print_riccati("after fault", apply_fault(cfg.plant, cfg.fault->scale_m, cfg.fault->scale_l), cfg);
  }
  return kOk;
}

int cmd_simulate(const CommonOptions& opt) {
  ExperimentConfig cfg = resolve_config(opt, "exp1.cfg");
  cfg.learning = false;
  if (!cfg.warm_start_gain) {
    cfg.warm_start_gain = oracle_for(cfg.plant, cfg.weights, cfg.dt).k;
  }
  const fs::path dir = out_dir_for(opt, "simulate");
  const RunRecord rec = run_experiment(cfg);
  write_log(rec, dir);
  print_run(rec, dir);
  return kOk;
}

int cmd_sweep(const CommonOptions& opt) {
  if (opt.runs == 0) throw CLI::ValidationError("--runs", "must be >= 1");
  const ExperimentConfig cfg = resolve_config(opt, "exp1.cfg");
  const fs::path dir = out_dir_for(opt, "sweep");
  const std::vector<SweepResult> results = run_sweep(cfg, opt.runs, opt.jobs, dir);

  std::ofstream table(dir / "sweep.csv", std::ios::binary | std::ios::trunc);
  if (!table) throw IoError("cannot write " + (dir / "sweep.csv").string());
  table << "seed,converged,converged_at,final_distance,episode_resets,divergence_resets\n";
  std::size_t converged = 0;
  for (const SweepResult& r : results) {
    const RunSummary& s = r.summary;
    converged += s.converged_at.has_value();
    table << r.seed << ',' << (s.converged_at ? "true" : "false") << ','
          << (s.converged_at ? format_double(*s.converged_at) : "none") << ','
          << format_double(gain_distance(s.final_gain, s.oracle_gain)) << ',' << r.episode_resets
          << ',' << r.divergence_resets << '\n';
    std::cout << "seed " << r.seed << ": "
              << (s.converged_at ? "converged at " + format_double(*s.converged_at) + " s"
                                 : std::string("not converged"))
              << ", " << r.episode_resets << " episode resets, " << r.divergence_resets
              << " divergences\n";
  }
  if (!table) throw IoError("write failed: " + (dir / "sweep.csv").string());
  std::cout << "converged " << converged << "/" << results.size() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Model-free LQR gain learning for a cart-pole (batch Q-learning)"};
  app.require_subcommand(1);

  CommonOptions opt;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "Configuration file");
    sub->add_option("--seed", opt.seed, "RNG seed (overrides run.seed)");
    sub->add_option("--out", opt.out_dir, "Output directory");
    sub->add_option("--set", opt.sets, "Override a config key: key=value (repeatable)");
  };

  struct Entry {
    CLI::App* sub;
    int (*fn)(const CommonOptions&);
  };
  std::vector<Entry> entries = {
      {app.add_subcommand("exp1", "Learn the gain from scratch"), cmd_exp1},
      {app.add_subcommand("exp2", "Adapt to a mid-run pendulum fault"), cmd_exp2},
      {app.add_subcommand("riccati", "Print the model-based LQR solution"), cmd_riccati},
      {app.add_subcommand("simulate", "Fixed-gain closed loop, no learning"), cmd_simulate},
      {app.add_subcommand("sweep", "Run exp1 over several seeds"), cmd_sweep},
  };
  for (auto& e : entries) add_common(e.sub);
  CLI::App* sweep = entries.back().sub;
  sweep->add_option("--runs", opt.runs, "Number of seeds")->capture_default_str();
  sweep->add_option("--jobs", opt.jobs, "Concurrent runs")->capture_default_str()->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    for (const Entry& e : entries) {
      if (e.sub->parsed()) return e.fn(opt);
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "lqrq: usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const ConfigError& e) {
    std::cerr << "lqrq: config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const IoError& e) {
    std::cerr << "lqrq: I/O error: " << e.what() << '\n';
    return kIoError;
  } catch (const std::exception& e) {
    std::cerr << "lqrq: error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kUsageError;
}
