// Command-line front end: gen, solve, bench, table1, theory.

#include "l12ds/ensemble.hpp"
#include "l12ds/errors.hpp"
#include "l12ds/experiment.hpp"
#include "l12ds/io.hpp"
#include "l12ds/metrics.hpp"
#include "l12ds/solvers.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

using namespace l12ds;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;

struct SolverFlags {
  std::string algo = "l12ds";
  std::string alpha_policy = "adaptive";
  std::optional<double> eta;
  std::optional<double> lambda;
  std::optional<double> p;
  std::optional<double> beta;
  std::optional<int> max_iter;
  std::optional<double> tol;
};

void add_solver_flags(CLI::App* cmd, SolverFlags& f) {
  cmd->add_option("--algo", f.algo, "l1ds, lpds or l12ds")->check(CLI::IsMember({"l1ds", "lpds", "l12ds"}));
  cmd->add_option("--alpha-policy", f.alpha_policy, "fixed:VAL or adaptive");
  cmd->add_option("--eta", f.eta, "Dantzig radius");
  cmd->add_option("--lambda", f.lambda, "penalty weight");
  cmd->add_option("--p", f.p, "exponent of the l_p selector");
  cmd->add_option("--beta", f.beta, "ADMM penalty");
  cmd->add_option("--max-iter", f.max_iter, "iteration cap");
  cmd->add_option("--tol", f.tol, "relative change tolerance");
}

void apply(const SolverFlags& f, SolverConfig& c) {
  if (f.eta) c.eta = *f.eta;
  if (f.lambda) c.lambda = *f.lambda;
  if (f.p) c.p = *f.p;
  if (f.beta) c.beta = *f.beta;
  if (f.max_iter) c.max_iter = *f.max_iter;
  if (f.tol) c.tol = *f.tol;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_text_file(path, text);
  }
}

std::string sibling(const std::string& path, const std::string& suffix) {
  const auto dot = path.rfind('.');
  const auto slash = path.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + suffix;
  return path.substr(0, dot) + suffix;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"l1 - alpha*l2 Dantzig selector toolkit"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "write one measurement ensemble to a JSON file");
  std::string gen_kind = "dct";
  Index gen_m = 64, gen_n = 256, gen_s = 4;
  int gen_f = 10;
  std::string gen_scheme = "unit_energy_gaussian";
  std::string gen_noise = "gaussian:1e-3";
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  gen->add_option("--kind", gen_kind, "gaussian_normalized, gaussian or dct");
  gen->add_option("--m", gen_m, "rows");
  gen->add_option("--n", gen_n, "columns");
  gen->add_option("--F", gen_f, "DCT refinement factor");
  gen->add_option("--s", gen_s, "sparsity");
  gen->add_option("--scheme", gen_scheme, "unit_energy_gaussian or uniform_inflated");
  gen->add_option("--noise", gen_noise, "gaussian:SIGMA, uniform:WIDTH or sas:ALPHA:SCALE[:LOC]");
  gen->add_option("--seed", gen_seed, "seed");
  gen->add_option("--out", gen_out, "output path (stdout if omitted)");

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "solve one ensemble with one algorithm");
  std::string solve_in;
  std::string solve_out;
  bool solve_refine = false;
  std::optional<double> solve_refine_threshold;
  SolverFlags solve_flags;
  solve_cmd->add_option("--in", solve_in, "ensemble file")->required();
  solve_cmd->add_option("--out", solve_out, "result path (stdout if omitted)");
  solve_cmd->add_flag("--refine", solve_refine, "Gauss-Dantzig refit");
  solve_cmd->add_option("--refine-threshold", solve_refine_threshold, "refit threshold (default 4 x noise level)");
  add_solver_flags(solve_cmd, solve_flags);

  // bench
  auto* bench = app.add_subcommand("bench", "Monte-Carlo experiment from a config file");
  std::string bench_config;
  std::optional<std::uint64_t> bench_seed;
  std::optional<int> bench_trials;
  std::string bench_out;
  unsigned bench_threads = 1;
  bool bench_timing = false;
  SolverFlags bench_flags;
  bench->add_option("--config", bench_config, "experiment config")->required();
  bench->add_option("--seed", bench_seed, "base seed override");
  bench->add_option("--trials", bench_trials, "trials per cell override");
  bench->add_option("--out", bench_out, "trial CSV path");
  bench->add_option("--threads", bench_threads, "worker threads");
  bench->add_flag("--timing", bench_timing, "record wall time per trial");
  add_solver_flags(bench, bench_flags);

  // table1
  auto* table1 = app.add_subcommand("table1", "mean ||A^T e||_inf per noise and matrix");
  std::string t1_config;
  std::optional<std::uint64_t> t1_seed;
  std::optional<int> t1_trials;
  std::string t1_out;
  unsigned t1_threads = 1;
  table1->add_option("--config", t1_config, "table1 config");
  table1->add_option("--seed", t1_seed, "base seed override");
  table1->add_option("--trials", t1_trials, "trials override");
  table1->add_option("--out", t1_out, "CSV path");
  table1->add_option("--threads", t1_threads, "worker threads");

  // theory
  auto* theory = app.add_subcommand("theory", "condition thresholds, bounds and lemma fuzzing");
  std::string th_config;
  std::optional<std::uint64_t> th_seed;
  std::optional<std::size_t> th_cases;
  std::string th_out;
  theory->add_option("--config", th_config, "theory config");
  theory->add_option("--seed", th_seed, "fuzzing seed");
  theory->add_option("--trials", th_cases, "lemma fuzz cases");
  theory->add_option("--out", th_out, "JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*gen) {
      const MatrixSpec spec{parse_matrix_kind(gen_kind), gen_m, gen_n, gen_f};
      const auto e = make_ensemble(spec, gen_s, parse_signal_scheme(gen_scheme), parse_noise_law(gen_noise), gen_seed);
      emit(gen_out, ensemble_to_json(e) + "\n");
      return kExitOk;
    }

    if (*solve_cmd) {
      const auto e = load_ensemble(solve_in);
      const Algorithm algo = parse_algorithm(solve_flags.algo);
      SolverConfig cfg;
      cfg.alpha = parse_alpha_policy(solve_flags.alpha_policy);
      if (!solve_flags.eta) {
        cfg.eta = default_eta(MatrixSpec{e.matrix.kind, e.matrix.rows(), e.matrix.cols(), e.matrix.refinement},
                              e.noise_law, 1000, e.noise_seed);
      }
      apply(solve_flags, cfg);
      cfg.refine = solve_refine;
      cfg.refine_threshold = solve_refine_threshold.value_or(4.0 * noise_level(e.noise_law));
      validate(cfg, algo);
      try {
        const auto r = solve(e, algo, cfg);
        emit(solve_out, solve_result_to_json(r, algo, cfg) + "\n");
        std::cerr << "iterations " << r.iterations << (r.converged ? " (converged)" : " (max_iter)")
                  << ", feasibility gap " << r.feasibility_gap << ", eta " << cfg.eta;
        if (e.truth.x0.norm() > 0.0) std::cerr << ", SNR " << snr_db(r.x_hat, e.truth.x0) << " dB";
        std::cerr << '\n';
      } catch (const DivergenceError& ex) {
        std::cerr << "diverged: " << ex.what() << '\n';
        return kExitDiverged;
      }
      return kExitOk;
    }

    if (*bench) {
      auto cfg = load_experiment_config(bench_config);
      if (bench_seed) cfg.base_seed = *bench_seed;
      if (bench_trials) cfg.trials = *bench_trials;
      if (!bench_out.empty()) cfg.output = bench_out;
      cfg.timing = cfg.timing || bench_timing;
      if (bench->count("--algo") > 0) {
        const Algorithm only = parse_algorithm(bench_flags.algo);
        std::vector<AlgorithmSetup> kept;
        for (const auto& a : cfg.algorithms)
          if (a.algo == only) kept.push_back(a);
        if (kept.empty()) {
          AlgorithmSetup a;
          a.algo = only;
          a.label = algorithm_name(only);
          kept.push_back(a);
        }
        cfg.algorithms = kept;
      }
      for (auto& a : cfg.algorithms) {
        if (bench->count("--alpha-policy") > 0) a.config.alpha = parse_alpha_policy(bench_flags.alpha_policy);
        apply(bench_flags, a.config);
        if (bench_flags.eta) a.eta = bench_flags.eta;
        if (bench_flags.lambda) a.lambda = bench_flags.lambda;
      }
      validate(cfg);
      const auto result = run_experiment(cfg, bench_threads);

      std::ostringstream trials;
      write_trials_csv(trials, result.trials);
      std::ostringstream summary;
      write_summary_csv(summary, result.cells);
      if (cfg.output.empty() || cfg.output == "-") {
        std::cout << trials.str();
        std::cerr << summary.str();
      } else {
        write_text_file(cfg.output, trials.str());
        write_text_file(sibling(cfg.output, ".summary.csv"), summary.str());
        write_text_file(sibling(cfg.output, ".settings.json"), settings_to_json(cfg, result.settings) + "\n");
        std::cerr << summary.str();
      }
      return result.any_diverged ? kExitDiverged : kExitOk;
    }

    if (*table1) {
      Table1Config cfg = t1_config.empty() ? parse_table1_config("{}") : parse_table1_config(read_text_file(t1_config));
      if (t1_seed) cfg.base_seed = *t1_seed;
      if (t1_trials) cfg.trials = *t1_trials;
      if (!t1_out.empty()) cfg.output = t1_out;
      if (cfg.trials < 1) throw ConfigError("trials must be >= 1");
      const auto cells = run_table1(cfg, t1_threads);
      std::ostringstream out;
      write_table1_csv(out, cfg, cells);
      emit(cfg.output, out.str());
      return kExitOk;
    }

    if (*theory) {
      TheoryConfig cfg = th_config.empty() ? parse_theory_config("{}") : parse_theory_config(read_text_file(th_config));
      if (th_seed) cfg.seed = *th_seed;
      if (th_cases) cfg.fuzz_cases = *th_cases;
      if (!th_out.empty()) cfg.output = th_out;
      const auto v = verify_theory(cfg);
      emit(cfg.output, theory_to_json(v) + "\n");
      std::cerr << "lemma fuzz: " << v.fuzz.violations << " violations in " << v.fuzz.applicable
                << " applicable cases\n";
      return v.fuzz.violations == 0 ? kExitOk : kExitFailure;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ParameterError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}
