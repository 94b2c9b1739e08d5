#pragma once

#include "l12ds/ensemble.hpp"
#include "l12ds/solvers.hpp"
#include "l12ds/theory.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace l12ds {

inline constexpr int kTrialSchemaVersion = 1;

/// Runs body(0..count-1) on `threads` workers. Each index is visited once;
/// callers write results into per-index slots so the outcome does not depend
/// on scheduling.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

struct AlgorithmSetup {
  Algorithm algo = Algorithm::L1AlphaL2;
  std::string label;  ///< CSV name; defaults to algorithm_name(algo)
  SolverConfig config;
  std::optional<double> lambda;  ///< unset: tuned on held-out seeds
  std::optional<double> eta;     ///< unset: mean ||A^T e||_inf of the noise law
};

enum class MetricSet {
  Auto,     ///< full for Gaussian noise, SNR only otherwise
  SnrOnly,  ///< rho^2 columns left as nan
  Full,
};

struct ExperimentConfig {
  std::string name;
  MatrixSpec matrix;
  SignalScheme scheme = SignalScheme::UnitEnergyGaussian;
  std::vector<Index> sparsities;
  std::vector<NoiseLaw> noises;
  std::vector<AlgorithmSetup> algorithms;
  int trials = 100;
  std::uint64_t base_seed = 0;
  std::string output;
  MetricSet metrics = MetricSet::Auto;
  bool refine = false;
  std::optional<double> refine_threshold;  ///< unset: 4 x noise level
  double support_threshold = 1e-3;
  std::vector<double> lambda_grid{1e-4, 1e-3, 1e-2, 1e-1};
  int tuning_trials = 3;
  int eta_trials = 1000;
  bool timing = false;  ///< record wall time; off keeps output byte-stable
};

/// Throws ConfigError on malformed or inconsistent input.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);
void validate(const ExperimentConfig& config);

/// "gaussian:SIGMA", "sas:ALPHA:SCALE[:LOCATION]" or "uniform:HALF_WIDTH".
NoiseLaw parse_noise_law(const std::string& text);
/// "adaptive" or "fixed:VALUE".
AlphaPolicy parse_alpha_policy(const std::string& text);

struct TrialRecord {
  std::string algorithm;
  MatrixKind matrix_kind = MatrixKind::GaussianNormalized;
  Index m = 0;
  Index n = 0;
  int refinement = 1;
  std::string noise_kind;
  double noise_level = 0.0;
  Index s = 0;
  std::uint64_t seed = 0;
  double snr_db = 0.0;
  double rho2 = 0.0;
  double rho2_origin = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  std::size_t iterations = 0;
  double feasibility_gap = 0.0;
  double wall_time_s = 0.0;
  bool failed = false;  ///< solver diverged; metrics are nan
};

struct CellSummary {
  std::string algorithm;
  MatrixKind matrix_kind = MatrixKind::GaussianNormalized;
  Index m = 0;
  Index n = 0;
  int refinement = 1;
  std::string noise_kind;
  double noise_level = 0.0;
  Index s = 0;
  std::size_t trials = 0;
  std::size_t failures = 0;
  double mean_snr_db = 0.0;
  double mean_rho2 = 0.0;
  double mean_rho2_origin = 0.0;
  double mean_precision = 0.0;
  double mean_recall = 0.0;
  double mean_iterations = 0.0;
  double mean_feasibility_gap = 0.0;
};

struct CellSetting {
  std::string algorithm;
  std::string noise_kind;
  double noise_level = 0.0;
  Index s = 0;
  double lambda = 0.0;
  double eta = 0.0;
  bool lambda_tuned = false;
};

struct ExperimentResult {
  std::vector<TrialRecord> trials;
  std::vector<CellSummary> cells;
  std::vector<CellSetting> settings;
  bool any_diverged = false;
};

/// Every (noise, s, algorithm) cell runs `trials` trials on the ensembles of
/// seeds base_seed + k, shared across algorithms. Unset lambdas are picked
/// from `lambda_grid` by the best mean SNR over `tuning_trials` held-out
/// seeds; unset etas are the mean ||A^T e||_inf over `eta_trials` draws.
ExperimentResult run_experiment(const ExperimentConfig& config, unsigned threads = 1);

/// Per-cell arithmetic means over non-failed trials, in first-seen order.
std::vector<CellSummary> aggregate(const std::vector<TrialRecord>& trials);

/// Held-out seed used for tuning draw j.
std::uint64_t tuning_seed(std::uint64_t base_seed, int j);

/// Default Dantzig radius for a matrix/noise pair.
double default_eta(const MatrixSpec& matrix, const NoiseLaw& noise, int trials, std::uint64_t base_seed);

/// Grid value with the best mean SNR on the held-out seeds; ties go to the
/// earlier grid entry.
double tune_lambda(const MatrixSpec& matrix, SignalScheme scheme, Index s, const NoiseLaw& noise,
                   Algorithm algo, SolverConfig config, const std::vector<double>& grid, int tuning_trials,
                   std::uint64_t base_seed);

void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& trials);
std::vector<TrialRecord> read_trials_csv(std::istream& in);
void write_summary_csv(std::ostream& out, const std::vector<CellSummary>& cells);
std::string settings_to_json(const ExperimentConfig& config, const std::vector<CellSetting>& settings);

struct Table1Config {
  Index m = 64;
  Index n = 256;
  int refinement = 10;
  int trials = 10000;
  std::uint64_t base_seed = 0;
  std::vector<NoiseLaw> noises;        ///< default: the six levels of the correlation table
  std::vector<MatrixKind> matrices{MatrixKind::GaussianRaw, MatrixKind::OversampledDCT};
  std::string output;
};

struct Table1Cell {
  NoiseLaw noise;
  MatrixKind matrix = MatrixKind::GaussianRaw;
  double mean_correlation = 0.0;
};

Table1Config parse_table1_config(const std::string& json_text);
std::vector<NoiseLaw> default_table1_noises();
std::vector<Table1Cell> run_table1(const Table1Config& config, unsigned threads = 1);
void write_table1_csv(std::ostream& out, const Table1Config& config, const std::vector<Table1Cell>& cells);

struct TheoryPoint {
  Index s = 9;
  double t = 16.0;
  double alpha = 1.0;
  double delta_lb = 0.1;
  double delta_ub = 0.1;
  double delta_ts = 0.1;
  Index m = 64;
  double eta = 0.01;
  double tail_l1 = 0.0;
};

struct RipProbe {
  MatrixSpec matrix{MatrixKind::GaussianNormalized, 8, 16, 1};
  std::vector<Index> orders{1, 2, 3};
  std::size_t samples = 100000;
  std::uint64_t seed = 0;
};

struct TheoryConfig {
  double remark_t = 16.0;
  double remark_alpha = 1.0;
  std::vector<Index> remark_sparsities{7, 8, 9, 10, 11, 12, 13, 14};
  int delta_grid = 1000;
  std::vector<Index> classical_sparsities{2, 3, 4, 8, 16};
  std::vector<double> classical_t{2.0, 3.0, 4.0, 6.0, 8.0};
  std::vector<double> classical_alpha{0.1, 0.5, 1.0};
  std::vector<TheoryPoint> points{TheoryPoint{}};
  std::optional<RipProbe> rip;
  std::size_t fuzz_cases = 100000;
  std::uint64_t seed = 0;
  std::string output;
};

struct RemarkRow {
  Index s = 0;
  double threshold = 0.0;          ///< from the general condition
  double simplified = 0.0;         ///< (192s - 305 sqrt(s) - 137)/(320s + 113 sqrt(s) + 153)
  double flip = 0.0;               ///< bisected switch point of the condition
  std::size_t grid_disagreements = 0;
  bool hypotheses = false;
};

struct ClassicalRow {
  Index s = 0;
  double t = 0.0;
  double alpha = 0.0;
  double mu = 0.0;
  double threshold = 0.0;
  double threshold_unrounded = 0.0;
};

struct TheoryVerification {
  std::vector<RemarkRow> remark;
  std::vector<ClassicalRow> classical;
  std::vector<TheoryReport> reports;
  std::vector<RipEstimate> rip_exact;
  std::vector<RipEstimate> rip_sampled;
  LemmaFuzzSummary fuzz;
};

/// Throws ConfigError when a classical-RIP sparsity is below 2 or a t lies
/// in (2, 3).
TheoryConfig parse_theory_config(const std::string& json_text);
void validate(const TheoryConfig& config);
TheoryVerification verify_theory(const TheoryConfig& config);
std::string theory_to_json(const TheoryVerification& v);

}  // namespace l12ds
