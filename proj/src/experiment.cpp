#include "l12ds/experiment.hpp"

#include "l12ds/errors.hpp"
#include "l12ds/io.hpp"
#include "l12ds/metrics.hpp"
#include "l12ds/rng.hpp"

#include "json_util.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

namespace l12ds {

using detail::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kEtaStream = 0x657461;  // independent of trial and tuning seeds

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& item : j.items())
    if (!allowed.count(item.key())) throw ConfigError("unknown key '" + item.key() + "' in " + where);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  return parts;
}

double to_number(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw ConfigError("bad number '" + s + "' for " + what);
    return v;
  } catch (const std::logic_error&) {
    throw ConfigError("bad number '" + s + "' for " + what);
  }
}

AlphaPolicy alpha_from_json(const json& j) {
  if (j.is_string()) return parse_alpha_policy(j.get<std::string>());
  reject_unknown_keys(j, {"kind", "value", "initial", "factor", "period", "cap"}, "alpha");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "fixed") return FixedAlpha{j.at("value").get<double>()};
  if (kind == "adaptive") {
    AdaptiveAlpha a;
    a.initial = j.value("initial", a.initial);
    a.factor = j.value("factor", a.factor);
    a.period = j.value("period", a.period);
    a.cap = j.value("cap", a.cap);
    return a;
  }
  throw ConfigError("unknown alpha policy '" + kind + "'");
}

void apply_solver_keys(const json& j, SolverConfig& c) {
  if (j.contains("beta")) c.beta = j.at("beta").get<double>();
  if (j.contains("max_iter")) c.max_iter = j.at("max_iter").get<int>();
  if (j.contains("tol")) c.tol = j.at("tol").get<double>();
  if (j.contains("alpha")) c.alpha = alpha_from_json(j.at("alpha"));
  if (j.contains("p")) c.p = j.at("p").get<double>();
}

bool full_metrics(MetricSet set, const NoiseLaw& noise) {
  if (set == MetricSet::Full) return noise_level(noise) > 0.0;
  if (set == MetricSet::SnrOnly) return false;
  return std::holds_alternative<GaussianNoise>(noise) && noise_level(noise) > 0.0;
}

double mean_snr(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += std::isnan(x) ? -std::numeric_limits<double>::infinity() : x;
  return sum / static_cast<double>(v.size());
}

std::string cell_key(const TrialRecord& r) {
  std::ostringstream k;
  k << r.algorithm << '|' << static_cast<int>(r.matrix_kind) << '|' << r.m << '|' << r.n << '|' << r.refinement
    << '|' << r.noise_kind << '|' << format_double(r.noise_level) << '|' << r.s;
  return k.str();
}

double parse_csv_double(const std::string& s) {
  if (s == "nan") return kNaN;
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  return to_number(s, "csv field");
}

const char* kTrialHeader =
    "algorithm,matrix_kind,m,n,F,noise_kind,noise_level,s,seed,snr_db,rho2,rho2_origin,precision,recall,"
    "iterations,feasibility_gap,wall_time_s";

}  // namespace

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body) {
  threads = std::max(1u, threads);
  if (threads == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next.store(count);
      }
    }
  };
  std::vector<std::thread> pool;
  const auto n = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

NoiseLaw parse_noise_law(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.empty()) throw ConfigError("empty noise specification");
  NoiseLaw law;
  const std::string& kind = parts[0];
  if (kind == "gaussian" && parts.size() == 2) {
    law = GaussianNoise{to_number(parts[1], "sigma")};
  } else if (kind == "uniform" && parts.size() == 2) {
    law = UniformNoise{to_number(parts[1], "half-width")};
  } else if (kind == "sas" && (parts.size() == 3 || parts.size() == 4)) {
    law = StableNoise{to_number(parts[1], "stability index"), to_number(parts[2], "scale"),
                      parts.size() == 4 ? to_number(parts[3], "location") : 0.0};
  } else {
    throw ConfigError("noise must be gaussian:SIGMA, uniform:WIDTH or sas:ALPHA:SCALE[:LOCATION], got '" + text + "'");
  }
  try {
    validate(law);
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
  return law;
}

AlphaPolicy parse_alpha_policy(const std::string& text) {
  if (text == "adaptive") return AdaptiveAlpha{};
  if (text.rfind("fixed:", 0) == 0) {
    const double a = to_number(text.substr(6), "alpha");
    if (!(a > 0.0 && a <= 1.0)) throw ConfigError("fixed alpha must lie in (0, 1], got " + text.substr(6));
    return FixedAlpha{a};
  }
  throw ConfigError("alpha policy must be 'adaptive' or 'fixed:VALUE', got '" + text + "'");
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  ExperimentConfig c;
  try {
    const json j = json::parse(json_text);
    reject_unknown_keys(j,
                        {"name", "matrix", "signal", "noise", "algorithms", "trials", "base_seed", "output",
                         "metrics", "refine", "refine_threshold", "support_threshold", "lambda_grid",
                         "tuning_trials", "eta_trials", "timing", "solver"},
                        "experiment config");
    c.name = j.value("name", std::string{});

    const json& jm = j.at("matrix");
    reject_unknown_keys(jm, {"kind", "m", "n", "F"}, "matrix");
    c.matrix.kind = parse_matrix_kind(jm.at("kind").get<std::string>());
    c.matrix.rows = jm.at("m").get<Index>();
    c.matrix.cols = jm.at("n").get<Index>();
    c.matrix.refinement = jm.value("F", 1);

    const json& js = j.at("signal");
    reject_unknown_keys(js, {"scheme", "s"}, "signal");
    c.scheme = parse_signal_scheme(js.value("scheme", std::string("unit_energy_gaussian")));
    c.sparsities = js.at("s").get<std::vector<Index>>();

    for (const auto& jn : j.at("noise")) c.noises.push_back(detail::noise_from_json(jn));

    SolverConfig shared;
    if (j.contains("solver")) {
      reject_unknown_keys(j.at("solver"), {"beta", "max_iter", "tol", "alpha", "p"}, "solver");
      apply_solver_keys(j.at("solver"), shared);
    }
    for (const auto& ja : j.at("algorithms")) {
      reject_unknown_keys(ja, {"algo", "label", "lambda", "eta", "beta", "max_iter", "tol", "alpha", "p"},
                          "algorithm");
      AlgorithmSetup a;
      a.algo = parse_algorithm(ja.at("algo").get<std::string>());
      a.label = ja.value("label", algorithm_name(a.algo));
      a.config = shared;
      apply_solver_keys(ja, a.config);
      if (ja.contains("lambda") && !ja.at("lambda").is_null()) a.lambda = ja.at("lambda").get<double>();
      if (ja.contains("eta") && !ja.at("eta").is_null()) a.eta = ja.at("eta").get<double>();
      c.algorithms.push_back(std::move(a));
    }

    c.trials = j.value("trials", c.trials);
    c.base_seed = j.value("base_seed", c.base_seed);
    c.output = j.value("output", std::string{});
    const std::string metrics = j.value("metrics", std::string("auto"));
    if (metrics == "auto") {
      c.metrics = MetricSet::Auto;
    } else if (metrics == "snr") {
      c.metrics = MetricSet::SnrOnly;
    } else if (metrics == "full") {
      c.metrics = MetricSet::Full;
    } else {
      throw ConfigError("metrics must be auto, snr or full");
    }
    c.refine = j.value("refine", c.refine);
    if (j.contains("refine_threshold") && !j.at("refine_threshold").is_null())
      c.refine_threshold = j.at("refine_threshold").get<double>();
    c.support_threshold = j.value("support_threshold", c.support_threshold);
    if (j.contains("lambda_grid")) c.lambda_grid = j.at("lambda_grid").get<std::vector<double>>();
    c.tuning_trials = j.value("tuning_trials", c.tuning_trials);
    c.eta_trials = j.value("eta_trials", c.eta_trials);
    c.timing = j.value("timing", c.timing);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed experiment config: ") + e.what());
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
  validate(c);
  return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return parse_experiment_config(read_text_file(path));
}

void validate(const ExperimentConfig& c) {
  if (c.matrix.rows < 1 || c.matrix.cols <= c.matrix.rows) throw ConfigError("matrix needs 1 <= m < n");
  if (c.matrix.refinement < 1) throw ConfigError("refinement factor F must be >= 1");
  if (c.sparsities.empty()) throw ConfigError("signal.s must list at least one sparsity");
  for (Index s : c.sparsities)
    if (s < 1 || s > c.matrix.cols) throw ConfigError("sparsity out of range [1, n]");
  if (c.noises.empty()) throw ConfigError("at least one noise law is required");
  if (c.algorithms.empty()) throw ConfigError("at least one algorithm is required");
  if (c.trials < 1) throw ConfigError("trials must be >= 1");
  if (c.eta_trials < 1) throw ConfigError("eta_trials must be >= 1");
  if (!(c.support_threshold >= 0.0)) throw ConfigError("support_threshold must be >= 0");
  if (c.refine_threshold && !(*c.refine_threshold >= 0.0)) throw ConfigError("refine_threshold must be >= 0");
  bool needs_tuning = false;
  for (const auto& a : c.algorithms) {
    SolverConfig probe = a.config;
    probe.lambda = a.lambda.value_or(1.0);
    probe.eta = a.eta.value_or(0.0);
    try {
      validate(probe, a.algo);
    } catch (const ParameterError& e) {
      throw ConfigError(a.label + ": " + e.what());
    }
    needs_tuning = needs_tuning || !a.lambda;
  }
  if (needs_tuning) {
    if (c.lambda_grid.empty()) throw ConfigError("lambda_grid is empty but some lambda is unset");
    for (double l : c.lambda_grid)
      if (!(l > 0.0)) throw ConfigError("lambda_grid values must be positive");
    if (c.tuning_trials < 1) throw ConfigError("tuning_trials must be >= 1");
  }
}

std::uint64_t tuning_seed(std::uint64_t base_seed, int j) {
  return derive_seed(base_seed, 0x74756e65ULL + static_cast<std::uint64_t>(j));
}

double default_eta(const MatrixSpec& matrix, const NoiseLaw& noise, int trials, std::uint64_t base_seed) {
  if (noise_level(noise) == 0.0) return 0.0;
  return residual_correlation_stat(matrix, noise, trials, derive_seed(base_seed, kEtaStream));
}

double tune_lambda(const MatrixSpec& matrix, SignalScheme scheme, Index s, const NoiseLaw& noise, Algorithm algo,
                   SolverConfig config, const std::vector<double>& grid, int tuning_trials,
                   std::uint64_t base_seed) {
  if (grid.empty()) throw ParameterError("empty lambda grid");
  config.record_trace = false;
  config.refine = false;
  std::vector<MeasurementEnsemble> held_out;
  for (int j = 0; j < tuning_trials; ++j)
    held_out.push_back(make_ensemble(matrix, s, scheme, noise, tuning_seed(base_seed, j)));

  double best = grid.front();
  double best_score = -std::numeric_limits<double>::infinity();
  bool first = true;
  for (double lambda : grid) {
    config.lambda = lambda;
    std::vector<double> snrs;
    for (const auto& e : held_out) {
      try {
        snrs.push_back(snr_db(solve(e, algo, config).x_hat, e.truth.x0));
      } catch (const DivergenceError&) {
        snrs.push_back(kNaN);
      }
    }
    const double score = mean_snr(snrs);
    if (first || score > best_score) {
      best = lambda;
      best_score = score;
      first = false;
    }
  }
  return best;
}

ExperimentResult run_experiment(const ExperimentConfig& config, unsigned threads) {
  validate(config);
  const std::size_t nn = config.noises.size();
  const std::size_t ns = config.sparsities.size();
  const std::size_t na = config.algorithms.size();
  const auto nt = static_cast<std::size_t>(config.trials);

  std::vector<double> noise_eta(nn, kNaN);
  bool any_auto_eta = false;
  for (const auto& a : config.algorithms) any_auto_eta = any_auto_eta || !a.eta;
  if (any_auto_eta) {
    parallel_for(nn, threads, [&](std::size_t i) {
      noise_eta[i] = default_eta(config.matrix, config.noises[i], config.eta_trials, config.base_seed);
    });
  }

  const std::size_t cells = nn * ns * na;
  std::vector<CellSetting> settings(cells);
  std::vector<SolverConfig> cell_config(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    const std::size_t ia = c % na;
    const std::size_t is = (c / na) % ns;
    const std::size_t in = c / (na * ns);
    const auto& setup = config.algorithms[ia];
    CellSetting& st = settings[c];
    st.algorithm = setup.label;
    st.noise_kind = noise_kind_name(config.noises[in]);
    st.noise_level = noise_level(config.noises[in]);
    st.s = config.sparsities[is];
    st.eta = setup.eta ? *setup.eta : noise_eta[in];
    st.lambda = setup.lambda.value_or(kNaN);
    st.lambda_tuned = !setup.lambda;
    cell_config[c] = setup.config;
    cell_config[c].eta = st.eta;
    cell_config[c].record_trace = false;
  }

  parallel_for(cells, threads, [&](std::size_t c) {
    if (!settings[c].lambda_tuned) return;
    const auto& setup = config.algorithms[c % na];
    const auto& noise = config.noises[c / (na * ns)];
    settings[c].lambda = tune_lambda(config.matrix, config.scheme, settings[c].s, noise, setup.algo, cell_config[c],
                                     config.lambda_grid, config.tuning_trials, config.base_seed);
  });
  for (std::size_t c = 0; c < cells; ++c) cell_config[c].lambda = settings[c].lambda;

  ExperimentResult result;
  result.trials.resize(cells * nt);
  parallel_for(cells * nt, threads, [&](std::size_t task) {
    const std::size_t c = task / nt;
    const std::size_t k = task % nt;
    const auto& setup = config.algorithms[c % na];
    const auto& noise = config.noises[c / (na * ns)];
    const std::uint64_t seed = config.base_seed + k;

    TrialRecord& r = result.trials[task];
    r.algorithm = setup.label;
    r.matrix_kind = config.matrix.kind;
    r.m = config.matrix.rows;
    r.n = config.matrix.cols;
    r.refinement = config.matrix.refinement;
    r.noise_kind = noise_kind_name(noise);
    r.noise_level = noise_level(noise);
    r.s = settings[c].s;
    r.seed = seed;

    const auto ensemble = make_ensemble(config.matrix, r.s, config.scheme, noise, seed);
    const bool full = full_metrics(config.metrics, noise);
    SolverConfig sc = cell_config[c];
    sc.refine = config.refine && full;
    sc.refine_threshold = config.refine_threshold.value_or(4.0 * r.noise_level);
    try {
      const SolveResult out = solve(ensemble, setup.algo, sc);
      r.snr_db = snr_db(out.x_hat, ensemble.truth.x0);
      r.rho2_origin = full ? rho2(out.x_hat, ensemble.truth.x0, r.noise_level) : kNaN;
      r.rho2 = full && out.x_refined ? rho2(*out.x_refined, ensemble.truth.x0, r.noise_level) : kNaN;
      const auto score = support_metrics(out.x_hat, ensemble.truth.x0, config.support_threshold);
      r.precision = score.precision;
      r.recall = score.recall;
      r.iterations = out.iterations;
      r.feasibility_gap = out.feasibility_gap;
      r.wall_time_s = config.timing ? out.wall_time : 0.0;
    } catch (const DivergenceError& e) {
      r.failed = true;
      r.snr_db = r.rho2 = r.rho2_origin = r.precision = r.recall = r.feasibility_gap = kNaN;
      r.iterations = e.iteration();
      r.wall_time_s = 0.0;
    }
  });

  for (const auto& r : result.trials) result.any_diverged = result.any_diverged || r.failed;
  result.cells = aggregate(result.trials);
  result.settings = std::move(settings);
  return result;
}

std::vector<CellSummary> aggregate(const std::vector<TrialRecord>& trials) {
  std::vector<CellSummary> out;
  std::map<std::string, std::size_t> index;
  std::vector<std::size_t> ok;
  for (const auto& r : trials) {
    const std::string key = cell_key(r);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, out.size()).first;
      CellSummary c;
      c.algorithm = r.algorithm;
      c.matrix_kind = r.matrix_kind;
      c.m = r.m;
      c.n = r.n;
      c.refinement = r.refinement;
      c.noise_kind = r.noise_kind;
      c.noise_level = r.noise_level;
      c.s = r.s;
      out.push_back(c);
      ok.push_back(0);
    }
    CellSummary& c = out[it->second];
    ++c.trials;
    if (r.failed) {
      ++c.failures;
      continue;
    }
    ++ok[it->second];
    c.mean_snr_db += r.snr_db;
    c.mean_rho2 += r.rho2;
    c.mean_rho2_origin += r.rho2_origin;
    c.mean_precision += r.precision;
    c.mean_recall += r.recall;
    c.mean_iterations += static_cast<double>(r.iterations);
    c.mean_feasibility_gap += r.feasibility_gap;
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    CellSummary& c = out[i];
    const double k = ok[i] > 0 ? static_cast<double>(ok[i]) : kNaN;
    c.mean_snr_db /= k;
    c.mean_rho2 /= k;
    c.mean_rho2_origin /= k;
    c.mean_precision /= k;
    c.mean_recall /= k;
    c.mean_iterations /= k;
    c.mean_feasibility_gap /= k;
  }
  return out;
}

void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& trials) {
  out << kTrialHeader << '\n';
  for (const auto& r : trials) {
    out << r.algorithm << ',' << matrix_kind_name(r.matrix_kind) << ',' << r.m << ',' << r.n << ',' << r.refinement
        << ',' << r.noise_kind << ',' << format_double(r.noise_level) << ',' << r.s << ',' << r.seed << ','
        << format_double(r.snr_db) << ',' << format_double(r.rho2) << ',' << format_double(r.rho2_origin) << ','
        << format_double(r.precision) << ',' << format_double(r.recall) << ',' << r.iterations << ','
        << format_double(r.feasibility_gap) << ',' << format_double(r.wall_time_s) << '\n';
  }
}

std::vector<TrialRecord> read_trials_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTrialHeader) throw ConfigError("unexpected trial CSV header");
  std::vector<TrialRecord> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 17) throw ConfigError("trial CSV row has " + std::to_string(f.size()) + " fields");
    TrialRecord r;
    r.algorithm = f[0];
    r.matrix_kind = parse_matrix_kind(f[1]);
    r.m = std::stol(f[2]);
    r.n = std::stol(f[3]);
    r.refinement = std::stoi(f[4]);
    r.noise_kind = f[5];
    r.noise_level = parse_csv_double(f[6]);
    r.s = std::stol(f[7]);
    r.seed = std::stoull(f[8]);
    r.snr_db = parse_csv_double(f[9]);
    r.rho2 = parse_csv_double(f[10]);
    r.rho2_origin = parse_csv_double(f[11]);
    r.precision = parse_csv_double(f[12]);
    r.recall = parse_csv_double(f[13]);
    r.iterations = std::stoull(f[14]);
    r.feasibility_gap = parse_csv_double(f[15]);
    r.wall_time_s = parse_csv_double(f[16]);
    r.failed = std::isnan(r.snr_db);
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_summary_csv(std::ostream& out, const std::vector<CellSummary>& cells) {
  out << "algorithm,matrix_kind,m,n,F,noise_kind,noise_level,s,trials,failures,mean_snr_db,mean_rho2,"
         "mean_rho2_origin,mean_precision,mean_recall,mean_iterations,mean_feasibility_gap\n";
  for (const auto& c : cells) {
    out << c.algorithm << ',' << matrix_kind_name(c.matrix_kind) << ',' << c.m << ',' << c.n << ','
        << c.refinement << ',' << c.noise_kind << ',' << format_double(c.noise_level) << ',' << c.s << ','
        << c.trials << ',' << c.failures << ',' << format_double(c.mean_snr_db) << ','
        << format_double(c.mean_rho2) << ',' << format_double(c.mean_rho2_origin) << ','
        << format_double(c.mean_precision) << ',' << format_double(c.mean_recall) << ','
        << format_double(c.mean_iterations) << ',' << format_double(c.mean_feasibility_gap) << '\n';
  }
}

std::string settings_to_json(const ExperimentConfig& config, const std::vector<CellSetting>& settings) {
  json j;
  j["schema_version"] = kTrialSchemaVersion;
  j["name"] = config.name;
  j["base_seed"] = config.base_seed;
  j["trials"] = config.trials;
  j["lambda_grid"] = config.lambda_grid;
  j["tuning_seeds"] = json::array();
  for (int k = 0; k < config.tuning_trials; ++k) j["tuning_seeds"].push_back(tuning_seed(config.base_seed, k));
  j["cells"] = json::array();
  for (const auto& s : settings) {
    j["cells"].push_back({{"algorithm", s.algorithm},
                          {"noise_kind", s.noise_kind},
                          {"noise_level", s.noise_level},
                          {"s", s.s},
                          {"lambda", s.lambda},
                          {"lambda_tuned", s.lambda_tuned},
                          {"eta", s.eta}});
  }
  return j.dump(2);
}

std::vector<NoiseLaw> default_table1_noises() {
  return {GaussianNoise{1e-2}, GaussianNoise{5e-2}, StableNoise{1.0, 5e-3, 0.0},
          StableNoise{1.0, 1e-2, 0.0}, UniformNoise{1e-1}, UniformNoise{5e-1}};
}

Table1Config parse_table1_config(const std::string& json_text) {
  Table1Config c;
  c.noises = default_table1_noises();
  try {
    const json j = json::parse(json_text);
    reject_unknown_keys(j, {"name", "m", "n", "F", "trials", "base_seed", "noise", "matrices", "output"},
                        "table1 config");
    c.m = j.value("m", c.m);
    c.n = j.value("n", c.n);
    c.refinement = j.value("F", c.refinement);
    c.trials = j.value("trials", c.trials);
    c.base_seed = j.value("base_seed", c.base_seed);
    c.output = j.value("output", std::string{});
    if (j.contains("noise")) {
      c.noises.clear();
      for (const auto& jn : j.at("noise")) c.noises.push_back(detail::noise_from_json(jn));
    }
    if (j.contains("matrices")) {
      c.matrices.clear();
      for (const auto& jm : j.at("matrices")) c.matrices.push_back(parse_matrix_kind(jm.get<std::string>()));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed table1 config: ") + e.what());
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
  if (c.m < 1 || c.n <= c.m) throw ConfigError("table1 needs 1 <= m < n");
  if (c.trials < 1) throw ConfigError("trials must be >= 1");
  if (c.refinement < 1) throw ConfigError("refinement factor F must be >= 1");
  return c;
}

std::vector<Table1Cell> run_table1(const Table1Config& config, unsigned threads) {
  std::vector<Table1Cell> cells;
  for (const auto& noise : config.noises)
    for (MatrixKind kind : config.matrices) cells.push_back(Table1Cell{noise, kind, 0.0});
  parallel_for(cells.size(), threads, [&](std::size_t i) {
    const MatrixSpec spec{cells[i].matrix, config.m, config.n, config.refinement};
    cells[i].mean_correlation = residual_correlation_stat(spec, cells[i].noise, config.trials, config.base_seed);
  });
  return cells;
}

void write_table1_csv(std::ostream& out, const Table1Config& config, const std::vector<Table1Cell>& cells) {
  out << "noise_kind,noise_level,matrix_kind,m,n,F,trials,mean_correlation\n";
  for (const auto& c : cells) {
    out << noise_kind_name(c.noise) << ',' << format_double(noise_level(c.noise)) << ','
        << matrix_kind_name(c.matrix) << ',' << config.m << ',' << config.n << ',' << config.refinement << ','
        << config.trials << ',' << format_double(c.mean_correlation) << '\n';
  }
}

TheoryConfig parse_theory_config(const std::string& json_text) {
  TheoryConfig c;
  try {
    const json j = json::parse(json_text);
    reject_unknown_keys(j,
                        {"name", "remark_t", "remark_alpha", "remark_s", "delta_grid", "classical_s",
                         "classical_t", "classical_alpha", "points", "rip", "fuzz_cases", "seed", "output"},
                        "theory config");
    c.remark_t = j.value("remark_t", c.remark_t);
    c.remark_alpha = j.value("remark_alpha", c.remark_alpha);
    if (j.contains("remark_s")) c.remark_sparsities = j.at("remark_s").get<std::vector<Index>>();
    c.delta_grid = j.value("delta_grid", c.delta_grid);
    if (j.contains("classical_s")) c.classical_sparsities = j.at("classical_s").get<std::vector<Index>>();
    if (j.contains("classical_t")) c.classical_t = j.at("classical_t").get<std::vector<double>>();
    if (j.contains("classical_alpha")) c.classical_alpha = j.at("classical_alpha").get<std::vector<double>>();
    if (j.contains("points")) {
      c.points.clear();
      for (const auto& jp : j.at("points")) {
        reject_unknown_keys(jp, {"s", "t", "alpha", "delta_lb", "delta_ub", "delta_ts", "m", "eta", "tail_l1"},
                            "theory point");
        TheoryPoint p;
        p.s = jp.value("s", p.s);
        p.t = jp.value("t", p.t);
        p.alpha = jp.value("alpha", p.alpha);
        p.delta_lb = jp.value("delta_lb", p.delta_lb);
        p.delta_ub = jp.value("delta_ub", p.delta_ub);
        p.delta_ts = jp.value("delta_ts", p.delta_ts);
        p.m = jp.value("m", p.m);
        p.eta = jp.value("eta", p.eta);
        p.tail_l1 = jp.value("tail_l1", p.tail_l1);
        c.points.push_back(p);
      }
    }
    if (j.contains("rip")) {
      const json& jr = j.at("rip");
      reject_unknown_keys(jr, {"kind", "m", "n", "F", "orders", "samples", "seed"}, "rip");
      RipProbe r;
      r.matrix.kind = parse_matrix_kind(jr.value("kind", std::string("gaussian_normalized")));
      r.matrix.rows = jr.value("m", r.matrix.rows);
      r.matrix.cols = jr.value("n", r.matrix.cols);
      r.matrix.refinement = jr.value("F", r.matrix.refinement);
      if (jr.contains("orders")) r.orders = jr.at("orders").get<std::vector<Index>>();
      r.samples = jr.value("samples", r.samples);
      r.seed = jr.value("seed", r.seed);
      c.rip = r;
    }
    c.fuzz_cases = j.value("fuzz_cases", c.fuzz_cases);
    c.seed = j.value("seed", c.seed);
    c.output = j.value("output", std::string{});
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed theory config: ") + e.what());
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
  validate(c);
  return c;
}

void validate(const TheoryConfig& c) {
  if (!(c.remark_alpha > 0.0 && c.remark_alpha <= 1.0)) throw ConfigError("remark_alpha must lie in (0, 1]");
  if (c.delta_grid < 2) throw ConfigError("delta_grid must be >= 2");
  for (Index s : c.classical_sparsities)
    if (s < 2) throw ConfigError("classical-RIP sparsities must be >= 2, got " + std::to_string(s));
  for (double t : c.classical_t)
    if (!(t == 2.0 || t >= 3.0)) throw ConfigError("classical-RIP t must be 2 or >= 3");
  for (double a : c.classical_alpha)
    if (!(a > 0.0 && a <= 1.0)) throw ConfigError("classical alpha must lie in (0, 1]");
  for (Index s : c.remark_sparsities) {
    try {
      common_delta_constants(s, c.remark_t, c.remark_alpha, 0.0, 0.0);
    } catch (const ParameterError& e) {
      throw ConfigError(e.what());
    }
  }
  if (c.rip) {
    if (c.rip->matrix.rows < 1 || c.rip->matrix.cols <= c.rip->matrix.rows)
      throw ConfigError("rip matrix needs 1 <= m < n");
    for (Index s : c.rip->orders)
      if (s < 1 || s > c.rip->matrix.cols) throw ConfigError("rip order out of range");
  }
}

TheoryVerification verify_theory(const TheoryConfig& config) {
  validate(config);
  TheoryVerification v;

  for (Index s : config.remark_sparsities) {
    RemarkRow row;
    row.s = s;
    const double rs = std::sqrt(static_cast<double>(s));
    const double sd = static_cast<double>(s);
    row.simplified = (192.0 * sd - 305.0 * rs - 137.0) / (320.0 * sd + 113.0 * rs + 153.0);
    row.threshold = common_delta_threshold(s, config.remark_t, config.remark_alpha);
    auto holds = [&](double d) { return check_condition_31(s, config.remark_t, config.remark_alpha, d, d).holds; };
    row.hypotheses = common_delta_constants(s, config.remark_t, config.remark_alpha, 0.0, 0.0).hypotheses_hold();
    double lo = 0.0;
    double hi = 1.0;
    if (holds(lo) && !holds(hi)) {
      for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (holds(mid) ? lo : hi) = mid;
      }
      row.flip = hi;
    } else {
      row.flip = kNaN;
    }
    for (int g = 0; g < config.delta_grid; ++g) {
      const double d = static_cast<double>(g) / static_cast<double>(config.delta_grid - 1);
      if (holds(d) != (d < row.simplified)) ++row.grid_disagreements;
    }
    v.remark.push_back(row);
  }

  for (Index s : config.classical_sparsities)
    for (double t : config.classical_t)
      for (double a : config.classical_alpha)
        v.classical.push_back(ClassicalRow{s, t, a, classical_mu(s, t, a), classical_threshold(s, t, a),
                                           classical_threshold_unrounded(s, t, a)});

  for (const auto& p : config.points)
    v.reports.push_back(
        theory_report(p.s, p.t, p.alpha, p.delta_lb, p.delta_ub, p.delta_ts, p.m, p.eta, p.tail_l1));

  if (config.rip) {
    const auto a = gen_matrix(config.rip->matrix, config.rip->seed);
    for (Index s : config.rip->orders) {
      try {
        v.rip_exact.push_back(rip_l2l2_exact(a.entries, s));
      } catch (const BudgetError&) {
      }
      v.rip_sampled.push_back(rip_l2l1_sampled(a.entries, s, config.rip->samples, config.rip->seed));
    }
  }

  v.fuzz = fuzz_lemmas(config.fuzz_cases, config.seed);
  return v;
}

std::string theory_to_json(const TheoryVerification& v) {
  auto num = [](double x) { return std::isfinite(x) ? json(x) : json(format_double(x)); };
  json j;
  j["remark"] = json::array();
  for (const auto& r : v.remark)
    j["remark"].push_back({{"s", r.s},
                           {"threshold", num(r.threshold)},
                           {"simplified", num(r.simplified)},
                           {"flip", num(r.flip)},
                           {"grid_disagreements", r.grid_disagreements},
                           {"hypotheses", r.hypotheses}});
  j["classical"] = json::array();
  for (const auto& r : v.classical)
    j["classical"].push_back({{"s", r.s},
                              {"t", r.t},
                              {"alpha", r.alpha},
                              {"mu", num(r.mu)},
                              {"threshold", num(r.threshold)},
                              {"threshold_unrounded", num(r.threshold_unrounded)}});
  j["points"] = json::array();
  for (const auto& r : v.reports)
    j["points"].push_back({{"s", r.s},
                           {"t", r.t},
                           {"alpha", r.alpha},
                           {"a", num(r.a_val)},
                           {"b", num(r.b_val)},
                           {"rho", num(r.rho)},
                           {"tau", num(r.tau)},
                           {"mu", num(r.mu_val)},
                           {"condition_l2l1", r.condition_31_holds},
                           {"condition_l2l2", r.condition_41_holds},
                           {"bound_l2l1", num(r.bound_31)},
                           {"bound_l2l2", num(r.bound_41)}});
  j["rip_exact"] = json::array();
  for (const auto& r : v.rip_exact) j["rip_exact"].push_back({{"order", r.order}, {"delta", r.delta}});
  j["rip_sampled"] = json::array();
  for (const auto& r : v.rip_sampled)
    j["rip_sampled"].push_back({{"order", r.order},
                                {"delta_lb", r.delta_lb},
                                {"delta_ub", r.delta_ub},
                                {"samples", r.samples},
                                {"estimate", r.is_estimate}});
  j["lemma_fuzz"] = {{"cases", v.fuzz.cases},
                     {"applicable", v.fuzz.applicable},
                     {"violations", v.fuzz.violations},
                     {"worst_relative_slack", num(v.fuzz.worst_slack)},
                     {"worst_check", v.fuzz.worst_check}};
  return j.dump(2);
}

}  // namespace l12ds
