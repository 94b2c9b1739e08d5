#include "l12ds/io.hpp"

#include "json_util.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace l12ds {

using detail::json;

namespace {

constexpr const char* kEnsembleFormat = "l12ds-ensemble";
constexpr int kEnsembleVersion = 1;

json alpha_to_json(const AlphaPolicy& policy) {
  if (const auto* f = std::get_if<FixedAlpha>(&policy)) return {{"kind", "fixed"}, {"value", f->value}};
  const auto& a = std::get<AdaptiveAlpha>(policy);
  return {{"kind", "adaptive"}, {"initial", a.initial}, {"factor", a.factor}, {"period", a.period}, {"cap", a.cap}};
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string ensemble_to_json(const MeasurementEnsemble& e) {
  const MatrixXd& a = e.matrix.entries;
  if (!a.allFinite() || !e.b.allFinite() || !e.noise.allFinite())
    throw ParameterError("ensemble holds non-finite values and cannot be serialized");
  std::vector<double> row_major;
  row_major.reserve(static_cast<std::size_t>(a.size()));
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) row_major.push_back(a(i, j));

  json j;
  j["format"] = kEnsembleFormat;
  j["version"] = kEnsembleVersion;
  j["matrix"] = {{"kind", matrix_kind_name(e.matrix.kind)},
                 {"rows", a.rows()},
                 {"cols", a.cols()},
                 {"F", e.matrix.refinement},
                 {"seed", e.matrix.seed},
                 {"entries", row_major}};
  j["truth"] = {{"scheme", signal_scheme_name(e.truth.scheme)},
                {"x0", detail::vector_to_json(e.truth.x0)},
                {"support", e.truth.support}};
  j["noise"] = {{"law", detail::noise_to_json(e.noise_law)},
                {"seed", e.noise_seed},
                {"e", detail::vector_to_json(e.noise)}};
  j["b"] = detail::vector_to_json(e.b);
  return j.dump();
}

MeasurementEnsemble ensemble_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (j.at("format").get<std::string>() != kEnsembleFormat) throw ConfigError("not an ensemble file");
    if (j.at("version").get<int>() != kEnsembleVersion) throw ConfigError("unsupported ensemble version");

    const json& jm = j.at("matrix");
    const auto rows = jm.at("rows").get<Index>();
    const auto cols = jm.at("cols").get<Index>();
    const auto entries = jm.at("entries").get<std::vector<double>>();
    if (rows < 1 || cols < 1 || static_cast<Index>(entries.size()) != rows * cols)
      throw ConfigError("matrix entries do not match the stated shape");

    SenseMatrix m;
    m.kind = parse_matrix_kind(jm.at("kind").get<std::string>());
    m.refinement = jm.at("F").get<int>();
    m.seed = jm.at("seed").get<std::uint64_t>();
    m.entries = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        entries.data(), rows, cols);

    GroundTruth truth;
    const json& jt = j.at("truth");
    truth.scheme = parse_signal_scheme(jt.at("scheme").get<std::string>());
    truth.x0 = detail::vector_from_json(jt.at("x0"));
    truth.support = jt.at("support").get<std::vector<Index>>();

    const json& jn = j.at("noise");
    MeasurementEnsemble e = assemble(std::move(m), std::move(truth), detail::vector_from_json(jn.at("e")),
                                     detail::noise_from_json(jn.at("law")), jn.at("seed").get<std::uint64_t>());
    // keep the stored observation rather than recomputing it
    e.b = detail::vector_from_json(j.at("b"));
    if (e.b.size() != rows) throw ConfigError("observation length does not match the matrix");
    return e;
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("malformed ensemble file: ") + ex.what());
  } catch (const DimensionError& ex) {
    throw ConfigError(std::string("inconsistent ensemble file: ") + ex.what());
  }
}

void save_ensemble(const MeasurementEnsemble& ensemble, const std::string& path) {
  write_text_file(path, ensemble_to_json(ensemble) + "\n");
}

MeasurementEnsemble load_ensemble(const std::string& path) { return ensemble_from_json(read_text_file(path)); }

std::string solve_result_to_json(const SolveResult& r, Algorithm algo, const SolverConfig& config) {
  json j;
  j["algorithm"] = algorithm_name(algo);
  j["config"] = {{"eta", config.eta},
                 {"lambda", config.lambda},
                 {"beta", config.beta},
                 {"alpha", alpha_to_json(config.alpha)},
                 {"p", config.p},
                 {"max_iter", config.max_iter},
                 {"tol", config.tol},
                 {"refine", config.refine},
                 {"refine_threshold", config.refine_threshold}};
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["feasibility_gap"] = r.feasibility_gap;
  j["objective"] = r.objective;
  j["final_alpha"] = r.final_alpha;
  j["wall_time_s"] = r.wall_time;
  j["x_hat"] = detail::vector_to_json(r.x_hat);
  if (r.x_refined) j["x_refined"] = detail::vector_to_json(*r.x_refined);
  j["primal_residual_trace"] = r.primal_residual_trace;
  return j.dump(2);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
  if (!out) throw ConfigError("failed writing '" + path + "'");
}

}  // namespace l12ds
