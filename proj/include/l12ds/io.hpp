#pragma once

#include "l12ds/ensemble.hpp"
#include "l12ds/solvers.hpp"

#include <string>

namespace l12ds {

/// JSON container holding A (row-major), x0, support, e, b and generation
/// metadata. Doubles are written in shortest round-trip form, so reading a
/// written ensemble reproduces it bit for bit.
std::string ensemble_to_json(const MeasurementEnsemble& ensemble);
MeasurementEnsemble ensemble_from_json(const std::string& text);

void save_ensemble(const MeasurementEnsemble& ensemble, const std::string& path);
MeasurementEnsemble load_ensemble(const std::string& path);

std::string solve_result_to_json(const SolveResult& result, Algorithm algo, const SolverConfig& config);

/// Whole file as a string; throws ConfigError when it cannot be read.
std::string read_text_file(const std::string& path);
/// Throws ConfigError when the file cannot be written.
void write_text_file(const std::string& path, const std::string& text);

/// Round-trip decimal form of a double; "inf", "-inf" and "nan" for
/// non-finite values.
std::string format_double(double v);

}  // namespace l12ds
