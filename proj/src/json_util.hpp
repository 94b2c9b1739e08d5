#pragma once

#include "l12ds/ensemble.hpp"
#include "l12ds/errors.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace l12ds::detail {

using nlohmann::json;

inline json vector_to_json(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

inline Eigen::VectorXd vector_from_json(const json& j) {
  const auto vals = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

inline json noise_to_json(const NoiseLaw& law) {
  if (const auto* g = std::get_if<GaussianNoise>(&law)) return {{"kind", "gaussian"}, {"sigma", g->sigma}};
  if (const auto* s = std::get_if<StableNoise>(&law))
    return {{"kind", "sas"}, {"alpha", s->alpha}, {"scale", s->scale}, {"location", s->location}};
  return {{"kind", "uniform"}, {"half_width", std::get<UniformNoise>(law).half_width}};
}

inline NoiseLaw noise_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  NoiseLaw law;
  if (kind == "gaussian") {
    law = GaussianNoise{j.at("sigma").get<double>()};
  } else if (kind == "sas") {
    law = StableNoise{j.value("alpha", 1.0), j.at("scale").get<double>(), j.value("location", 0.0)};
  } else if (kind == "uniform") {
    law = UniformNoise{j.at("half_width").get<double>()};
  } else {
    throw ConfigError("unknown noise kind '" + kind + "'");
  }
  validate(law);
  return law;
}

}  // namespace l12ds::detail
