#pragma once

#include <json.hpp>
#include <string>

#include "covop/bootstrap.hpp"
#include "covop/models.hpp"
#include "covop/symspace.hpp"

namespace covop {

using nlohmann::json;

namespace detail {

template <typename T>
T require_field(const json& j, const std::string& key, const char* ctx) {
  if (!j.contains(key))
    throw ConfigError(std::string(ctx) + ": missing required key \"" + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string(ctx) + ": key \"" + key + "\" has the wrong type");
  }
}

}  // namespace detail

// ModelSpec <-> flat JSON object:
// {"family":"kl|elliptical|mp","beta":..,"p":..,"scale":..,
//  "score_law":..,"df":..,"eta_law":..,"tau":..}
inline json to_json(const ModelSpec& m) {
  json j;
  j["family"] = family_name(m.family);
  j["beta"] = m.spectrum.beta;
  j["p"] = m.spectrum.p;
  j["scale"] = m.spectrum.scale;
  if (m.family == Family::elliptical) {
    j["eta_law"] = m.eta.name();
    if (m.eta.kind() == EtaLaw::Kind::scaled_negative_binomial) j["tau"] = m.eta.tau();
  } else {
    j["score_law"] = m.score.name();
    if (m.score.kind() == ScoreLaw::Kind::standardized_student_t) j["df"] = m.score.df();
  }
  return j;
}

inline ScoreLaw score_law_from_json(const json& j) {
  const auto name = detail::require_field<std::string>(j, "score_law", "model");
  if (name == "gaussian") return ScoreLaw::gaussian();
  if (name == "standardized_uniform") return ScoreLaw::standardized_uniform();
  if (name == "standardized_exponential") return ScoreLaw::standardized_exponential();
  if (name == "rademacher") return ScoreLaw::rademacher();
  if (name == "standardized_student_t")
    return ScoreLaw::standardized_student_t(detail::require_field<double>(j, "df", "model"));
  throw ConfigError("model: unknown score_law \"" + name + "\"");
}

inline EtaLaw eta_law_from_json(const json& j) {
  const auto name = detail::require_field<std::string>(j, "eta_law", "model");
  if (name == "chi_squared_p") return EtaLaw::chi_squared_p();
  if (name == "gamma_p_1") return EtaLaw::gamma_p_1();
  if (name == "scaled_negative_binomial")
    return EtaLaw::scaled_negative_binomial(detail::require_field<double>(j, "tau", "model"));
  throw ConfigError("model: unknown eta_law \"" + name + "\"");
}

inline ModelSpec model_from_json(const json& j) {
  SpectrumSpec spec;
  spec.beta = detail::require_field<double>(j, "beta", "model");
  spec.p = detail::require_field<int>(j, "p", "model");
  spec.scale = j.value("scale", 1.0);
  const auto family = detail::require_field<std::string>(j, "family", "model");
  if (family == "kl") return ModelSpec::kl(spec, score_law_from_json(j));
  if (family == "mp") return ModelSpec::mp(spec, score_law_from_json(j));
  if (family == "elliptical") return ModelSpec::elliptical(spec, eta_law_from_json(j));
  throw ConfigError("model: unknown family \"" + family + "\"");
}

inline MultiplierLaw multiplier_law_from_string(const std::string& name) {
  if (name == "multinomial_minus_one") return MultiplierLaw::multinomial_minus_one;
  if (name == "gaussian") return MultiplierLaw::gaussian;
  if (name == "rademacher") return MultiplierLaw::rademacher;
  throw ConfigError("law: unknown multiplier law \"" + name + "\"");
}

// SymOperatorRep <-> dense row-major array with a small header.
inline json to_json(const SymOperatorRep& op) {
  json j;
  j["d"] = op.d;
  j["q"] = op.q();
  j["ordering"] = "diag-first";
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(op.q() * op.q()));
  for (Index i = 0; i < op.q(); ++i)
    for (Index c = 0; c < op.q(); ++c) data.push_back(op.rep(i, c));
  j["rep"] = std::move(data);
  return j;
}

inline SymOperatorRep sym_operator_from_json(const json& j) {
  const auto d = detail::require_field<Index>(j, "d", "operator");
  const auto q = detail::require_field<Index>(j, "q", "operator");
  if (j.value("ordering", "diag-first") != std::string("diag-first"))
    throw ConfigError("operator: unsupported coordinate ordering");
  if (q != sym_vec_size(d)) throw ConfigError("operator: q does not match d(d+1)/2");
  const auto data = detail::require_field<std::vector<double>>(j, "rep", "operator");
  if (static_cast<Index>(data.size()) != q * q)
    throw ConfigError("operator: rep array has the wrong length");
  Eigen::MatrixXd rep(q, q);
  for (Index i = 0; i < q; ++i)
    for (Index c = 0; c < q; ++c) rep(i, c) = data[static_cast<std::size_t>(i * q + c)];
  return SymOperatorRep(d, std::move(rep));
}

}  // namespace covop
