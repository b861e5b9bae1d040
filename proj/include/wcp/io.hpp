#ifndef WCP_IO_HPP
#define WCP_IO_HPP

#include <cmath>
#include <cstdio>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wcp/contact.hpp"
#include "wcp/errors.hpp"
#include "wcp/weights.hpp"

namespace wcp {

/// Float with 17 significant digits; "inf"/"-inf"/"nan" for non-finite values.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline void check_keys(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& what) {
  require(j.is_object(), what + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    require(allowed.count(key) != 0, "unknown key '" + key + "' in " + what);
  }
}

inline double get_number(const nlohmann::json& j, const char* key, const std::string& what) {
  require(j.contains(key), what + " is missing '" + key + "'");
  require(j.at(key).is_number(), what + " field '" + key + "' must be a number");
  return j.at(key).get<double>();
}

}  // namespace detail

/// Parses a tagged weight law, e.g. {"kind":"bernoulli","p":0.5}.
inline WeightDistribution distribution_from_json(const nlohmann::json& j) {
  const std::string what = "dist";
  require(j.is_object() && j.contains("kind") && j.at("kind").is_string(), "dist needs a string 'kind'");
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "constant") {
    detail::check_keys(j, {"kind", "value"}, what);
    return WeightDistribution::constant(detail::get_number(j, "value", what));
  }
  if (kind == "bernoulli") {
    detail::check_keys(j, {"kind", "p", "scale"}, what);
    const double scale = j.contains("scale") ? detail::get_number(j, "scale", what) : 1.0;
    return WeightDistribution::bernoulli(detail::get_number(j, "p", what), scale);
  }
  if (kind == "uniform") {
    detail::check_keys(j, {"kind", "a", "b"}, what);
    return WeightDistribution::uniform(detail::get_number(j, "a", what), detail::get_number(j, "b", what));
  }
  if (kind == "power_law") {
    detail::check_keys(j, {"kind", "alpha"}, what);
    return WeightDistribution::power_law(detail::get_number(j, "alpha", what));
  }
  if (kind == "discrete") {
    detail::check_keys(j, {"kind", "values", "probs"}, what);
    require(j.contains("values") && j.at("values").is_array(), "discrete dist needs a 'values' array");
    require(j.contains("probs") && j.at("probs").is_array(), "discrete dist needs a 'probs' array");
    std::vector<double> values, probs;
    for (const auto& v : j.at("values")) {
      require(v.is_number(), "discrete values must be numbers");
      values.push_back(v.get<double>());
    }
    for (const auto& p : j.at("probs")) {
      require(p.is_number(), "discrete probs must be numbers");
      probs.push_back(p.get<double>());
    }
    return WeightDistribution::discrete(std::move(values), std::move(probs));
  }
  throw ValidationError("unknown dist kind '" + kind + "'");
}

inline nlohmann::json distribution_to_json(const WeightDistribution& d) {
  return std::visit(
      [](const auto& k) -> nlohmann::json {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, weight_kind::Constant>) {
          return {{"kind", "constant"}, {"value", k.value}};
        } else if constexpr (std::is_same_v<T, weight_kind::Bernoulli>) {
          return {{"kind", "bernoulli"}, {"p", k.p}, {"scale", k.scale}};
        } else if constexpr (std::is_same_v<T, weight_kind::Uniform>) {
          return {{"kind", "uniform"}, {"a", k.a}, {"b", k.b}};
        } else if constexpr (std::is_same_v<T, weight_kind::PowerLaw>) {
          return {{"kind", "power_law"}, {"alpha", k.alpha}};
        } else {
          return {{"kind", "discrete"}, {"values", k.values}, {"probs", k.probs}};
        }
      },
      d.kind());
}

/// JSON number, or the strings "inf" / "-inf" / "nan" where JSON has no literal.
inline nlohmann::json json_number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

inline void write_event_log(std::ostream& os, const std::vector<EventLogEntry>& log) {
  os << "time,vertex,event\n";
  for (const auto& e : log) os << format_double(e.time) << ",\"" << e.vertex << "\"," << e.event << '\n';
}

}  // namespace wcp

#endif  // WCP_IO_HPP
