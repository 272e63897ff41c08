#include "georank/tags.hpp"

#include <algorithm>
#include <utility>

namespace georank {

namespace {

const std::vector<std::pair<Geometry, std::string>>& geometry_names() {
  static const std::vector<std::pair<Geometry, std::string>> names = {
      {Geometry::EmbeddedPsd, "psd-embedded"}, {Geometry::EmbeddedGeneral, "gen-embedded"},
      {Geometry::PsdQ1, "psd-q1"},             {Geometry::PsdQ2, "psd-q2"},
      {Geometry::GenQ1, "gen-q1"},             {Geometry::GenQ2, "gen-q2"},
      {Geometry::GenQ3, "gen-q3"},
  };
  return names;
}

const std::vector<std::pair<Metric, std::string>>& metric_names() {
  static const std::vector<std::pair<Metric, std::string>> names = {
      {Metric::Euclidean, "euclidean"},
      {Metric::Q1Identity, "I"},
      {Metric::Q1TwoGram, "2YtY"},
      {Metric::Q1InvGram, "inv(YtY)"},
      {Metric::Q2IdInvB, "I,inv(B)"},
      {Metric::Q2TwoBSqId, "2B^2,I"},
      {Metric::G1InvGrams, "inv(LtL),inv(RtR)"},
      {Metric::G1CrossGrams, "RtR,LtL"},
      {Metric::G2IdInvB, "I,inv(B)"},
      {Metric::G3IdId, "I,I"},
      {Metric::G3IdInvGram, "I,inv(YtY)"},
      {Metric::G3GramId, "YtY,I"},
  };
  return names;
}

}  // namespace

std::string to_string(Geometry g) {
  for (const auto& [k, v] : geometry_names())
    if (k == g) return v;
  return "?";
}

std::string to_string(Metric m) {
  for (const auto& [k, v] : metric_names())
    if (k == m) return v;
  return "?";
}

Geometry parse_geometry(const std::string& s) {
  for (const auto& [k, v] : geometry_names())
    if (v == s) return k;
  throw Error(ErrorCode::Variant, "unknown geometry '" + s + "'");
}

Metric parse_metric(Geometry g, const std::string& s) {
  for (Metric m : metrics_for(g))
    if (to_string(m) == s) return m;
  throw Error(ErrorCode::Enumeration,
              "metric '" + s + "' is not an enumerated choice for geometry " + to_string(g));
}

std::vector<Geometry> all_geometries() {
  return {Geometry::EmbeddedPsd, Geometry::EmbeddedGeneral, Geometry::PsdQ1, Geometry::PsdQ2,
          Geometry::GenQ1,       Geometry::GenQ2,           Geometry::GenQ3};
}

std::vector<Metric> metrics_for(Geometry g) {
  switch (g) {
    case Geometry::EmbeddedPsd:
    case Geometry::EmbeddedGeneral:
      return {Metric::Euclidean};
    case Geometry::PsdQ1:
      return {Metric::Q1Identity, Metric::Q1TwoGram, Metric::Q1InvGram};
    case Geometry::PsdQ2:
      return {Metric::Q2IdInvB, Metric::Q2TwoBSqId};
    case Geometry::GenQ1:
      return {Metric::G1InvGrams, Metric::G1CrossGrams};
    case Geometry::GenQ2:
      return {Metric::G2IdInvB};
    case Geometry::GenQ3:
      return {Metric::G3IdId, Metric::G3IdInvGram, Metric::G3GramId};
  }
  return {};
}

bool metric_belongs(Geometry g, Metric m) {
  const auto ms = metrics_for(g);
  return std::find(ms.begin(), ms.end(), m) != ms.end();
}

bool is_quotient(Geometry g) {
  return g != Geometry::EmbeddedPsd && g != Geometry::EmbeddedGeneral;
}

Kind kind_of(Geometry g) {
  switch (g) {
    case Geometry::EmbeddedPsd:
    case Geometry::PsdQ1:
    case Geometry::PsdQ2:
      return Kind::Psd;
    default:
      return Kind::General;
  }
}

Eigen::Index manifold_dim(Geometry g, Eigen::Index p1, Eigen::Index p2, Eigen::Index r) {
  if (kind_of(g) == Kind::Psd) return p1 * r - (r * r - r) / 2;
  return (p1 + p2 - r) * r;
}

}  // namespace georank
