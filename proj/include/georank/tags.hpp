#pragma once

#include "georank/embedded.hpp"

#include <string>
#include <vector>

namespace georank {

enum class Geometry { EmbeddedPsd, EmbeddedGeneral, PsdQ1, PsdQ2, GenQ1, GenQ2, GenQ3 };

// Closed enumeration of weight choices. Names spell out the weight matrices, with the
// pair order (V, W) for the two-factor Stiefel geometries and (W, V) for gen-q1.
enum class Metric {
  Euclidean,       // embedded geometries
  Q1Identity,      // psd-q1: W_Y = I
  Q1TwoGram,       // psd-q1: W_Y = 2 Y^T Y
  Q1InvGram,       // psd-q1: W_Y = (Y^T Y)^{-1}
  Q2IdInvB,        // psd-q2: (V_B, W_B) = (I, B^{-1})
  Q2TwoBSqId,      // psd-q2: (V_B, W_B) = (2 B^2, I)
  G1InvGrams,      // gen-q1: (W, V) = ((L^T L)^{-1}, (R^T R)^{-1})
  G1CrossGrams,    // gen-q1: (W, V) = (R^T R, L^T L)
  G2IdInvB,        // gen-q2: (V_B, W_B) = (I, B^{-1})
  G3IdId,          // gen-q3: (V_Y, W_Y) = (I, I)
  G3IdInvGram,     // gen-q3: (V_Y, W_Y) = (I, (Y^T Y)^{-1})
  G3GramId,        // gen-q3: (V_Y, W_Y) = (Y^T Y, I)
};

std::string to_string(Geometry g);
std::string to_string(Metric m);
Geometry parse_geometry(const std::string& s);
Metric parse_metric(Geometry g, const std::string& s);

std::vector<Geometry> all_geometries();
std::vector<Metric> metrics_for(Geometry g);
bool metric_belongs(Geometry g, Metric m);
bool is_quotient(Geometry g);
Kind kind_of(Geometry g);

// Manifold dimension (tangent or horizontal space) for the geometry.
Eigen::Index manifold_dim(Geometry g, Eigen::Index p1, Eigen::Index p2, Eigen::Index r);

}  // namespace georank
