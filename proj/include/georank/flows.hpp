#pragma once

#include "georank/embedded.hpp"
#include "georank/tags.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace georank {

struct FlowSource {
  Geometry geometry = Geometry::EmbeddedPsd;
  Metric metric = Metric::Euclidean;
};

// The (geometry, metric) pairs whose induced flows are compared in X-space.
std::vector<FlowSource> supported_flow_sources();
bool is_supported_flow_source(const FlowSource& s);

// dX/dt = -Dl(Z)[grad h(Z)] for a quotient source, -grad f(X) for an embedded one.
Mat flow_field(const EmbeddedPoint& pt, const Objective& obj, const FlowSource& source);

struct FlowTrace {
  FlowSource source;
  Eigen::Index rank = 0;
  std::vector<double> times;
  std::vector<Mat> states;
  bool degenerate = false;  // rank collapse stopped the run; states hold the partial trace
  std::string message;
};

// Classical RK4 in ambient coordinates, each stage re-truncated to rank r.
FlowTrace integrate_flow(const EmbeddedPoint& X0, const Objective& obj, const FlowSource& source,
                         double T, double dt);

struct FlowComparison {
  std::vector<double> times;
  std::vector<double> deviations;  // ||X_A(t) - X_B(t)||_F
  double max_deviation = 0.0;
  bool degenerate = false;
};

FlowComparison compare_flows(const EmbeddedPoint& X0, const Objective& obj, const FlowSource& a,
                             const FlowSource& b, double T, double dt);

// P_U grad f P_U (PSD) or P_U grad f P_V (general): the term separating the embedded field from
// the first quotient geometry's field.
Mat q1_residual_term(const EmbeddedPoint& pt, const Objective& obj);

struct FieldDifference {
  std::vector<double> diff_norm;      // ||F_a - F_b||
  std::vector<double> residual_norm;  // ||residual term||
  double max_mismatch = 0.0;          // max ||(F_a - F_b) - residual||
};

// F_a - F_b compared with the residual term at every state of a trace (a embedded, b the
// matching first quotient geometry).
FieldDifference field_difference_along(const FlowTrace& trace, const Objective& obj,
                                       const FlowSource& a, const FlowSource& b);

// Rows "t,x_11,x_21,..." (column-major vec).
void write_trace_csv(const FlowTrace& trace, std::ostream& os);

}  // namespace georank
