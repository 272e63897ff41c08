#include "georank/flows.hpp"

#include "georank/quotient.hpp"
#include "georank/transport.hpp"

#include <cmath>
#include <iomanip>

namespace georank {

std::vector<FlowSource> supported_flow_sources() {
  return {{Geometry::EmbeddedPsd, Metric::Euclidean},   {Geometry::PsdQ1, Metric::Q1TwoGram},
          {Geometry::PsdQ2, Metric::Q2TwoBSqId},        {Geometry::EmbeddedGeneral, Metric::Euclidean},
          {Geometry::GenQ1, Metric::G1CrossGrams},      {Geometry::GenQ3, Metric::G3GramId}};
}

bool is_supported_flow_source(const FlowSource& s) {
  for (const auto& t : supported_flow_sources())
    if (t.geometry == s.geometry && t.metric == s.metric) return true;
  return false;
}

Mat flow_field(const EmbeddedPoint& pt, const Objective& obj, const FlowSource& source) {
  require(is_supported_flow_source(source), ErrorCode::Enumeration,
          "flow source " + to_string(source.geometry) + " / " + to_string(source.metric) +
              " is not supported");
  require(kind_of(source.geometry) == pt.kind, ErrorCode::Variant,
          "flow source does not match the point kind");
  if (!is_quotient(source.geometry)) return -ambient(pt, riem_grad_embedded(pt, obj));
  const QuotientPoint Z = lift_point(pt, source.geometry);
  const HorizontalVector g = riem_grad_quotient(Z, obj, source.metric);
  return -ambient(Z.base, forward_map(Z, g, source.metric, false));
}

FlowTrace integrate_flow(const EmbeddedPoint& X0, const Objective& obj, const FlowSource& source,
                         double T, double dt) {
  require(T > 0.0 && dt > 0.0 && std::isfinite(T) && std::isfinite(dt), ErrorCode::Precondition,
          "integrate_flow: horizon and step must be positive");
  const long n = std::lround(T / dt);
  require(n >= 1 && std::abs(n * dt - T) <= 1e-9 * T, ErrorCode::Precondition,
          "integrate_flow: horizon must be a multiple of the step");
  require(is_supported_flow_source(source), ErrorCode::Enumeration, "unsupported flow source");
  const Eigen::Index r = X0.rank();
  const Kind kind = X0.kind;
  FlowTrace tr;
  tr.source = source;
  tr.rank = r;
  tr.times.reserve(n + 1);
  tr.states.reserve(n + 1);
  tr.times.push_back(0.0);
  tr.states.push_back(X0.X);
  EmbeddedPoint pt = X0;
  auto stage = [&](const Mat& base, const Mat& k, double a) {
    Mat Y = base + a * k;
    if (kind == Kind::Psd) Y = sym(Y);
    return truncate_point(Y, r, kind);
  };
  try {
    for (long s = 1; s <= n; ++s) {
      const Mat k1 = flow_field(pt, obj, source);
      const Mat k2 = flow_field(stage(pt.X, k1, 0.5 * dt), obj, source);
      const Mat k3 = flow_field(stage(pt.X, k2, 0.5 * dt), obj, source);
      const Mat k4 = flow_field(stage(pt.X, k3, dt), obj, source);
      pt = stage(pt.X, k1 + 2.0 * k2 + 2.0 * k3 + k4, dt / 6.0);
      tr.times.push_back(s * dt);
      tr.states.push_back(pt.X);
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Rank) throw;
    tr.degenerate = true;
    tr.message = e.what();
  }
  return tr;
}

FlowComparison compare_flows(const EmbeddedPoint& X0, const Objective& obj, const FlowSource& a,
                             const FlowSource& b, double T, double dt) {
  const FlowTrace ta = integrate_flow(X0, obj, a, T, dt);
  const FlowTrace tb = integrate_flow(X0, obj, b, T, dt);
  FlowComparison c;
  c.degenerate = ta.degenerate || tb.degenerate;
  const size_t n = std::min(ta.states.size(), tb.states.size());
  for (size_t i = 0; i < n; ++i) {
    c.times.push_back(ta.times[i]);
    const double dev = (ta.states[i] - tb.states[i]).norm();
    c.deviations.push_back(dev);
    c.max_deviation = std::max(c.max_deviation, dev);
  }
  return c;
}

Mat q1_residual_term(const EmbeddedPoint& pt, const Objective& obj) {
  const Mat G = obj.egrad(pt.X);
  return pt.U * (pt.U.transpose() * G * pt.V) * pt.V.transpose();
}

FieldDifference field_difference_along(const FlowTrace& trace, const Objective& obj,
                                       const FlowSource& a, const FlowSource& b) {
  require(kind_of(a.geometry) == kind_of(b.geometry), ErrorCode::Variant,
          "field comparison needs sources of the same kind");
  FieldDifference fd;
  const Kind kind = kind_of(a.geometry);
  for (const Mat& X : trace.states) {
    const EmbeddedPoint pt = truncate_point(X, trace.rank, kind);
    const Mat diff = flow_field(pt, obj, a) - flow_field(pt, obj, b);
    const Mat res = q1_residual_term(pt, obj);
    fd.diff_norm.push_back(diff.norm());
    fd.residual_norm.push_back(res.norm());
    fd.max_mismatch = std::max(fd.max_mismatch, (diff - res).norm());
  }
  return fd;
}

void write_trace_csv(const FlowTrace& trace, std::ostream& os) {
  os << std::setprecision(17);
  for (size_t i = 0; i < trace.states.size(); ++i) {
    os << trace.times[i];
    const Mat& X = trace.states[i];
    for (Eigen::Index j = 0; j < X.cols(); ++j)
      for (Eigen::Index k = 0; k < X.rows(); ++k) os << ',' << X(k, j);
    os << '\n';
  }
}

}  // namespace georank
