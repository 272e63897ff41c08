#pragma once

#include "georank/embedded.hpp"
#include "georank/objectives.hpp"
#include "georank/tags.hpp"

#include <cmath>
#include <random>
#include <utility>
#include <vector>

namespace georank {

// Factor representative of a point on a quotient manifold.
//   psd-q1: {Y}        psd-q2: {U, B}      gen-q1: {L, R}
//   gen-q2: {U, B, V}  gen-q3: {U, Y}
// `base` is the embedded point X = l(Z) whose bases are used for all block coordinates.
struct QuotientPoint {
  Geometry geom = Geometry::PsdQ1;
  std::vector<Mat> f;
  EmbeddedPoint base;
  Mat P1, P2;  // psd-q1: P1 = U^T Y; gen-q1: P1 = U^T L, P2 = V^T R
  Eigen::Index rank() const { return base.rank(); }
};

// Tuple of ambient components in the total space, laid out like QuotientPoint::f.
struct FactorVector {
  std::vector<Mat> c;

  FactorVector& operator+=(const FactorVector& o);
  FactorVector& operator-=(const FactorVector& o);
  FactorVector& operator*=(double a);
  double frob_inner(const FactorVector& o) const;
  double frob_norm() const { return std::sqrt(frob_inner(*this)); }
};

FactorVector operator+(FactorVector a, const FactorVector& b);
FactorVector operator-(FactorVector a, const FactorVector& b);
FactorVector operator*(double s, FactorVector a);

using HorizontalVector = FactorVector;

Mat represented(Geometry g, const std::vector<Mat>& f);

// Builds a point from factors; the embedded base is derived from the factors.
QuotientPoint make_quotient_point(Geometry g, std::vector<Mat> f);

// Canonical representative of an embedded point; the result keeps `pt` as its base.
QuotientPoint lift_point(const EmbeddedPoint& pt, Geometry g);

bool same_fiber(const QuotientPoint& a, const QuotientPoint& b);

// Weight matrices of the metric at Z. Field meaning by geometry:
//   psd-q1: W = W_Y.  psd-q2, gen-q2, gen-q3: V and W as in the (V, W) pair.
//   gen-q1: W = W_{L,R}, V = V_{L,R}.
struct Weights {
  Mat W, Winv, V, Vinv;
};

Weights metric_weights(const QuotientPoint& Z, Metric m);

// Directional derivatives DW[theta], DV[theta] of the weights.
Weights metric_weights_derivative(const QuotientPoint& Z, Metric m, const FactorVector& theta);

double metric_inner(const QuotientPoint& Z, Metric m, const FactorVector& a, const FactorVector& b);

FactorVector zero_vector(const QuotientPoint& Z);

// Projection of arbitrary ambient components onto the total-space tangent space.
FactorVector total_tangent_project(const QuotientPoint& Z, const FactorVector& eta);
bool is_total_tangent(const QuotientPoint& Z, const FactorVector& eta, double tol = 1e-8);

bool is_horizontal(const QuotientPoint& Z, Metric m, const FactorVector& theta, double tol = 1e-8);

// Direct-sum split theta = vertical + horizontal.
std::pair<FactorVector, FactorVector> vertical_horizontal_split(const QuotientPoint& Z, Metric m,
                                                                const FactorVector& theta);
FactorVector vertical_project(const QuotientPoint& Z, Metric m, const FactorVector& theta);
FactorVector horizontal_project(const QuotientPoint& Z, Metric m, const FactorVector& theta);

// Vertical tangent generated by the group action with infinitesimal generator K
// (skew for the orthogonal actions, arbitrary r x r for gen-q1).
FactorVector vertical_vector(const QuotientPoint& Z, const Mat& K);

// Horizontal vector given by the gradient formula with the Euclidean gradient replaced by G.
HorizontalVector grad_lift(const QuotientPoint& Z, const Mat& G, Metric m);

HorizontalVector riem_grad_quotient(const QuotientPoint& Z, const Objective& obj, Metric m);
double riem_hess_quad_quotient(const QuotientPoint& Z, const Objective& obj, Metric m,
                               const HorizontalVector& theta);

std::vector<HorizontalVector> horizontal_basis(const QuotientPoint& Z, Metric m);
Mat gram_matrix(const QuotientPoint& Z, Metric m, const std::vector<FactorVector>& basis);

// Represented matrix along a total-space curve with velocity theta at t = 0: straight lines
// for vector-space and B factors, QR retraction for Stiefel factors.
Mat represented_along(const QuotientPoint& Z, const FactorVector& theta, double t);
QuotientPoint move_along(const QuotientPoint& Z, const FactorVector& theta, double t);

// Group action on points and vectors: orthogonal O, or invertible M for gen-q1.
QuotientPoint act(const QuotientPoint& Z, const Mat& O);
FactorVector act(const QuotientPoint& Z, const FactorVector& theta, const Mat& O);

void check_metric(Geometry g, Metric m);

// Gaussian total-space vector projected onto the horizontal space.
HorizontalVector random_horizontal(const QuotientPoint& Z, Metric m, std::mt19937_64& rng);

}  // namespace georank
