#pragma once

#include "georank/numerics.hpp"
#include "georank/objectives.hpp"

#include <vector>

namespace georank {

enum class Kind { Psd, General };

// Rank-r point with cached factors. For the PSD kind V aliases U.
struct EmbeddedPoint {
  Kind kind = Kind::General;
  Mat X;
  Mat U, Sigma, V;
  Mat Uperp, Vperp;
  Eigen::Index rank() const { return U.cols(); }
};

// Tangent in block coordinates: ambient = [U Uperp] [[S, D2^T], [D1, 0]] [V Vperp]^T.
// For the PSD kind D2 mirrors D1 and S is symmetric.
struct EmbeddedTangent {
  Kind kind = Kind::General;
  Mat S, D1, D2;
};

EmbeddedPoint embed_point(const Mat& X, Eigen::Index r, Kind kind);

// Rank-r truncation (top eigenpairs for PSD, top singular triplets otherwise).
EmbeddedPoint truncate_point(const Mat& X, Eigen::Index r, Kind kind);

// Point with caller-supplied orthonormal bases of the column and row spaces of X.
EmbeddedPoint point_from_bases(const Mat& X, const Mat& U, const Mat& V, Kind kind);

Mat ambient(const EmbeddedPoint& pt, const EmbeddedTangent& xi);
EmbeddedTangent tangent_project(const EmbeddedPoint& pt, const Mat& Z);

double tangent_inner(const EmbeddedTangent& a, const EmbeddedTangent& b);
EmbeddedTangent tangent_axpy(double a, const EmbeddedTangent& x, const EmbeddedTangent& y);
EmbeddedTangent tangent_zero(const EmbeddedPoint& pt);

EmbeddedTangent riem_grad_embedded(const EmbeddedPoint& pt, const Objective& obj);
double riem_hess_quad_embedded(const EmbeddedPoint& pt, const Objective& obj,
                               const EmbeddedTangent& xi);

EmbeddedPoint retract(const EmbeddedPoint& pt, const EmbeddedTangent& xi, double t);

std::vector<EmbeddedTangent> tangent_basis(const EmbeddedPoint& pt);

Eigen::Index embedded_dim(Kind kind, Eigen::Index p1, Eigen::Index p2, Eigen::Index r);

}  // namespace georank
