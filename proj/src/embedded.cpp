#include "georank/embedded.hpp"

#include <cmath>

namespace georank {

namespace {

constexpr double kRankGap = 1e-10;

// Largest-magnitude entry of each column made positive; the paired columns follow.
void fix_signs(Mat& U, Mat* V) {
  for (Eigen::Index j = 0; j < U.cols(); ++j) {
    Eigen::Index i;
    U.col(j).cwiseAbs().maxCoeff(&i);
    if (U(i, j) < 0.0) {
      U.col(j) *= -1.0;
      if (V) V->col(j) *= -1.0;
    }
  }
}

void check_psd_symmetry(const Mat& X) {
  require(X.rows() == X.cols(), ErrorCode::Dimension, "PSD point must be square");
  const double scale = std::max(X.norm(), 1e-300);
  require((X - X.transpose()).norm() <= 1e-10 * scale, ErrorCode::Symmetry,
          "PSD point is not symmetric");
}

EmbeddedPoint finish(Kind kind, Mat X, Mat U, Mat V) {
  EmbeddedPoint pt;
  pt.kind = kind;
  pt.X = std::move(X);
  pt.U = std::move(U);
  pt.V = kind == Kind::Psd ? pt.U : std::move(V);
  pt.Sigma = pt.U.transpose() * pt.X * pt.V;
  if (kind == Kind::Psd) pt.Sigma = sym(pt.Sigma);
  pt.Uperp = orth_complement(pt.U);
  pt.Vperp = kind == Kind::Psd ? pt.Uperp : orth_complement(pt.V);
  return pt;
}

}  // namespace

Eigen::Index embedded_dim(Kind kind, Eigen::Index p1, Eigen::Index p2, Eigen::Index r) {
  if (kind == Kind::Psd) return p1 * r - r * (r - 1) / 2;
  return (p1 + p2 - r) * r;
}

EmbeddedPoint truncate_point(const Mat& X, Eigen::Index r, Kind kind) {
  require(r >= 1 && r <= std::min(X.rows(), X.cols()), ErrorCode::Dimension,
          "rank must satisfy 1 <= r <= min(p1, p2)");
  require(X.allFinite(), ErrorCode::Evaluation, "point has non-finite entries");
  if (kind == Kind::Psd) {
    check_psd_symmetry(X);
    Eigen::SelfAdjointEigenSolver<Mat> es(sym(X));
    const Eigen::Index p = X.rows();
    const Vec lam = es.eigenvalues().reverse();
    const Mat Q = es.eigenvectors().rowwise().reverse();
    require(lam(r - 1) > 0.0 && lam(r - 1) > kRankGap * std::abs(lam(0)), ErrorCode::Rank,
            "PSD point has fewer than r positive eigenvalues");
    (void)p;
    Mat U = Q.leftCols(r);
    fix_signs(U, nullptr);
    Mat Xr = U * lam.head(r).asDiagonal() * U.transpose();
    return finish(kind, sym(Xr), U, Mat());
  }
  Eigen::JacobiSVD<Mat> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec& s = svd.singularValues();
  require(s(r - 1) > kRankGap * s(0) && s(r - 1) > 0.0, ErrorCode::Rank,
          "point has numerical rank below r");
  Mat U = svd.matrixU().leftCols(r);
  Mat V = svd.matrixV().leftCols(r);
  fix_signs(U, &V);
  Mat Xr = U * s.head(r).asDiagonal() * V.transpose();
  return finish(kind, Xr, U, V);
}

EmbeddedPoint embed_point(const Mat& X, Eigen::Index r, Kind kind) {
  EmbeddedPoint pt = truncate_point(X, r, kind);
  const double scale = std::max(X.norm(), 1e-300);
  require((pt.X - X).norm() <= 1e-9 * scale, ErrorCode::Rank,
          "point is not of rank r (truncation residual too large)");
  return pt;
}

EmbeddedPoint point_from_bases(const Mat& X, const Mat& U, const Mat& V, Kind kind) {
  if (kind == Kind::Psd) check_psd_symmetry(X);
  EmbeddedPoint pt = finish(kind, X, U, V);
  const Vec s = singular_values(pt.Sigma);
  require(s.size() > 0 && s(s.size() - 1) > kRankGap * s(0), ErrorCode::Rank,
          "factor bases give a singular Sigma");
  return pt;
}

Mat ambient(const EmbeddedPoint& pt, const EmbeddedTangent& xi) {
  Mat Z = pt.U * xi.S * pt.V.transpose() + pt.Uperp * xi.D1 * pt.V.transpose() +
          pt.U * xi.D2.transpose() * pt.Vperp.transpose();
  return Z;
}

EmbeddedTangent tangent_project(const EmbeddedPoint& pt, const Mat& Z0) {
  require(Z0.rows() == pt.X.rows() && Z0.cols() == pt.X.cols(), ErrorCode::Dimension,
          "tangent_project: shape mismatch");
  EmbeddedTangent xi;
  xi.kind = pt.kind;
  const Mat Z = pt.kind == Kind::Psd ? sym(Z0) : Z0;
  xi.S = pt.U.transpose() * Z * pt.V;
  if (pt.kind == Kind::Psd) xi.S = sym(xi.S);
  xi.D1 = pt.Uperp.transpose() * Z * pt.V;
  xi.D2 = pt.kind == Kind::Psd ? xi.D1 : Mat(pt.Vperp.transpose() * Z.transpose() * pt.U);
  return xi;
}

double tangent_inner(const EmbeddedTangent& a, const EmbeddedTangent& b) {
  return inner(a.S, b.S) + inner(a.D1, b.D1) + inner(a.D2, b.D2);
}

EmbeddedTangent tangent_axpy(double a, const EmbeddedTangent& x, const EmbeddedTangent& y) {
  EmbeddedTangent out;
  out.kind = y.kind;
  out.S = a * x.S + y.S;
  out.D1 = a * x.D1 + y.D1;
  out.D2 = a * x.D2 + y.D2;
  return out;
}

EmbeddedTangent tangent_zero(const EmbeddedPoint& pt) {
  EmbeddedTangent xi;
  xi.kind = pt.kind;
  const Eigen::Index r = pt.rank();
  xi.S = Mat::Zero(r, r);
  xi.D1 = Mat::Zero(pt.Uperp.cols(), r);
  xi.D2 = Mat::Zero(pt.Vperp.cols(), r);
  return xi;
}

EmbeddedTangent riem_grad_embedded(const EmbeddedPoint& pt, const Objective& obj) {
  require(obj.rows() == pt.X.rows() && obj.cols() == pt.X.cols(), ErrorCode::Dimension,
          "objective shape does not match point");
  return tangent_project(pt, obj.egrad(pt.X));
}

double riem_hess_quad_embedded(const EmbeddedPoint& pt, const Objective& obj,
                               const EmbeddedTangent& xi) {
  const Mat Z = ambient(pt, xi);
  const Vec s = singular_values(pt.Sigma);
  require(s(s.size() - 1) > kRankGap * s(0), ErrorCode::Rank, "Sigma is singular");
  const Mat Sinv = pt.Sigma.partialPivLu().inverse();
  const Mat G = obj.egrad(pt.X);
  const Mat corr = pt.Uperp * xi.D1 * Sinv * xi.D2.transpose() * pt.Vperp.transpose();
  return obj.ehess_quad(pt.X, Z) + 2.0 * inner(G, corr);
}

EmbeddedPoint retract(const EmbeddedPoint& pt, const EmbeddedTangent& xi, double t) {
  require(std::isfinite(t), ErrorCode::Precondition, "retract: step must be finite");
  if (t == 0.0) return pt;
  Mat Y = pt.X + t * ambient(pt, xi);
  if (pt.kind == Kind::Psd) Y = sym(Y);
  return truncate_point(Y, pt.rank(), pt.kind);
}

std::vector<EmbeddedTangent> tangent_basis(const EmbeddedPoint& pt) {
  std::vector<EmbeddedTangent> basis;
  const Eigen::Index r = pt.rank();
  const EmbeddedTangent zero = tangent_zero(pt);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  if (pt.kind == Kind::Psd) {
    for (Eigen::Index j = 0; j < r; ++j)
      for (Eigen::Index i = j; i < r; ++i) {
        EmbeddedTangent e = zero;
        if (i == j) {
          e.S(i, i) = 1.0;
        } else {
          e.S(i, j) = e.S(j, i) = inv_sqrt2;
        }
        basis.push_back(e);
      }
    for (Eigen::Index j = 0; j < r; ++j)
      for (Eigen::Index i = 0; i < zero.D1.rows(); ++i) {
        EmbeddedTangent e = zero;
        e.D1(i, j) = e.D2(i, j) = inv_sqrt2;
        basis.push_back(e);
      }
    return basis;
  }
  for (Eigen::Index j = 0; j < r; ++j)
    for (Eigen::Index i = 0; i < r; ++i) {
      EmbeddedTangent e = zero;
      e.S(i, j) = 1.0;
      basis.push_back(e);
    }
  for (Eigen::Index j = 0; j < r; ++j)
    for (Eigen::Index i = 0; i < zero.D1.rows(); ++i) {
      EmbeddedTangent e = zero;
      e.D1(i, j) = 1.0;
      basis.push_back(e);
    }
  for (Eigen::Index j = 0; j < r; ++j)
    for (Eigen::Index i = 0; i < zero.D2.rows(); ++i) {
      EmbeddedTangent e = zero;
      e.D2(i, j) = 1.0;
      basis.push_back(e);
    }
  return basis;
}

}  // namespace georank
