#include "georank/numerics.hpp"

#include <cmath>

namespace georank {

void require(bool ok, ErrorCode code, const std::string& msg) {
  if (!ok) throw Error(code, msg);
}

Mat sym(const Mat& X) {
  require(X.rows() == X.cols(), ErrorCode::Dimension, "sym: matrix must be square");
  return 0.5 * (X + X.transpose());
}

Mat skew(const Mat& X) {
  require(X.rows() == X.cols(), ErrorCode::Dimension, "skew: matrix must be square");
  return 0.5 * (X - X.transpose());
}

Mat solve_sylvester_general(const Mat& A1, const Mat& B1, const Mat& A2, const Mat& B2,
                            const Mat& C) {
  const Eigen::Index m = C.rows(), n = C.cols();
  require(A1.rows() == m && A1.cols() == m && A2.rows() == m && A2.cols() == m &&
              B1.rows() == n && B1.cols() == n && B2.rows() == n && B2.cols() == n,
          ErrorCode::Dimension, "sylvester: incompatible shapes");
  if (m == 0 || n == 0) return Mat::Zero(m, n);
  // vec(A X B) = (B^T kron A) vec(X), column-major vec
  Mat K = Mat::Zero(m * n, m * n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index l = 0; l < n; ++l) {
      if (B1(l, j) != 0.0) K.block(j * m, l * m, m, m) += B1(l, j) * A1;
      if (B2(l, j) != 0.0) K.block(j * m, l * m, m, m) += B2(l, j) * A2;
    }
  Eigen::FullPivLU<Mat> lu(K);
  const double scale = K.cwiseAbs().maxCoeff();
  lu.setThreshold(1e-12);
  require(scale > 0.0 && lu.isInvertible(), ErrorCode::Singular,
          "sylvester: coefficient spectra overlap");
  const Vec c = Eigen::Map<const Vec>(C.data(), m * n);
  Vec x = lu.solve(c);
  return Eigen::Map<Mat>(x.data(), m, n);
}

Mat solve_sylvester(const Mat& A, const Mat& B, const Mat& C) {
  const Eigen::Index m = C.rows(), n = C.cols();
  return solve_sylvester_general(A, Mat::Identity(n, n), Mat::Identity(m, m), B, C);
}

Mat orth_complement(const Mat& U) {
  const Eigen::Index p = U.rows(), r = U.cols();
  const Mat gram = U.transpose() * U;
  require((gram - Mat::Identity(r, r)).cwiseAbs().maxCoeff() <= 1e-12 * std::max<double>(1.0, r),
          ErrorCode::Precondition, "orth_complement: input columns are not orthonormal");
  if (r == p) return Mat(p, 0);
  // Householder QR of U extends it to a full orthogonal basis; the trailing columns span the
  // complement.
  Eigen::HouseholderQR<Mat> qr(U);
  Mat Q = qr.householderQ() * Mat::Identity(p, p);
  Mat C = Q.rightCols(p - r);
  // reorthogonalize against U to clean up round-off
  C -= U * (U.transpose() * C);
  return qf(C);
}

GenEig gen_sym_eig(const Mat& H, const Mat& G) {
  const Eigen::Index d = H.rows();
  require(H.cols() == d && G.rows() == d && G.cols() == d, ErrorCode::Dimension,
          "gen_sym_eig: shape mismatch");
  GenEig out;
  if (d == 0) return out;
  Eigen::SelfAdjointEigenSolver<Mat> ge(sym(G), Eigen::EigenvaluesOnly);
  const double gmax = ge.eigenvalues().maxCoeff();
  const double gmin = ge.eigenvalues().minCoeff();
  require(gmax > 0.0 && gmin > 1e-12 * gmax, ErrorCode::Conditioning,
          "gen_sym_eig: Gram matrix is not positive definite");
  Eigen::LLT<Mat> llt(sym(G));
  require(llt.info() == Eigen::Success, ErrorCode::Conditioning,
          "gen_sym_eig: Cholesky factorization failed");
  const Mat L = llt.matrixL();
  // C = L^{-1} H L^{-T}
  Mat Linv_H = L.triangularView<Eigen::Lower>().solve(sym(H));
  Mat C = L.triangularView<Eigen::Lower>().solve(Linv_H.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(sym(C));
  out.values = es.eigenvalues().reverse();
  Mat W = es.eigenvectors().rowwise().reverse();
  out.vectors = L.transpose().triangularView<Eigen::Upper>().solve(W);
  return out;
}

SpdFunctions spd_functions(const Mat& B) {
  require(B.rows() == B.cols(), ErrorCode::Dimension, "spd_functions: matrix must be square");
  require((B - B.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, B.cwiseAbs().maxCoeff()),
          ErrorCode::Precondition, "spd_functions: matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> es(sym(B));
  const Vec& ev = es.eigenvalues();
  require(ev.size() == 0 || ev.minCoeff() > 0.0, ErrorCode::Precondition,
          "spd_functions: matrix is not positive definite");
  const Mat& Q = es.eigenvectors();
  SpdFunctions out;
  out.sqrt = Q * ev.cwiseSqrt().asDiagonal() * Q.transpose();
  out.inverse = Q * ev.cwiseInverse().asDiagonal() * Q.transpose();
  out.inv_sqrt = Q * ev.cwiseSqrt().cwiseInverse().asDiagonal() * Q.transpose();
  return out;
}

double finite_diff_directional(const std::function<double(const Mat&)>& fn, const Mat& X,
                               const Mat& V, int order, double h) {
  require(h > 0.0, ErrorCode::Precondition, "finite_diff_directional: step must be positive");
  require(order == 1 || order == 2, ErrorCode::Precondition,
          "finite_diff_directional: order must be 1 or 2");
  const double fp = fn(X + h * V);
  const double fm = fn(X - h * V);
  double out;
  if (order == 1) {
    out = (fp - fm) / (2.0 * h);
  } else {
    const double f0 = fn(X);
    out = (fp - 2.0 * f0 + fm) / (h * h);
  }
  require(std::isfinite(fp) && std::isfinite(fm) && std::isfinite(out), ErrorCode::Evaluation,
          "finite_diff_directional: non-finite function value");
  return out;
}

Mat qf(const Mat& A) {
  const Eigen::Index n = A.cols();
  Eigen::HouseholderQR<Mat> qr(A);
  Mat Q = qr.householderQ() * Mat::Identity(A.rows(), n);
  const Mat R = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < n; ++j)
    if (R(j, j) < 0.0) Q.col(j) *= -1.0;
  return Q;
}

Vec singular_values(const Mat& A) {
  if (A.size() == 0) return Vec();
  Eigen::JacobiSVD<Mat> svd(A);
  return svd.singularValues();
}

}  // namespace georank
