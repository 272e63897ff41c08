#include "georank/objectives.hpp"

#include <cmath>

namespace georank {

namespace {

bool is_symmetric(const Mat& M) {
  return M.rows() == M.cols() &&
         (M - M.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, M.cwiseAbs().maxCoeff());
}

}  // namespace

Objective::Objective(Eigen::Index p1, Eigen::Index p2, bool symmetric, ValueFn value,
                     GradFn egrad, HessFn ehess)
    : p1_(p1), p2_(p2), symmetric_(symmetric), value_(std::move(value)),
      egrad_(std::move(egrad)), ehess_(std::move(ehess)) {
  require(!symmetric || p1 == p2, ErrorCode::Dimension, "symmetric objective must be square");
}

void Objective::check_shape(const Mat& X, const char* what) const {
  require(X.rows() == p1_ && X.cols() == p2_, ErrorCode::Dimension,
          std::string(what) + ": argument shape does not match objective");
}

double Objective::value(const Mat& X) const {
  check_shape(X, "value");
  const double v = value_(X);
  require(std::isfinite(v), ErrorCode::Evaluation, "objective value is not finite");
  return v;
}

Mat Objective::egrad(const Mat& X) const {
  check_shape(X, "egrad");
  return egrad_(X);
}

Mat Objective::ehess_vec(const Mat& X, const Mat& Z) const {
  check_shape(X, "ehess_vec");
  check_shape(Z, "ehess_vec");
  return ehess_(X, Z);
}

double Objective::lipschitz_estimate(const Mat& X, int iters) const {
  Mat Z = Mat::Ones(p1_, p2_);
  if (symmetric_) Z = sym(Z);
  double lam = 0.0;
  for (int k = 0; k < iters; ++k) {
    const double n = Z.norm();
    if (n == 0.0) return 0.0;
    Z /= n;
    Mat HZ = ehess_vec(X, Z);
    lam = inner(HZ, Z);
    Z = HZ;
  }
  return std::abs(lam);
}

Objective make_matrix_approx(const Mat& M, bool symmetric) {
  require(M.allFinite(), ErrorCode::Precondition, "matrix approx: target has non-finite entries");
  require(!symmetric || is_symmetric(M), ErrorCode::Symmetry,
          "matrix approx: symmetric flag requires a symmetric target");
  Objective obj(
      M.rows(), M.cols(), symmetric,
      [M](const Mat& X) { return 0.5 * (X - M).squaredNorm(); },
      [M](const Mat& X) -> Mat { return X - M; },
      [](const Mat&, const Mat& Z) -> Mat { return Z; });
  obj.approx_target_ = M;
  return obj;
}

Objective make_masked_completion(const Mat& M, const Mat& mask, bool symmetric) {
  require(M.rows() == mask.rows() && M.cols() == mask.cols(), ErrorCode::Dimension,
          "masked completion: mask shape mismatch");
  require(((mask.array() == 0.0) || (mask.array() == 1.0)).all(), ErrorCode::Precondition,
          "masked completion: mask entries must be 0 or 1");
  require(!symmetric || (is_symmetric(M) && is_symmetric(mask)), ErrorCode::Symmetry,
          "masked completion: symmetric flag requires symmetric target and mask");
  return Objective(
      M.rows(), M.cols(), symmetric,
      [M, mask](const Mat& X) { return 0.5 * (mask.array() * (X - M).array()).matrix().squaredNorm(); },
      [M, mask](const Mat& X) -> Mat { return (mask.array() * (X - M).array()).matrix(); },
      [mask](const Mat&, const Mat& Z) -> Mat { return (mask.array() * Z.array()).matrix(); });
}

Objective make_matrix_sensing(const std::vector<Mat>& A, const Vec& b, bool symmetric) {
  require(!A.empty(), ErrorCode::Dimension, "matrix sensing: need at least one operator");
  require(static_cast<Eigen::Index>(A.size()) == b.size(), ErrorCode::Dimension,
          "matrix sensing: operator and observation counts differ");
  const Eigen::Index p1 = A[0].rows(), p2 = A[0].cols();
  std::vector<Mat> ops;
  for (const auto& Ai : A) {
    require(Ai.rows() == p1 && Ai.cols() == p2, ErrorCode::Dimension,
            "matrix sensing: operators must share a shape");
    ops.push_back(symmetric ? sym(Ai) : Ai);
  }
  require(!symmetric || p1 == p2, ErrorCode::Dimension, "matrix sensing: symmetric needs square");
  // With symmetric operators f(X) = f(X^T), and the gradient is symmetric at every X.
  auto residual = [ops, b](const Mat& X) {
    Vec res(b.size());
    for (Eigen::Index i = 0; i < b.size(); ++i) res(i) = inner(ops[i], X) - b(i);
    return res;
  };
  return Objective(
      p1, p2, symmetric,
      [residual](const Mat& X) { return 0.5 * residual(X).squaredNorm(); },
      [residual, ops, p1, p2](const Mat& X) -> Mat {
        const Vec res = residual(X);
        Mat G = Mat::Zero(p1, p2);
        for (size_t i = 0; i < ops.size(); ++i) G += res(i) * ops[i];
        return G;
      },
      [ops, p1, p2](const Mat&, const Mat& Z) -> Mat {
        Mat H = Mat::Zero(p1, p2);
        for (const auto& Ai : ops) H += inner(Ai, Z) * Ai;
        return H;
      });
}

Objective symmetrize(const Objective& base) {
  require(base.rows() == base.cols(), ErrorCode::Dimension, "symmetrize: objective must be square");
  if (base.symmetric()) return base;
  auto b = std::make_shared<Objective>(base);
  return Objective(
      base.rows(), base.cols(), true,
      [b](const Mat& X) { return 0.5 * (b->value(X) + b->value(X.transpose())); },
      [b](const Mat& X) -> Mat {
        return 0.5 * (b->egrad(X) + b->egrad(X.transpose()).transpose());
      },
      [b](const Mat& X, const Mat& Z) -> Mat {
        return 0.5 * (b->ehess_vec(X, Z) + b->ehess_vec(X.transpose(), Z.transpose()).transpose());
      });
}

}  // namespace georank
