#pragma once

#include "georank/numerics.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace georank {

// Smooth f on R^{p1 x p2} given by value, gradient and Hessian-vector callbacks.
class Objective {
 public:
  using ValueFn = std::function<double(const Mat&)>;
  using GradFn = std::function<Mat(const Mat&)>;
  using HessFn = std::function<Mat(const Mat&, const Mat&)>;

  Objective(Eigen::Index p1, Eigen::Index p2, bool symmetric, ValueFn value, GradFn egrad,
            HessFn ehess);

  Eigen::Index rows() const { return p1_; }
  Eigen::Index cols() const { return p2_; }
  bool symmetric() const { return symmetric_; }

  double value(const Mat& X) const;
  Mat egrad(const Mat& X) const;
  Mat ehess_vec(const Mat& X, const Mat& Z) const;
  double ehess_quad(const Mat& X, const Mat& Z) const { return inner(ehess_vec(X, Z), Z); }

  // Target matrix when built by make_matrix_approx; used by the analytic FOSP oracle.
  const std::optional<Mat>& approx_target() const { return approx_target_; }

  // Largest eigenvalue of the Euclidean Hessian at X, by power iteration.
  double lipschitz_estimate(const Mat& X, int iters = 50) const;

 private:
  friend Objective make_matrix_approx(const Mat& M, bool symmetric);
  void check_shape(const Mat& X, const char* what) const;

  Eigen::Index p1_, p2_;
  bool symmetric_;
  ValueFn value_;
  GradFn egrad_;
  HessFn ehess_;
  std::optional<Mat> approx_target_;
};

Objective make_matrix_approx(const Mat& M, bool symmetric);
Objective make_masked_completion(const Mat& M, const Mat& mask, bool symmetric);
Objective make_matrix_sensing(const std::vector<Mat>& A, const Vec& b, bool symmetric);

// f~(X) = (f(X) + f(X^T))/2 for a square base objective.
Objective symmetrize(const Objective& base);

}  // namespace georank
