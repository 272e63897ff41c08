#pragma once

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <string>

namespace georank {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

enum class ErrorCode {
  Dimension = 1,
  Rank,
  Symmetry,
  Precondition,
  Singular,
  Conditioning,
  Variant,
  Evaluation,
  Enumeration,
  Parse,
  Io,
  Ambiguity,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

Mat sym(const Mat& X);
Mat skew(const Mat& X);

// Solves A X + X B = C by a dense Kronecker-vectorized linear solve.
Mat solve_sylvester(const Mat& A, const Mat& B, const Mat& C);

// Solves A1 X B1 + A2 X B2 = C, same approach.
Mat solve_sylvester_general(const Mat& A1, const Mat& B1, const Mat& A2, const Mat& B2,
                            const Mat& C);

Mat orth_complement(const Mat& U);

struct GenEig {
  Vec values;   // descending
  Mat vectors;  // columns G-orthonormal
};

// H v = lambda G v via Cholesky whitening of G.
GenEig gen_sym_eig(const Mat& H, const Mat& G);

struct SpdFunctions {
  Mat sqrt;
  Mat inverse;
  Mat inv_sqrt;
};

SpdFunctions spd_functions(const Mat& B);

double finite_diff_directional(const std::function<double(const Mat&)>& fn, const Mat& X,
                               const Mat& V, int order, double h);

// Orthonormal factor of a thin QR with positive diagonal of R.
Mat qf(const Mat& A);

// Singular values, descending.
Vec singular_values(const Mat& A);

inline double inner(const Mat& A, const Mat& B) { return (A.array() * B.array()).sum(); }

void require(bool ok, ErrorCode code, const std::string& msg);

}  // namespace georank
